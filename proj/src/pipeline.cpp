#include "genhop/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include <json.hpp>

#include "genhop/errors.hpp"
#include "genhop/parallel.hpp"

namespace genhop {

using nlohmann::json;

// ------------------------------------------------------------------ config

GenHopConfig preset_config(std::string_view name) {
  GenHopConfig c;
  c.preset = std::string(name);
  if (name == "mnist") {
    c.hop1 = {{2, 2}, 2, 1};
    c.hop2 = {{2, 2}, 4, 3};
    c.gamma = 0.01;
    c.clusters = 10;
  } else if (name == "fashion") {
    c.hop1 = {{2, 2}, 2, 2};
    c.hop2 = {{2, 2}, 4, 4};
    c.gamma = 0.01;
    c.clusters = 10;
  } else if (name == "celeba") {
    c.height = 32;
    c.width = 32;
    c.channels = 3;
    c.hop1 = {{2, 2}, 3, 1};
    c.hop2 = {{2, 2}, 4, 4};
    c.gamma = 0.03;
    c.clusters = 50;
    c.s1_region = 1;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected mnist, fashion or celeba)");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"mnist", "fashion", "celeba"}; }

void validate_config(const GenHopConfig& c) {
  if (c.channels != 1 && c.channels != 3) {
    throw ConfigError("images must have 1 or 3 channels");
  }
  validate_cascade_config(c.height, c.width, c.cascade_channels(), c.hop1, c.hop2);
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (c.clusters < 1) throw ConfigError("cluster count must be at least 1");
  if (c.k_max < 1 || c.k_max > kMaxNeighbors) {
    throw ConfigError("kmax must lie in [1, 3]");
  }
  const StageShapes s = stage_shapes(c);
  if (c.s4_region < 1 || c.s4_region > std::min(s.s4.h, s.s4.w)) {
    throw ConfigError("S4 LLE region does not fit the S4 grid");
  }
  if (c.s1_region < 1 || c.s1_region > std::min(s.s1.h, s.s1.w)) {
    throw ConfigError("S1 LLE region does not fit the S1 grid");
  }
}

namespace {

json hop_to_json(const HopConfig& h) {
  return {{"block_h", h.block.block_h},
          {"block_w", h.block.block_w},
          {"keep_low", h.keep_low},
          {"keep_high", h.keep_high}};
}

HopConfig hop_from_json(const json& j) {
  HopConfig h;
  h.block.block_h = j.at("block_h").get<std::size_t>();
  h.block.block_w = j.at("block_w").get<std::size_t>();
  h.keep_low = j.at("keep_low").get<std::size_t>();
  h.keep_high = j.at("keep_high").get<std::size_t>();
  return h;
}

json config_json(const GenHopConfig& c) {
  return {{"preset", c.preset},
          {"height", c.height},
          {"width", c.width},
          {"channels", c.channels},
          {"hop1", hop_to_json(c.hop1)},
          {"hop2", hop_to_json(c.hop2)},
          {"gamma", c.gamma},
          {"clusters", c.clusters},
          {"k_max", c.k_max},
          {"s4_region", c.s4_region},
          {"s1_region", c.s1_region},
          {"train_seed", c.train_seed},
          {"kmeans_restarts", c.kmeans.restarts},
          {"kmeans_max_iterations", c.kmeans.max_iterations},
          {"ica_tolerance", c.ica_tolerance},
          {"ica_max_iterations", c.ica_max_iterations}};
}

}  // namespace

std::string config_to_json(const GenHopConfig& c) { return config_json(c).dump(); }

GenHopConfig config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GenHopConfig c;
    c.preset = j.at("preset").get<std::string>();
    c.height = j.at("height").get<std::size_t>();
    c.width = j.at("width").get<std::size_t>();
    c.channels = j.at("channels").get<std::size_t>();
    c.hop1 = hop_from_json(j.at("hop1"));
    c.hop2 = hop_from_json(j.at("hop2"));
    c.gamma = j.at("gamma").get<double>();
    c.clusters = j.at("clusters").get<std::size_t>();
    c.k_max = j.at("k_max").get<std::size_t>();
    c.s4_region = j.at("s4_region").get<std::size_t>();
    c.s1_region = j.at("s1_region").get<std::size_t>();
    c.train_seed = j.at("train_seed").get<std::uint64_t>();
    c.kmeans.restarts = j.at("kmeans_restarts").get<std::size_t>();
    c.kmeans.max_iterations = j.at("kmeans_max_iterations").get<std::size_t>();
    c.ica_tolerance = j.at("ica_tolerance").get<double>();
    c.ica_max_iterations = j.at("ica_max_iterations").get<std::size_t>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid configuration: ") + e.what());
  }
}

StageShapes stage_shapes(const GenHopConfig& c) {
  validate_cascade_config(c.height, c.width, c.cascade_channels(), c.hop1, c.hop2);
  StageShapes s;
  s.s0 = {c.height, c.width, c.cascade_channels()};
  s.s1 = {c.height / c.hop1.block.block_h, c.width / c.hop1.block.block_w,
          c.hop1.block.area() * c.cascade_channels()};
  const std::size_t h4 = s.s1.h / c.hop2.block.block_h;
  const std::size_t w4 = s.s1.w / c.hop2.block.block_w;
  s.hop2_all = {h4, w4, c.hop2.block.area() * c.hop1.keep_low};
  s.s4 = {h4, w4, c.hop2.keep_low};
  s.hf1 = {s.s1.h, s.s1.w, c.hop1.keep_high};
  s.hf2 = {h4, w4, c.hop2.keep_high};
  return s;
}

// ---------------------------------------------------------------- training

namespace {

class StageClock {
public:
  explicit StageClock(TrainReport* report) : report_(report) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    if (report_) {
      report_->timings.push_back(
          {stage, std::chrono::duration<double>(now - last_).count()});
    }
    last_ = now;
  }

private:
  TrainReport* report_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

GenHopModel train(std::span<const ImageTensor> images, const GenHopConfig& config,
                  TrainReport* report) {
  validate_config(config);
  if (images.size() < kMinTrainingImages) {
    throw InsufficientSamplesError("training needs at least " +
                                   std::to_string(kMinTrainingImages) +
                                   " images, got " + std::to_string(images.size()));
  }
  for (const auto& img : images) {
    if (img.height() != config.height || img.width() != config.width ||
        img.channels() != config.channels) {
      throw DimensionError("training image is " + std::to_string(img.height()) +
                           "x" + std::to_string(img.width()) + "x" +
                           std::to_string(img.channels()) + ", configuration expects " +
                           std::to_string(config.height) + "x" +
                           std::to_string(config.width) + "x" +
                           std::to_string(config.channels));
    }
    if (!img.all_finite()) throw DimensionError("training image has non-finite values");
  }

  StageClock clock(report);
  GenHopModel model;
  model.config = config;
  const std::size_t n = images.size();

  std::vector<ImageTensor> working;
  if (config.channels == 3) {
    model.color = fit_pixel_pca(images);
    working.resize(n);
    parallel_for(n, [&](std::size_t i) { working[i] = rgb_to_pq(images[i], *model.color); });
    clock.lap("color decorrelation");
  }
  const std::span<const ImageTensor> input =
      config.channels == 3 ? std::span<const ImageTensor>(working) : images;

  model.cascade = fit_cascade(input, config.hop1, config.hop2);
  clock.lap("cascade fit");

  std::vector<ImageTensor> s4(n), hf1(n), hf2(n), lf1(n);
  parallel_for(n, [&](std::size_t i) {
    CascadeOutput out = cascade_forward(input[i], model.cascade);
    // Stage-2 banks condition on the same truncated reconstruction that
    // generation produces.
    lf1[i] = hop2_inverse(out.s4, out.hf2, model.cascade);
    s4[i] = std::move(out.s4);
    hf1[i] = std::move(out.hf1);
    hf2[i] = std::move(out.hf2);
  });
  clock.lap("cascade analysis");

  SeedOptions seed_options;
  seed_options.gamma = config.gamma;
  seed_options.clusters = config.clusters;
  seed_options.seed = config.train_seed;
  seed_options.kmeans = config.kmeans;
  seed_options.ica_tolerance = config.ica_tolerance;
  seed_options.ica_max_iterations = config.ica_max_iterations;
  model.seed = fit_seed_model(s4, seed_options);
  clock.lap("seed model");

  model.s4_stage = build_codebooks(s4, hf2, config.s4_region, config.k_max);
  model.s1_stage = build_codebooks(lf1, hf1, config.s1_region, config.k_max);
  if (model.color) {
    model.color->rgb_stage = build_codebooks(working, images, 1, config.k_max);
  }
  clock.lap("LLE codebooks");

  if (report) {
    report->images = n;
    report->shapes = stage_shapes(config);
    report->reduced_dim = model.seed.pca.reduced_dim();
    report->clusters = model.seed.clusters.size();
    report->ica_converged = static_cast<std::size_t>(std::count_if(
        model.seed.clusters.densities.begin(), model.seed.clusters.densities.end(),
        [](const ClusterDensity& d) { return d.kind == UnmixingKind::kIca; }));
  }
  return model;
}

// -------------------------------------------------------------- generation

ImageTensor generate_one(const GenHopModel& model, std::uint64_t master_seed,
                         std::size_t index) {
  Rng rng = make_rng(master_seed, index);
  const ImageTensor seed = sample_seed(model.seed, rng);

  const FieldRecovery detail4 = recover_field(seed, model.s4_stage);
  const ImageTensor lf1 = hop2_inverse(detail4.lf, detail4.hf, model.cascade);
  const FieldRecovery detail1 = recover_field(lf1, model.s1_stage);
  ImageTensor image = hop1_inverse(detail1.lf, detail1.hf, model.cascade);
  if (model.color) image = pq_to_rgb(image, *model.color);

  for (auto& v : image.data()) v = std::clamp(v, 0.0, 1.0);
  return image;
}

std::vector<ImageTensor> generate(const GenHopModel& model, std::size_t count,
                                  std::uint64_t master_seed) {
  std::vector<ImageTensor> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = generate_one(model, master_seed, i); });
  return out;
}

// ----------------------------------------------------------- serialization

namespace {

std::string key(const std::string& prefix, std::size_t i, const char* leaf) {
  return prefix + "/" + std::to_string(i) + "/" + leaf;
}

void put_basis(ModelWriter& w, const std::string& prefix, const SaabBasis& b) {
  w.add_vector(prefix + "/dc", b.dc_kernel);
  w.add_matrix(prefix + "/ac", b.ac_kernels);
  w.add_vector(prefix + "/energy", b.energies);
}

SaabBasis get_basis(const ModelReader& r, const std::string& prefix) {
  SaabBasis b;
  b.dc_kernel = r.vector(prefix + "/dc");
  b.ac_kernels = r.matrix(prefix + "/ac");
  b.energies = r.vector(prefix + "/energy");
  return b;
}

json stage_layout(const LLEStage& s) {
  json regions = json::array();
  for (const auto& b : s.books) {
    regions.push_back({b.region.y, b.region.x, b.region.h, b.region.w, b.k_max});
  }
  return {{"grid_h", s.grid_h},           {"grid_w", s.grid_w},
          {"lf_channels", s.lf_channels}, {"hf_channels", s.hf_channels},
          {"region_size", s.region_size}, {"regions", regions}};
}

void put_stage(ModelWriter& w, const std::string& prefix, const LLEStage& s) {
  for (std::size_t i = 0; i < s.books.size(); ++i) {
    w.add_matrix(key(prefix, i, "lf"), s.books[i].lf_bank);
    w.add_matrix(key(prefix, i, "hf"), s.books[i].hf_bank);
  }
}

LLEStage get_stage(const ModelReader& r, const std::string& prefix, const json& j) {
  LLEStage s;
  s.grid_h = j.at("grid_h").get<std::size_t>();
  s.grid_w = j.at("grid_w").get<std::size_t>();
  s.lf_channels = j.at("lf_channels").get<std::size_t>();
  s.hf_channels = j.at("hf_channels").get<std::size_t>();
  s.region_size = j.at("region_size").get<std::size_t>();
  const auto& regions = j.at("regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& e = regions[i];
    LLECodebook b;
    b.region = {e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                e.at(2).get<std::size_t>(), e.at(3).get<std::size_t>()};
    b.k_max = e.at(4).get<std::size_t>();
    b.lf_bank = r.matrix(key(prefix, i, "lf"));
    b.hf_bank = r.matrix(key(prefix, i, "hf"));
    s.books.push_back(std::move(b));
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> serialize(const GenHopModel& model) {
  ModelWriter w;
  const auto& cascade = model.cascade;
  const auto& pca = model.seed.pca;
  const auto& clusters = model.seed.clusters;

  json layout;
  layout["cascade"] = {{"in_h", cascade.in_h},
                       {"in_w", cascade.in_w},
                       {"in_c", cascade.in_c},
                       {"hop1", hop_to_json(cascade.hop1_cfg)},
                       {"hop2", hop_to_json(cascade.hop2_cfg)},
                       {"hop2_units", cascade.hop2.size()},
                       {"channel_order", cascade.channel_order}};
  layout["spatial_pca"] = {{"gamma", pca.gamma},
                           {"height", pca.height},
                           {"width", pca.width},
                           {"channels", pca.channels.size()}};
  json kinds = json::array();
  for (const auto& d : clusters.densities) kinds.push_back(static_cast<int>(d.kind));
  layout["clusters"] = {{"count", clusters.size()}, {"unmixing_kind", kinds}};
  layout["s4_stage"] = stage_layout(model.s4_stage);
  layout["s1_stage"] = stage_layout(model.s1_stage);
  layout["color"] = model.color ? stage_layout(model.color->rgb_stage) : json(nullptr);

  w.add_text("config", config_to_json(model.config));
  w.add_text("layout", layout.dump());

  put_basis(w, "cascade/hop1", cascade.hop1);
  for (std::size_t p = 0; p < cascade.hop2.size(); ++p) {
    put_basis(w, "cascade/hop2/" + std::to_string(p), cascade.hop2[p]);
  }
  for (std::size_t c = 0; c < pca.channels.size(); ++c) {
    const auto& pc = pca.channels[c];
    w.add_vector(key("seed/pca", c, "mean"), pc.mean);
    w.add_matrix(key("seed/pca", c, "components"), pc.components);
    w.add_vector(key("seed/pca", c, "eigenvalues"), pc.eigenvalues);
    w.add_vector(key("seed/pca", c, "normalized"), pc.normalized);
  }
  w.add_matrix("seed/centroids", clusters.centroids);
  w.add_vector("seed/priors", clusters.priors);
  for (std::size_t j = 0; j < clusters.densities.size(); ++j) {
    const auto& d = clusters.densities[j];
    w.add_vector(key("seed/cluster", j, "mean"), d.mean);
    w.add_matrix(key("seed/cluster", j, "unmixing"), d.unmixing);
    w.add_matrix(key("seed/cluster", j, "mixing"), d.mixing);
    const std::size_t n = d.tables.empty() ? 0 : d.tables.front().values.size();
    Matrix cdf(static_cast<Eigen::Index>(d.tables.size()), static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < d.tables.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        cdf(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = d.tables[t].values[i];
      }
    }
    w.add_matrix(key("seed/cluster", j, "cdf"), cdf);
  }
  put_stage(w, "lle/s4", model.s4_stage);
  put_stage(w, "lle/s1", model.s1_stage);
  if (model.color) {
    w.add_vector("color/mean", model.color->mean);
    w.add_matrix("color/basis", model.color->basis);
    w.add_vector("color/eigenvalues", model.color->eigenvalues);
    put_stage(w, "color/rgb", model.color->rgb_stage);
  }
  return w.bytes();
}

GenHopModel deserialize(const ModelReader& r) {
  try {
    GenHopModel model;
    model.format_version = r.version();
    model.config = config_from_json(r.text("config"));
    const json layout = json::parse(r.text("layout"));

    auto& cascade = model.cascade;
    const auto& lc = layout.at("cascade");
    cascade.in_h = lc.at("in_h").get<std::size_t>();
    cascade.in_w = lc.at("in_w").get<std::size_t>();
    cascade.in_c = lc.at("in_c").get<std::size_t>();
    cascade.hop1_cfg = hop_from_json(lc.at("hop1"));
    cascade.hop2_cfg = hop_from_json(lc.at("hop2"));
    cascade.channel_order = lc.at("channel_order").get<std::vector<std::size_t>>();
    cascade.hop1 = get_basis(r, "cascade/hop1");
    const auto units = lc.at("hop2_units").get<std::size_t>();
    for (std::size_t p = 0; p < units; ++p) {
      cascade.hop2.push_back(get_basis(r, "cascade/hop2/" + std::to_string(p)));
    }

    auto& pca = model.seed.pca;
    const auto& lp = layout.at("spatial_pca");
    pca.gamma = lp.at("gamma").get<double>();
    pca.height = lp.at("height").get<std::size_t>();
    pca.width = lp.at("width").get<std::size_t>();
    const auto pca_channels = lp.at("channels").get<std::size_t>();
    for (std::size_t c = 0; c < pca_channels; ++c) {
      ChannelPCA pc;
      pc.mean = r.vector(key("seed/pca", c, "mean"));
      pc.components = r.matrix(key("seed/pca", c, "components"));
      pc.eigenvalues = r.vector(key("seed/pca", c, "eigenvalues"));
      pc.normalized = r.vector(key("seed/pca", c, "normalized"));
      pca.channels.push_back(std::move(pc));
    }

    auto& clusters = model.seed.clusters;
    clusters.centroids = r.matrix("seed/centroids");
    clusters.priors = r.vector("seed/priors");
    const auto& kinds = layout.at("clusters").at("unmixing_kind");
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      ClusterDensity d;
      d.mean = r.vector(key("seed/cluster", j, "mean"));
      d.unmixing = r.matrix(key("seed/cluster", j, "unmixing"));
      d.mixing = r.matrix(key("seed/cluster", j, "mixing"));
      d.kind = static_cast<UnmixingKind>(kinds.at(j).get<int>());
      const Matrix& cdf = r.matrix(key("seed/cluster", j, "cdf"));
      for (Eigen::Index t = 0; t < cdf.rows(); ++t) {
        d.tables.push_back(CdfTable{{cdf.row(t).begin(), cdf.row(t).end()}});
      }
      clusters.densities.push_back(std::move(d));
    }

    model.s4_stage = get_stage(r, "lle/s4", layout.at("s4_stage"));
    model.s1_stage = get_stage(r, "lle/s1", layout.at("s1_stage"));
    if (!layout.at("color").is_null()) {
      ColorModel color;
      color.mean = r.vector("color/mean");
      color.basis = r.matrix("color/basis");
      color.eigenvalues = r.vector("color/eigenvalues");
      color.rgb_stage = get_stage(r, "color/rgb", layout.at("color"));
      model.color = std::move(color);
    }
    if ((model.config.channels == 3) != model.color.has_value()) {
      throw FormatError("color model presence does not match the channel count");
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid model layout: ") + e.what());
  }
}

void save(const GenHopModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  ModelWriter::write_bytes(path, bytes);
}

GenHopModel load(const std::filesystem::path& path) {
  return deserialize(ModelReader::open(path));
}

}  // namespace genhop
