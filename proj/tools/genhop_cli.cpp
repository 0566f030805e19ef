// genhop: train GenHop models, generate images, inspect model files.
//
// Exit codes: 0 success, 2 bad arguments/paths/configuration/data,
// 3 unreadable or incompatible model file, 1 anything else.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "genhop/dataset.hpp"
#include "genhop/errors.hpp"
#include "genhop/image_io.hpp"
#include "genhop/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitModel = 3;
constexpr std::size_t kMaxGridTiles = 256;

struct TrainArgs {
  std::string preset = "mnist";
  std::string data;
  std::string out;
  std::uint64_t train_seed = 0;
  std::optional<std::size_t> clusters;
  std::optional<double> gamma;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> size;
  std::size_t limit = 0;
  bool json = false;
};

struct GenerateArgs {
  std::string model;
  std::size_t count = 64;
  std::uint64_t seed = 0;
  std::string out;
  bool json = false;
};

struct InspectArgs {
  std::string model;
  bool json = false;
};

json shape_json(const genhop::GridShape& s) { return {s.h, s.w, s.c}; }

int run_train(const TrainArgs& a) {
  genhop::GenHopConfig cfg = genhop::preset_config(a.preset);
  cfg.train_seed = a.train_seed;
  if (a.clusters) cfg.clusters = *a.clusters;
  if (a.gamma) cfg.gamma = *a.gamma;
  if (a.kmax) cfg.k_max = *a.kmax;
  if (a.size) cfg.height = cfg.width = *a.size;
  genhop::validate_config(cfg);

  const auto source = genhop::resolve_source(a.data, cfg.height, cfg.width, cfg.channels);
  const auto images = genhop::load_dataset(source, a.limit);
  std::cerr << "loaded " << images.size() << " images from " << source.path << "\n";

  genhop::TrainReport report;
  const auto model = genhop::train(images, cfg, &report);
  genhop::save(model, a.out);

  if (a.json) {
    json timings = json::object();
    for (const auto& t : report.timings) timings[t.stage] = t.seconds;
    json summary = {{"command", "train"},
                    {"model", a.out},
                    {"preset", cfg.preset},
                    {"images", report.images},
                    {"s0", shape_json(report.shapes.s0)},
                    {"s1", shape_json(report.shapes.s1)},
                    {"s4", shape_json(report.shapes.s4)},
                    {"hf1", shape_json(report.shapes.hf1)},
                    {"hf2", shape_json(report.shapes.hf2)},
                    {"reduced_dim", report.reduced_dim},
                    {"clusters", report.clusters},
                    {"ica_converged", report.ica_converged},
                    {"timings", timings}};
    std::cout << summary.dump() << "\n";
    return 0;
  }
  const auto& s = report.shapes;
  auto fmt = [](const genhop::GridShape& g) {
    return std::to_string(g.h) + "x" + std::to_string(g.w) + "x" + std::to_string(g.c);
  };
  std::cout << "trained on " << report.images << " images (preset " << cfg.preset << ")\n"
            << "  S0 " << fmt(s.s0) << "  S1 " << fmt(s.s1) << "  hop-2 children "
            << fmt(s.hop2_all) << "\n"
            << "  S4 " << fmt(s.s4) << "  hf1 " << fmt(s.hf1) << "  hf2 " << fmt(s.hf2) << "\n"
            << "  reduced seed dimension " << report.reduced_dim << ", " << report.clusters
            << " clusters (" << report.ica_converged << " with converged ICA)\n";
  for (const auto& t : report.timings) {
    std::cout << "  " << std::left << std::setw(20) << t.stage << std::fixed
              << std::setprecision(3) << t.seconds << " s\n";
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

int run_generate(const GenerateArgs& a) {
  const auto model = genhop::load(a.model);
  const auto images = genhop::generate(model, a.count, a.seed);

  fs::create_directories(a.out);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05zu.png", i);
    genhop::write_png(fs::path(a.out) / name, images[i]);
  }
  fs::path grid_path;
  if (!images.empty()) {
    const std::size_t tiles = std::min(images.size(), kMaxGridTiles);
    const auto columns = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(tiles))));
    grid_path = fs::path(a.out) / "grid.png";
    genhop::write_png(grid_path, genhop::tile_grid(
                                     std::span(images).first(tiles), columns));
  }
  if (a.json) {
    std::cout << json{{"command", "generate"},
                      {"model", a.model},
                      {"count", images.size()},
                      {"seed", a.seed},
                      {"out", a.out},
                      {"grid", grid_path.string()}}
                     .dump()
              << "\n";
  } else {
    std::cout << "wrote " << images.size() << " samples to " << a.out << "\n";
  }
  return 0;
}

std::vector<double> to_std(const genhop::Vector& v) { return {v.begin(), v.end()}; }

int run_inspect(const InspectArgs& a) {
  const auto model = genhop::load(a.model);
  const auto& c = model.cascade;

  json hop2 = json::array();
  for (const auto& b : c.hop2) hop2.push_back(to_std(b.normalized_energies()));
  json pca = json::array();
  for (const auto& ch : model.seed.pca.channels) pca.push_back(ch.components.rows());
  auto books = [](const genhop::LLEStage& s) {
    return json{{"codebooks", s.books.size()},
                {"entries", s.books.empty() ? 0 : s.books.front().entries()},
                {"region", s.region_size}};
  };
  json report = {
      {"format_version", model.format_version},
      {"config", json::parse(genhop::config_to_json(model.config))},
      {"hop1_energy", to_std(c.hop1.normalized_energies())},
      {"hop2_energy", hop2},
      {"channel_order", c.channel_order},
      {"reduced_dim", model.seed.pca.reduced_dim()},
      {"spatial_components", pca},
      {"cluster_priors", to_std(model.seed.clusters.priors)},
      {"s4_lle", books(model.s4_stage)},
      {"s1_lle", books(model.s1_stage)},
      {"color", model.color ? books(model.color->rgb_stage) : json(nullptr)}};
  if (a.json) {
    std::cout << report.dump() << "\n";
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GenHop: successive-subspace image generation"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model and write it to a file");
  t->add_option("--preset", train.preset, "Hyper-parameter preset (mnist, fashion, celeba)")
      ->capture_default_str();
  t->add_option("--data", train.data, "IDX file, directory with IDX files, or image directory")
      ->required();
  t->add_option("--out", train.out, "Output model file")->required();
  t->add_option("--train-seed", train.train_seed, "Seed for clustering and ICA");
  t->add_option("--clusters", train.clusters, "Number of k-means clusters");
  t->add_option("--gamma", train.gamma, "Spatial PCA energy threshold");
  t->add_option("--kmax", train.kmax, "LLE neighbor bound (1-3)");
  t->add_option("--size", train.size, "Square input size for image directories");
  t->add_option("--limit", train.limit, "Use only the first N images (0 = all)");
  t->add_flag("--json", train.json, "Print a JSON summary line");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate PNG samples and a grid montage");
  g->add_option("--model", gen.model, "Model file")->required();
  g->add_option("--count", gen.count, "Number of samples")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--json", gen.json, "Print a JSON summary line");

  InspectArgs ins;
  auto* i = app.add_subcommand("inspect", "Print a model report");
  i->add_option("--model", ins.model, "Model file")->required();
  i->add_flag("--json", ins.json, "Print the report as one JSON line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*t) return run_train(train);
    if (*g) return run_generate(gen);
    if (*i) return run_inspect(ins);
  } catch (const genhop::FormatError& e) {
    std::cerr << "genhop: error: " << e.what() << "\n";
    return kExitModel;
  } catch (const genhop::IoError& e) {
    std::cerr << "genhop: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const genhop::ConfigError& e) {
    std::cerr << "genhop: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const genhop::Error& e) {
    std::cerr << "genhop: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "genhop: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
