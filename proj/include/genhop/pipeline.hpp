#pragma once

// End-to-end GenHop model: training (analysis) and generation (synthesis).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genhop/color.hpp"
#include "genhop/lle.hpp"
#include "genhop/model_io.hpp"
#include "genhop/saab.hpp"
#include "genhop/seed.hpp"
#include "genhop/tensor.hpp"

namespace genhop {

struct GenHopConfig {
  std::string preset = "custom";
  // Expected input shape; channels is 1 (grayscale) or 3 (RGB).
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t channels = 1;

  HopConfig hop1{{2, 2}, 2, 1};
  HopConfig hop2{{2, 2}, 4, 3};
  double gamma = 0.01;
  std::size_t clusters = 10;
  std::size_t k_max = kMaxNeighbors;
  std::size_t s4_region = 2;  // LLE region side on the S4 grid
  std::size_t s1_region = 3;  // LLE region side on the S1 grid; 1 = per location
  std::uint64_t train_seed = 0;

  KMeansOptions kmeans;
  double ica_tolerance = 1e-4;
  std::size_t ica_max_iterations = 500;

  /// Channels entering the cascade: 2 (P, Q) for RGB input, else 1.
  std::size_t cascade_channels() const { return channels == 3 ? 2 : 1; }

  friend bool operator==(const GenHopConfig&, const GenHopConfig&) = default;
};

/// Built-in hyper-parameter sets: "mnist", "fashion", "celeba".
GenHopConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();

/// Throws ConfigError on an inconsistent configuration.
void validate_config(const GenHopConfig& config);

std::string config_to_json(const GenHopConfig& config);
GenHopConfig config_from_json(const std::string& text);

struct GridShape {
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t c = 0;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Tensor shapes along the analysis path.
struct StageShapes {
  GridShape s0;           // cascade input (after color reduction)
  GridShape s1;           // every hop-1 channel
  GridShape hop2_all;     // every hop-2 child before discarding
  GridShape s4;           // forwarded hop-2 children
  GridShape hf1;
  GridShape hf2;
};

StageShapes stage_shapes(const GenHopConfig& config);

struct GenHopModel {
  GenHopConfig config;
  CascadeModel cascade;
  SeedModel seed;
  LLEStage s4_stage;  // S4 LF -> hf2
  LLEStage s1_stage;  // forwarded hop-1 channels -> hf1
  std::optional<ColorModel> color;
  std::uint32_t format_version = kFormatVersion;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<StageTiming> timings;
  std::size_t images = 0;
  StageShapes shapes;
  std::size_t reduced_dim = 0;  // dimension of the reduced seed space
  std::size_t clusters = 0;
  std::size_t ica_converged = 0;
};

/// Needs at least this many training images.
inline constexpr std::size_t kMinTrainingImages = 100;

GenHopModel train(std::span<const ImageTensor> images, const GenHopConfig& config,
                  TrainReport* report = nullptr);

/// Sample `index` of the stream identified by master_seed.
ImageTensor generate_one(const GenHopModel& model, std::uint64_t master_seed,
                         std::size_t index);
std::vector<ImageTensor> generate(const GenHopModel& model, std::size_t count,
                                  std::uint64_t master_seed);

std::vector<std::uint8_t> serialize(const GenHopModel& model);
GenHopModel deserialize(const ModelReader& reader);
void save(const GenHopModel& model, const std::filesystem::path& path);
GenHopModel load(const std::filesystem::path& path);

}  // namespace genhop
