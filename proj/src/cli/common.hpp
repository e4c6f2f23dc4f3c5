#pragma once

#include "krawtex/colorspace.hpp"
#include "krawtex/image.hpp"
#include "krawtex/nn/generator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace krawtex::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Bad flag values detected after parsing; maps to the usage exit code.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out;
  std::uint64_t seed = 0;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void(Context&)> run;
  /// Main output file; `<target>.config.json` echoes the run's settings.
  /// Empty when the command writes no file.
  std::function<fs::path()> echo_target;
};

using Registry = std::vector<Command>;

void add_basis(CLI::App& root, Registry& registry);
void add_analyze(CLI::App& root, Registry& registry);
void add_transform(CLI::App& root, Registry& registry);
void add_synthesize(CLI::App& root, Registry& registry);
void add_toyset(CLI::App& root, Registry& registry);
void add_train(CLI::App& root, Registry& registry);
void add_dehaze(CLI::App& root, Registry& registry);
void add_evaluate(CLI::App& root, Registry& registry);
void add_gradcheck(CLI::App& root, Registry& registry);

/// Every option of `app` with its parsed or default value.
json option_values(const CLI::App& app);

void write_json_line(std::ostream& os, const json& value);

/// Image files of `hazy_dir` matched by file name with `clear_dir`, sorted.
std::vector<std::pair<fs::path, fs::path>> pair_directories(const fs::path& hazy_dir,
                                                            const fs::path& clear_dir);
/// Pairs from a manifest or from two directories, whichever was given.
std::vector<std::pair<fs::path, fs::path>> image_pairs(const std::string& manifest,
                                                       const std::string& hazy_dir,
                                                       const std::string& clear_dir);

std::ofstream open_output(const fs::path& path);

/// Y plane of any image; colour images are converted with BT.601.
Channel luma_of(const PlanarImage& image);

/// Dehazes the luma of `image` with `generator`; chroma passes through
/// unchanged. Gray images stay gray.
PlanarImage dehaze_with_model(nn::Generator& generator, const PlanarImage& image);

/// Dark-channel-prior dehazing, with only the luma of the result kept.
PlanarImage dehaze_with_dcp(const PlanarImage& image, double t0, int patch);

/// Full image for metrics: RGB, or the luma plane when `y_only`.
PlanarImage metric_view(const PlanarImage& image, bool y_only);

} // namespace krawtex::cli
