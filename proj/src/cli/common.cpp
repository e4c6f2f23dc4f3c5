#include "common.hpp"

#include "krawtex/dataio.hpp"
#include "krawtex/haze.hpp"
#include "krawtex/nn/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <set>

namespace krawtex::cli {

namespace {

bool is_image(const fs::path& p)
{
  static const std::set<std::string> exts{".png", ".ppm", ".pgm"};
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return exts.count(ext) != 0;
}

} // namespace

json option_values(const CLI::App& app)
{
  json values = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name.rfind("help", 0) == 0 || name == "seed")
      continue;
    if (opt->get_type_size_max() == 0) {
      values[name] = opt->count() > 0;
      continue;
    }
    if (opt->count() == 0) {
      if (opt->get_default_str().empty())
        values[name] = nullptr;
      else
        values[name] = opt->get_default_str();
      continue;
    }
    const auto& r = opt->results();
    if (r.size() == 1)
      values[name] = r.front();
    else
      values[name] = r;
  }
  return values;
}

void write_json_line(std::ostream& os, const json& value)
{
  os << value.dump() << '\n';
}

std::vector<std::pair<fs::path, fs::path>> pair_directories(const fs::path& hazy_dir,
                                                            const fs::path& clear_dir)
{
  if (!fs::is_directory(hazy_dir))
    throw UsageError("not a directory: " + hazy_dir.string());
  if (!fs::is_directory(clear_dir))
    throw UsageError("not a directory: " + clear_dir.string());
  std::vector<std::pair<fs::path, fs::path>> pairs;
  for (const auto& entry : fs::directory_iterator(hazy_dir)) {
    if (!entry.is_regular_file() || !is_image(entry.path()))
      continue;
    const fs::path clear = clear_dir / entry.path().filename();
    if (!fs::exists(clear))
      throw FormatError("no clear image for " + entry.path().string());
    pairs.emplace_back(entry.path(), clear);
  }
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty())
    throw FormatError("no images in " + hazy_dir.string());
  return pairs;
}

std::vector<std::pair<fs::path, fs::path>> image_pairs(const std::string& manifest,
                                                       const std::string& hazy_dir,
                                                       const std::string& clear_dir)
{
  if (!manifest.empty()) {
    if (!hazy_dir.empty() || !clear_dir.empty())
      throw UsageError("give either --manifest or --hazy-dir/--clear-dir, not both");
    return load_manifest(manifest).pairs;
  }
  if (hazy_dir.empty() || clear_dir.empty())
    throw UsageError("need --manifest or both --hazy-dir and --clear-dir");
  return pair_directories(hazy_dir, clear_dir);
}

std::ofstream open_output(const fs::path& path)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot write " + path.string());
  return os;
}

Channel luma_of(const PlanarImage& image)
{
  switch (image.colorspace) {
  case ColorSpace::Y:
    return image.channels.at(0);
  case ColorSpace::YCbCr:
    return image.channels.at(0);
  case ColorSpace::RGB:
    return rgb_to_ycbcr(image).y;
  }
  throw std::logic_error("unknown colour space");
}

PlanarImage dehaze_with_model(nn::Generator& generator, const PlanarImage& image)
{
  if (image.colorspace == ColorSpace::Y)
    return PlanarImage({nn::dehaze_luma(generator, image.channels.at(0))}, ColorSpace::Y);
  const YCbCrImage ycc = rgb_to_ycbcr(image);
  return ycbcr_to_rgb(ycc.with_luma(nn::dehaze_luma(generator, ycc.y)).fit_luma_to_gamut());
}

PlanarImage dehaze_with_dcp(const PlanarImage& image, double t0, int patch)
{
  if (image.colorspace == ColorSpace::Y) {
    const Channel& y = image.channels.at(0);
    const PlanarImage rgb({y, y, y}, ColorSpace::RGB);
    return PlanarImage({luma_of(dcp_dehaze(rgb, t0, patch).dehazed)}, ColorSpace::Y);
  }
  const YCbCrImage ycc = rgb_to_ycbcr(image);
  return ycbcr_to_rgb(ycc.with_luma(luma_of(dcp_dehaze(image, t0, patch).dehazed)).fit_luma_to_gamut());
}

PlanarImage metric_view(const PlanarImage& image, bool y_only)
{
  if (y_only || image.colorspace == ColorSpace::Y)
    return PlanarImage({luma_of(image)}, ColorSpace::Y);
  return image;
}

} // namespace krawtex::cli
