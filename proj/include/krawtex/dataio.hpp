#pragma once

#include "krawtex/image.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace krawtex {

/// Unreadable, corrupt or unsupported image or checkpoint file.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reads 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary
/// PPM/PGM. Samples are mapped to [0, 1] by /255; alpha is dropped.
/// Gray files load as ColorSpace::Y, colour files as ColorSpace::RGB.
PlanarImage load_image(const std::filesystem::path& path);

/// Loads as RGB, replicating a gray plane.
PlanarImage load_rgb(const std::filesystem::path& path);

/// Loads as one plane; colour files are reduced to BT.601 luma.
Channel load_gray(const std::filesystem::path& path);

/// Writes PNG, PPM or PGM by extension. Values are clamped to [0, 1] and
/// rounded half away from zero to 8 bits. RGB and YCbCr images must be
/// converted by the caller; only RGB and Y are accepted.
void save_image(const PlanarImage& image, const std::filesystem::path& path);

/// Pairs of (hazy, clear) image paths plus sampling settings.
///
/// File format: one `hazy_path<TAB>clear_path` pair per line, `#` starts a
/// comment, blank lines are ignored. Relative paths resolve against the
/// manifest's directory.
struct DatasetManifest {
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> pairs;
  std::uint64_t seed = 0;
  int patch_size = 128;
  int patches_per_image = 1;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Permutation of 0..count-1 that depends only on the seed.
std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed);

struct PatchPair {
  int y = 0;
  int x = 0;
  PlanarImage hazy;
  PlanarImage clear;
};

/// `count` aligned crops of size x size at uniformly drawn positions.
std::vector<PatchPair> sample_patches(const PlanarImage& hazy, const PlanarImage& clear, int size,
                                      int count, std::uint64_t seed);

/// Named float32 tensors in the `OTGK` container.
struct CheckpointEntry {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct CheckpointFile {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<CheckpointEntry> entries;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;

  const CheckpointEntry* find(const std::string& name) const;
};

/// Layout, all integers little-endian: "OTGK", u32 version, u32 entry count,
/// then per entry u32 name length, name bytes, u32 rank, u32 dims[rank],
/// f32 values[prod(dims)]; finally u64 step and u64 seed.
void write_checkpoint(std::ostream& os, const CheckpointFile& file);
CheckpointFile read_checkpoint(std::istream& is);
void save_checkpoint(const CheckpointFile& file, const std::filesystem::path& path);
CheckpointFile load_checkpoint(const std::filesystem::path& path);

} // namespace krawtex
