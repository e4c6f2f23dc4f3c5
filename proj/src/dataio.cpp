#include "krawtex/dataio.hpp"

#include "krawtex/colorspace.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

namespace krawtex {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path)
{
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::uint8_t to_byte(double v)
{
  v = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::round(v));
}

PlanarImage from_interleaved(const std::vector<std::uint8_t>& px, int h, int w, int stride,
                             int colour_channels)
{
  std::vector<Channel> planes(colour_channels, Channel(h, w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < colour_channels; ++c)
        planes[c](y, x) = px[(static_cast<std::size_t>(y) * w + x) * stride + c] / 255.0;
  return PlanarImage(std::move(planes), colour_channels == 1 ? ColorSpace::Y : ColorSpace::RGB);
}

// libpng reports errors through longjmp; keep the setjmp frames free of
// objects with destructors.
struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

bool read_png_header(std::FILE* f, PngReader& r, int& w, int& h, int& channels, std::size_t& rowbytes)
{
  if (setjmp(png_jmpbuf(r.png)))
    return false;
  png_init_io(r.png, f);
  png_read_info(r.png, r.info);
  const png_byte colour = png_get_color_type(r.png, r.info);
  const png_byte depth = png_get_bit_depth(r.png, r.info);
  if (depth == 16)
    png_set_strip_16(r.png);
  if (colour == PNG_COLOR_TYPE_PALETTE)
    png_set_palette_to_rgb(r.png);
  if (colour == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(r.png);
  png_read_update_info(r.png, r.info);
  w = static_cast<int>(png_get_image_width(r.png, r.info));
  h = static_cast<int>(png_get_image_height(r.png, r.info));
  channels = png_get_channels(r.png, r.info);
  rowbytes = png_get_rowbytes(r.png, r.info);
  return true;
}

bool read_png_raster(PngReader& r, png_bytepp rows)
{
  if (setjmp(png_jmpbuf(r.png)))
    return false;
  png_read_image(r.png, rows);
  png_read_end(r.png, nullptr);
  return true;
}

PlanarImage load_png(const fs::path& path)
{
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f)
    throw FormatError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw FormatError("not a PNG file: " + path.string());
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png)
    throw FormatError("libpng initialisation failed");
  r.info = png_create_info_struct(r.png);
  png_set_sig_bytes(r.png, 8);
  int w = 0, h = 0, channels = 0;
  std::size_t rowbytes = 0;
  if (!read_png_header(f.get(), r, w, h, channels, rowbytes))
    throw FormatError("corrupt PNG file: " + path.string());
  std::vector<std::uint8_t> px(rowbytes * h, 0);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = px.data() + rowbytes * y;
  if (!read_png_raster(r, rows.data()))
    throw FormatError("corrupt PNG file: " + path.string());
  const int colour = channels >= 3 ? 3 : 1;
  return from_interleaved(px, h, w, channels, colour);
}

bool write_png_rows(std::FILE* f, PngWriter& wr, int w, int h, int channels,
                    std::vector<std::uint8_t>& px)
{
  if (setjmp(png_jmpbuf(wr.png)))
    return false;
  png_init_io(wr.png, f);
  png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  for (int y = 0; y < h; ++y)
    png_write_row(wr.png, px.data() + static_cast<std::size_t>(y) * w * channels);
  png_write_end(wr.png, nullptr);
  return true;
}

void save_png(const std::vector<std::uint8_t>& interleaved, int w, int h, int channels,
              const fs::path& path)
{
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f)
    throw FormatError("cannot write " + path.string());
  PngWriter wr;
  wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!wr.png)
    throw FormatError("libpng initialisation failed");
  wr.info = png_create_info_struct(wr.png);
  std::vector<std::uint8_t> px = interleaved;
  if (!write_png_rows(f.get(), wr, w, h, channels, px))
    throw FormatError("failed writing PNG " + path.string());
}

// Skips whitespace and '#' comments between PNM header fields.
int read_pnm_int(std::istream& is)
{
  for (;;) {
    const int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (std::isspace(c)) {
      is.get();
    } else {
      break;
    }
  }
  int v = -1;
  if (!(is >> v))
    throw FormatError("corrupt PNM header");
  return v;
}

PlanarImage load_pnm(const fs::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw FormatError("cannot open " + path.string());
  char magic[2] = {0, 0};
  is.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '6' && magic[1] != '5'))
    throw FormatError("unsupported PNM variant (need P5 or P6): " + path.string());
  const int channels = magic[1] == '6' ? 3 : 1;
  const int w = read_pnm_int(is);
  const int h = read_pnm_int(is);
  const int maxval = read_pnm_int(is);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw FormatError("unsupported PNM header (need 8-bit): " + path.string());
  is.get(); // single whitespace before the raster
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
  is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (is.gcount() != static_cast<std::streamsize>(px.size()))
    throw FormatError("truncated PNM raster: " + path.string());
  return from_interleaved(px, h, w, channels, channels);
}

void save_pnm(const std::vector<std::uint8_t>& px, int w, int h, int channels, const fs::path& path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw FormatError("cannot write " + path.string());
  os << (channels == 3 ? "P6" : "P5") << '\n' << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

template <typename T>
void put(std::ostream& os, T v)
{
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is)
{
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw FormatError("checkpoint truncated");
  return v;
}

} // namespace

PlanarImage load_image(const fs::path& path)
{
  if (!fs::exists(path))
    throw FormatError("no such file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png")
    return load_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm")
    return load_pnm(path);
  throw FormatError("unsupported image format '" + ext + "' (PNG, PPM, PGM): " + path.string());
}

PlanarImage load_rgb(const fs::path& path)
{
  PlanarImage img = load_image(path);
  if (img.colorspace == ColorSpace::Y)
    return PlanarImage({img.channels[0], img.channels[0], img.channels[0]}, ColorSpace::RGB);
  return img;
}

Channel load_gray(const fs::path& path)
{
  PlanarImage img = load_image(path);
  if (img.colorspace == ColorSpace::Y)
    return img.channels[0];
  return rgb_to_ycbcr(img).y;
}

void save_image(const PlanarImage& image, const fs::path& path)
{
  image.validate();
  if (image.colorspace == ColorSpace::YCbCr)
    throw std::invalid_argument("save_image: convert YCbCr to RGB before saving");
  const int h = image.height();
  const int w = image.width();
  const int channels = image.channel_count();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        px[(static_cast<std::size_t>(y) * w + x) * channels + c] = to_byte(image.channels[c](y, x));

  const std::string ext = lower_extension(path);
  if (ext == ".png")
    save_png(px, w, h, channels, path);
  else if ((ext == ".ppm" && channels == 3) || (ext == ".pgm" && channels == 1) || ext == ".pnm")
    save_pnm(px, w, h, channels, path);
  else
    throw FormatError("cannot save " + std::to_string(channels) + "-channel image as '" + ext + "'");
}

DatasetManifest load_manifest(const fs::path& path)
{
  std::ifstream is(path);
  if (!is)
    throw FormatError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected hazy<TAB>clear");
    fs::path hazy = line.substr(0, tab);
    fs::path clear = line.substr(tab + 1);
    if (hazy.is_relative())
      hazy = base / hazy;
    if (clear.is_relative())
      clear = base / clear;
    for (const auto& p : {hazy, clear})
      if (!fs::exists(p))
        throw FormatError("manifest line " + std::to_string(lineno) + ": missing " + p.string());
    m.pairs.emplace_back(std::move(hazy), std::move(clear));
  }
  if (m.pairs.empty())
    throw FormatError("manifest has no image pairs: " + path.string());
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path)
{
  std::ofstream os(path);
  if (!os)
    throw FormatError("cannot write manifest " + path.string());
  os << "# hazy\tclear\n";
  const fs::path base = path.parent_path();
  for (const auto& [hazy, clear] : manifest.pairs)
    os << fs::proximate(hazy, base).string() << '\t' << fs::proximate(clear, base).string() << '\n';
}

std::vector<std::size_t> shuffled_indices(std::size_t count, std::uint64_t seed)
{
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<PatchPair> sample_patches(const PlanarImage& hazy, const PlanarImage& clear, int size,
                                      int count, std::uint64_t seed)
{
  hazy.validate();
  clear.validate();
  if (hazy.height() != clear.height() || hazy.width() != clear.width() ||
      hazy.channel_count() != clear.channel_count())
    throw std::invalid_argument("sample_patches: hazy and clear images differ in shape");
  if (size < 1 || hazy.height() < size || hazy.width() < size)
    throw std::invalid_argument("sample_patches: image smaller than patch size " + std::to_string(size));
  if (count < 0)
    throw std::invalid_argument("sample_patches: negative count");
  std::mt19937_64 rng(seed);
  const auto span_y = static_cast<std::uint64_t>(hazy.height() - size + 1);
  const auto span_x = static_cast<std::uint64_t>(hazy.width() - size + 1);
  auto crop = [size](const PlanarImage& img, int y, int x) {
    PlanarImage out = img;
    for (auto& c : out.channels)
      c = Channel(c.block(y, x, size, size));
    return out;
  };
  std::vector<PatchPair> out;
  out.reserve(count);
  for (int n = 0; n < count; ++n) {
    const int y = static_cast<int>(rng() % span_y);
    const int x = static_cast<int>(rng() % span_x);
    out.push_back(PatchPair{y, x, crop(hazy, y, x), crop(clear, y, x)});
  }
  return out;
}

const CheckpointEntry* CheckpointFile::find(const std::string& name) const
{
  for (const auto& e : entries)
    if (e.name == name)
      return &e;
  return nullptr;
}

void write_checkpoint(std::ostream& os, const CheckpointFile& file)
{
  os.write("OTGK", 4);
  put<std::uint32_t>(os, CheckpointFile::kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(file.entries.size()));
  for (const auto& e : file.entries) {
    std::size_t n = 1;
    for (auto d : e.dims)
      n *= d;
    if (n != e.values.size())
      throw std::invalid_argument("checkpoint: entry '" + e.name + "' dims do not match its values");
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims)
      put<std::uint32_t>(os, d);
    os.write(reinterpret_cast<const char*>(e.values.data()),
             static_cast<std::streamsize>(e.values.size() * sizeof(float)));
  }
  put<std::uint64_t>(os, file.step);
  put<std::uint64_t>(os, file.seed);
  if (!os)
    throw FormatError("checkpoint write failed");
}

CheckpointFile read_checkpoint(std::istream& is)
{
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, "OTGK", 4) != 0)
    throw FormatError("not a checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(is);
  if (version != CheckpointFile::kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  CheckpointFile file;
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const auto len = get<std::uint32_t>(is);
    if (len > 4096)
      throw FormatError("checkpoint: implausible name length");
    e.name.resize(len);
    is.read(e.name.data(), len);
    const auto rank = get<std::uint32_t>(is);
    if (rank > 8)
      throw FormatError("checkpoint: implausible rank");
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      e.dims.push_back(get<std::uint32_t>(is));
      n *= e.dims.back();
    }
    if (n > (std::size_t{1} << 31))
      throw FormatError("checkpoint: implausible tensor size");
    e.values.resize(n);
    is.read(reinterpret_cast<char*>(e.values.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (is.gcount() != static_cast<std::streamsize>(n * sizeof(float)))
      throw FormatError("checkpoint truncated in '" + e.name + "'");
    file.entries.push_back(std::move(e));
  }
  file.step = get<std::uint64_t>(is);
  file.seed = get<std::uint64_t>(is);
  return file;
}

void save_checkpoint(const CheckpointFile& file, const fs::path& path)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw FormatError("cannot write " + path.string());
  write_checkpoint(os, file);
}

CheckpointFile load_checkpoint(const fs::path& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw FormatError("cannot open " + path.string());
  return read_checkpoint(is);
}

} // namespace krawtex
