#include "krawtex/nn/generator.hpp"

#include "krawtex/block_transform.hpp"
#include "krawtex/krawtchouk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace krawtex::nn {

namespace {

constexpr int kBands = BasisSet::kCount;
constexpr int kTap = BasisSet::kBlock;

int scaled(double base, double scale, int floor)
{
  return std::max(floor, static_cast<int>(std::lround(base * scale)));
}

std::string cell(const char* kind, int r, int j)
{
  return std::string(kind) + "." + std::to_string(r) + "." + std::to_string(j);
}

} // namespace

GeneratorConfig GeneratorConfig::at_scale(double scale, int split, double p)
{
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("generator: scale must be finite and >= 0");
  GeneratorConfig c;
  c.split = split;
  c.p = p;
  c.low_width = scaled(16.0, scale, 2);
  c.growth = scaled(8.0, scale, 1);
  c.high_width = scaled(16.0, scale, 2);
  return c;
}

void GeneratorConfig::validate() const
{
  if (split < 1 || split >= kBands)
    throw std::out_of_range("generator: split must lie in [1, 63], got " + std::to_string(split));
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("generator: p must lie in (0, 1)");
  if (grid_rows < 1 || grid_columns < 2 || grid_columns % 2 != 0)
    throw std::invalid_argument("generator: grid needs >= 1 row and an even column count >= 2");
  if (encoder_depth < 1 || dense_layers < 2)
    throw std::invalid_argument("generator: encoder depth >= 1 and dense layers >= 2 required");
  if (low_width < 1 || growth < 1 || high_width < 1)
    throw std::invalid_argument("generator: widths must be positive");
  if (!(synthesis_lr_scale >= 0.0) || !std::isfinite(synthesis_lr_scale))
    throw std::invalid_argument("generator: synthesis_lr_scale must be finite and >= 0");
}

int GeneratorConfig::size_multiple() const
{
  return std::lcm(kTap, std::lcm(1 << (grid_rows - 1), 1 << (encoder_depth - 1)));
}

Var DenseBlock::operator()(Tape& t, Var x) const
{
  std::vector<Var> features{x};
  for (const ConvLayer& layer : growth) {
    const Var in = features.size() == 1 ? x : concat_channels(t, features);
    features.push_back(silu(t, layer(t, in)));
  }
  return add(t, x, fuse(t, concat_channels(t, features)));
}

Generator::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config)
{
  config_.validate();
  Rng rng(seed);

  const BasisSet basis = basis_set(KrawtchoukParams(config_.p, kTap));
  const ConvGeometry same8 = ConvGeometry::same(kTap, kTap);

  Tensor analysis({kBands, 1, kTap, kTap});
  Tensor synthesis({1, kBands, kTap, kTap});
  for (int k = 0; k < kBands; ++k) {
    const Eigen::MatrixXd& f = basis.filters[k];
    for (int a = 0; a < kTap; ++a)
      for (int b = 0; b < kTap; ++b)
        analysis.at(k, 0, a, b) = f(a, b);
    synthesis.at(0, k, kSlidingAnchor, kSlidingAnchor) = f(kSlidingAnchor, kSlidingAnchor);
  }
  kcl_.weight = &store_.add("kcl.weight", std::move(analysis), ParamRole::Frozen);
  kcl_.geometry = same8;

  // Low branch.
  const int rows = config_.grid_rows;
  const int cols = config_.grid_columns;
  const int half = cols / 2;
  auto width = [&](int r) { return config_.low_width << r; };

  low_head_ = add_conv(store_, "low.head", config_.split, width(0), 3, rng);
  dense_.resize(rows);
  gates_.resize(rows);
  for (int r = 0; r < rows; ++r) {
    gates_[r].resize(cols);
    for (int j = 1; j < cols; ++j) {
      DenseBlock block;
      int in = width(r);
      for (int l = 0; l + 1 < config_.dense_layers; ++l) {
        block.growth.push_back(add_conv(store_, cell("low.dense", r, j) + ".conv" + std::to_string(l), in,
                                        config_.growth, 3, rng));
        in += config_.growth;
      }
      block.fuse = add_conv(store_, cell("low.dense", r, j) + ".fuse", in, width(r), 1, rng);
      dense_[r].push_back(std::move(block));
    }
  }
  down_.resize(std::max(rows - 1, 0));
  up_.resize(std::max(rows - 1, 0));
  for (int r = 0; r + 1 < rows; ++r)
    for (int j = 0; j < half; ++j) {
      down_[r].push_back(add_conv(store_, cell("low.down", r + 1, j), width(r), width(r + 1), 3, rng));
      up_[r].push_back(add_conv(store_, cell("low.up", r, half + j), width(r + 1), width(r), 3, rng));
    }
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < cols; ++j) {
      const bool merge = j < half ? (r > 0 && j > 0) : (r + 1 < rows);
      if (merge)
        gates_[r][j] = add_conv(store_, cell("low.gate", r, j), width(r), width(r), 1, rng);
    }
  low_tail_ = add_conv(store_, "low.tail", width(0), config_.split, 3, rng, Init::Zero);

  // High branch.
  const int high_in = kBands - config_.split;
  const int depth = config_.encoder_depth;
  auto hwidth = [&](int l) { return config_.high_width << l; };
  for (int l = 0; l < depth; ++l) {
    const std::string name = "high.enc" + std::to_string(l);
    enc_.push_back(add_conv(store_, name, l == 0 ? high_in : hwidth(l - 1), hwidth(l), 3, rng));
    enc_bn_.push_back(add_batch_norm(store_, name + ".bn", hwidth(l)));
  }
  bottleneck_ = add_conv(store_, "high.mid", hwidth(depth - 1), hwidth(depth - 1), 3, rng);
  bottleneck_bn_ = add_batch_norm(store_, "high.mid.bn", hwidth(depth - 1));
  dec_up_.resize(std::max(depth - 1, 0));
  dec_bn_.resize(std::max(depth - 1, 0));
  dec_fuse_.resize(std::max(depth - 1, 0));
  for (int l = depth - 2; l >= 0; --l) {
    const std::string name = "high.dec" + std::to_string(l);
    dec_up_[l] = add_conv(store_, name + ".up", hwidth(l + 1), hwidth(l), 3, rng);
    dec_bn_[l] = add_batch_norm(store_, name + ".bn", hwidth(l));
    dec_fuse_[l] = add_conv(store_, name + ".fuse", 2 * hwidth(l), hwidth(l), 3, rng);
  }
  high_tail_ = add_conv(store_, "high.tail", hwidth(0), high_in, 3, rng, Init::Zero);

  ikcl_.weight = &store_.add("ikcl.weight", std::move(synthesis));
  ikcl_.weight->lr_scale = config_.synthesis_lr_scale;
  ikcl_.bias = &store_.add("ikcl.bias", Tensor({1, 1, 1, 1}));
  ikcl_.geometry = same8;
}

void Generator::check_input(const Tensor& input) const
{
  const Shape s = input.shape();
  const int m = config_.size_multiple();
  if (s.c != 1)
    throw std::invalid_argument("generator: expected one channel, got " + std::to_string(s.c));
  if (s.n < 1 || s.h < 16 || s.w < 16 || s.h % m != 0 || s.w % m != 0)
    throw std::invalid_argument("generator: spatial size " + std::to_string(s.h) + "x" +
                                std::to_string(s.w) + " must be >= 16 and a multiple of " + std::to_string(m));
}

Var Generator::low_branch(Tape& t, Var x)
{
  const int rows = config_.grid_rows;
  const int cols = config_.grid_columns;
  const int half = cols / 2;
  std::vector<std::vector<Var>> node(rows, std::vector<Var>(cols));

  auto merge = [&](int r, int j, Var lateral, Var vertical) {
    if (!lateral.valid())
      return vertical;
    if (!vertical.valid())
      return lateral;
    const Var gate = sigmoid(t, gates_[r][j](t, global_avg_pool(t, vertical)));
    return add(t, lateral, mul_channels(t, vertical, gate));
  };

  const Var head = silu(t, low_head_(t, x));
  for (int j = 0; j < half; ++j)
    for (int r = 0; r < rows; ++r) {
      Var lateral = j > 0 ? dense_[r][j - 1](t, node[r][j - 1]) : (r == 0 ? head : Var{});
      Var vertical = r > 0 ? silu(t, down_[r - 1][j](t, avg_pool2(t, node[r - 1][j]))) : Var{};
      node[r][j] = merge(r, j, lateral, vertical);
    }
  for (int j = half; j < cols; ++j)
    for (int r = rows - 1; r >= 0; --r) {
      Var lateral = dense_[r][j - 1](t, node[r][j - 1]);
      Var vertical = r + 1 < rows ? silu(t, up_[r][j - half](t, upsample2(t, node[r + 1][j]))) : Var{};
      node[r][j] = merge(r, j, lateral, vertical);
    }
  return add(t, x, low_tail_(t, node[0][cols - 1]));
}

Var Generator::high_branch(Tape& t, Var x, bool training)
{
  const int depth = config_.encoder_depth;
  std::vector<Var> enc(depth);
  for (int l = 0; l < depth; ++l) {
    const Var in = l == 0 ? x : avg_pool2(t, enc[l - 1]);
    enc[l] = silu(t, enc_bn_[l](t, enc_[l](t, in), training));
  }
  Var dec = silu(t, bottleneck_bn_(t, bottleneck_(t, enc[depth - 1]), training));
  for (int l = depth - 2; l >= 0; --l) {
    const Var up = silu(t, dec_bn_[l](t, dec_up_[l](t, upsample2(t, dec)), training));
    dec = silu(t, dec_fuse_[l](t, concat_channels(t, {up, enc[l]})));
  }
  return add(t, x, high_tail_(t, dec));
}

Var Generator::forward(Tape& t, Var input, bool training)
{
  check_input(t.value(input));
  const Var cube = kcl_(t, input);
  const Var low = low_branch(t, slice_channels(t, cube, 0, config_.split));
  const Var high = high_branch(t, slice_channels(t, cube, config_.split, kBands), training);
  const Var out = ikcl_(t, concat_channels(t, {low, high}));
  return config_.clamp_output ? clamp(t, out, 0.0, 1.0) : out;
}

Tensor Generator::infer(const Tensor& input)
{
  Tape t(false);
  return t.value(forward(t, t.constant(input), false));
}

int Generator::low_branch_depth() const
{
  int n = 2;
  for (const auto& row : dense_)
    for (const auto& block : row)
      n += static_cast<int>(block.growth.size()) + 1;
  for (const auto& row : down_)
    n += static_cast<int>(row.size());
  for (const auto& row : up_)
    n += static_cast<int>(row.size());
  for (const auto& row : gates_)
    for (const auto& g : row)
      n += g.weight ? 1 : 0;
  return n;
}

int Generator::high_branch_depth() const
{
  return static_cast<int>(enc_.size() + 1 + dec_up_.size() + dec_fuse_.size() + 1);
}

} // namespace krawtex::nn
