#include "krawtex/nn/trainer.hpp"

#include "krawtex/dataio.hpp"
#include "krawtex/format.hpp"
#include "krawtex/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace krawtex::nn {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
  // splitmix64 finalizer over a simple combination.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void check_finite(const StepRecord& r)
{
  const std::pair<const char*, double> parts[] = {{"total", r.total}, {"smooth_l1", r.smooth_l1},
                                                  {"mse", r.mse},     {"feature", r.feature},
                                                  {"gan_g", r.gan_g}, {"gan_d", r.gan_d}};
  for (const auto& [name, v] : parts)
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "non-finite loss '" << name << "' at step " << r.step;
      throw TrainingError(msg.str());
    }
}

} // namespace

void TrainConfig::validate() const
{
  adam.validate();
  if (batch < 1 || patch < 16 || patches_per_image < 1 || epochs < 0)
    throw std::invalid_argument("train: need batch >= 1, patch >= 16, patches_per_image >= 1, epochs >= 0");
}

StepRecord train_step(ModelState& state, const Tensor& hazy, const Tensor& clear, const TrainConfig& config)
{
  if (!(hazy.shape() == clear.shape()))
    throw std::invalid_argument("train_step: hazy " + hazy.shape().str() + " vs clear " + clear.shape().str());
  Generator& gen = state.generator();
  Discriminator& disc = state.discriminator();
  StepRecord record;
  record.step = state.step() + 1;

  Tape gt;
  const Var fake = gen.forward(gt, gt.constant(hazy), true);
  if (!gt.value(fake).all_finite())
    throw TrainingError("non-finite generator output at step " + std::to_string(record.step));

  // Discriminator update; the generator output enters as a constant.
  {
    Tape dt;
    const Var real_score = disc.forward(dt, dt.constant(clear));
    const Var fake_score = disc.forward(dt, dt.constant(gt.value(fake)));
    const Var loss_d = discriminator_gan_loss(dt, real_score, fake_score);
    record.gan_d = dt.value(loss_d)[0];
    check_finite(record);
    disc.params().zero_grad();
    dt.backward(loss_d);
    state.discriminator_optimizer().step(disc.params(), config.adam);
    disc.params().zero_grad();
  }

  // Generator update against the updated, now fixed, discriminator.
  const Var d_fake = disc.forward(gt, fake);
  const Var l1 = smooth_l1_loss(gt, fake, clear);
  const Var l2 = mse_loss(gt, fake, clear);
  const Var feat = state.features().loss(gt, fake, clear);
  const Var adv = generator_gan_loss(gt, d_fake);
  const LossWeights& w = config.weights;
  const Var total =
      weighted_sum(gt, {{feat, w.feature}, {l1, w.smooth_l1}, {l2, w.mse}, {adv, w.gan}});
  record.smooth_l1 = gt.value(l1)[0];
  record.mse = gt.value(l2)[0];
  record.feature = gt.value(feat)[0];
  record.gan_g = gt.value(adv)[0];
  record.total = gt.value(total)[0];
  check_finite(record);

  gen.params().zero_grad();
  gt.backward(total);
  state.generator_optimizer().step(gen.params(), config.adam);
  gen.params().zero_grad();
  disc.params().zero_grad();
  state.features().params().zero_grad();

  state.set_step(record.step);
  return record;
}

std::vector<std::pair<Tensor, Tensor>> epoch_batches(const TrainingSet& set, const TrainConfig& config,
                                                     std::uint64_t seed, std::uint64_t epoch)
{
  std::vector<Channel> hazy, clear;
  for (std::size_t idx : shuffled_indices(set.size(), mix(seed, epoch, 0))) {
    const TrainingPair& pair = set[idx];
    const PlanarImage h({pair.hazy}, ColorSpace::Y);
    const PlanarImage c({pair.clear}, ColorSpace::Y);
    for (const PatchPair& p : sample_patches(h, c, config.patch, config.patches_per_image, mix(seed, epoch, idx + 1))) {
      hazy.push_back(p.hazy.channels[0]);
      clear.push_back(p.clear.channels[0]);
    }
  }
  std::vector<std::pair<Tensor, Tensor>> batches;
  for (std::size_t i = 0; i < hazy.size(); i += config.batch) {
    const std::size_t end = std::min(hazy.size(), i + config.batch);
    batches.emplace_back(stack({hazy.begin() + i, hazy.begin() + end}),
                         stack({clear.begin() + i, clear.begin() + end}));
  }
  return batches;
}

std::vector<StepRecord> train(ModelState& state, const TrainingSet& set, const TrainConfig& config,
                              const StepCallback& on_step)
{
  config.validate();
  if (set.empty())
    throw std::invalid_argument("train: empty training set");
  std::vector<StepRecord> log;
  std::uint64_t done = 0;
  for (std::uint64_t epoch = 0;; ++epoch) {
    if (config.max_steps == 0 && epoch >= static_cast<std::uint64_t>(config.epochs))
      break;
    for (const auto& [hazy, clear] : epoch_batches(set, config, state.seed(), epoch)) {
      if (config.max_steps != 0 && done >= config.max_steps)
        return log;
      log.push_back(train_step(state, hazy, clear, config));
      ++done;
      if (on_step)
        on_step(log.back());
    }
    if (config.max_steps != 0 && done >= config.max_steps)
      break;
  }
  return log;
}

void write_loss_log_header(std::ostream& os)
{
  os << "step,loss_total,loss_l1,loss_mse,loss_feat,loss_g,loss_d\n";
}

void write_loss_log_row(std::ostream& os, const StepRecord& r)
{
  os << r.step << ',' << format_real(r.total) << ',' << format_real(r.smooth_l1) << ',' << format_real(r.mse)
     << ',' << format_real(r.feature) << ',' << format_real(r.gan_g) << ',' << format_real(r.gan_d) << '\n';
}

Tensor to_tensor(const Channel& c)
{
  return stack({c});
}

Tensor stack(const std::vector<Channel>& planes)
{
  if (planes.empty())
    throw std::invalid_argument("stack: no planes");
  const int rows = static_cast<int>(planes.front().rows());
  const int cols = static_cast<int>(planes.front().cols());
  Tensor t({static_cast<int>(planes.size()), 1, rows, cols});
  for (std::size_t n = 0; n < planes.size(); ++n) {
    const Channel& c = planes[n];
    if (c.rows() != rows || c.cols() != cols)
      throw std::invalid_argument("stack: planes differ in size");
    for (int y = 0; y < rows; ++y)
      for (int x = 0; x < cols; ++x)
        t.at(static_cast<int>(n), 0, y, x) = c(y, x);
  }
  return t;
}

Channel to_channel(const Tensor& t, int n)
{
  const Shape s = t.shape();
  if (n < 0 || n >= s.n || s.c != 1)
    throw std::invalid_argument("to_channel: need a one-channel tensor and a valid sample index");
  Channel c(s.h, s.w);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      c(y, x) = t.at(n, 0, y, x);
  return c;
}

Channel dehaze_luma(Generator& generator, const Channel& luma)
{
  const int m = generator.config().size_multiple();
  const int rows = static_cast<int>(luma.rows());
  const int cols = static_cast<int>(luma.cols());
  const int padded_rows = round_up(std::max(rows, 16), m);
  const int padded_cols = round_up(std::max(cols, 16), m);
  const Channel padded = pad_symmetric(luma, padded_rows, padded_cols);
  const Channel out = to_channel(generator.infer(to_tensor(padded)));
  return out.topLeftCorner(rows, cols);
}

} // namespace krawtex::nn
