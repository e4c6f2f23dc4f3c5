#pragma once

#include "krawtex/image.hpp"
#include "krawtex/nn/losses.hpp"
#include "krawtex/nn/model_state.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace krawtex::nn {

struct TrainConfig {
  LossWeights weights;
  AdamConfig adam;
  int batch = 15;
  int patch = 128;
  int patches_per_image = 1;
  int epochs = 20;
  /// Stops after this many steps when nonzero, cycling epochs as needed.
  std::uint64_t max_steps = 0;

  void validate() const;
};

struct StepRecord {
  std::uint64_t step = 0;
  double total = 0.0;
  double smooth_l1 = 0.0;
  double mse = 0.0;
  double feature = 0.0;
  double gan_g = 0.0;
  double gan_d = 0.0;
};

/// One discriminator update on (clear, G(hazy)) with the generator held
/// fixed, then one generator update on the weighted loss with the updated
/// discriminator held fixed. Batches are (n, 1, h, w) Y planes. Throws
/// TrainingError if any loss is not finite.
StepRecord train_step(ModelState& state, const Tensor& hazy, const Tensor& clear, const TrainConfig& config);

/// Y planes of one hazy/clear image pair.
struct TrainingPair {
  Channel hazy;
  Channel clear;
};
using TrainingSet = std::vector<TrainingPair>;

/// (hazy, clear) batches for one epoch: images in seeded shuffled order,
/// `patches_per_image` aligned crops each, grouped into batches of at most
/// `batch`.
std::vector<std::pair<Tensor, Tensor>> epoch_batches(const TrainingSet& set, const TrainConfig& config,
                                                     std::uint64_t seed, std::uint64_t epoch);

using StepCallback = std::function<void(const StepRecord&)>;

/// Runs epochs (or max_steps) of train_step over `set`.
std::vector<StepRecord> train(ModelState& state, const TrainingSet& set, const TrainConfig& config,
                              const StepCallback& on_step = {});

/// `step,loss_total,loss_l1,loss_mse,loss_feat,loss_g,loss_d`
void write_loss_log_header(std::ostream& os);
void write_loss_log_row(std::ostream& os, const StepRecord& record);

Tensor to_tensor(const Channel& c);
Tensor stack(const std::vector<Channel>& planes);
Channel to_channel(const Tensor& t, int n = 0);

/// Runs the generator on one Y plane of any size: symmetric padding up to a
/// valid size, evaluation mode, crop back.
Channel dehaze_luma(Generator& generator, const Channel& luma);

} // namespace krawtex::nn
