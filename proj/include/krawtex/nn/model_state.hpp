#pragma once

#include "krawtex/dataio.hpp"
#include "krawtex/nn/adam.hpp"
#include "krawtex/nn/discriminator.hpp"
#include "krawtex/nn/feature_bank.hpp"
#include "krawtex/nn/generator.hpp"

#include <cstdint>
#include <memory>

namespace krawtex::nn {

/// Everything a training run owns: both networks, the loss feature bank,
/// one optimizer per network, the step counter and the seed.
class ModelState {
public:
  /// Networks and bank are initialized from sub-seeds drawn from `seed`.
  ModelState(const GeneratorConfig& config, int disc_width, std::uint64_t seed);
  /// Same, with an externally supplied feature bank.
  ModelState(const GeneratorConfig& config, int disc_width, std::uint64_t seed,
             std::unique_ptr<FeatureBank> bank);
  ModelState(const ModelState&) = delete;
  ModelState& operator=(const ModelState&) = delete;

  Generator& generator() noexcept { return *generator_; }
  Discriminator& discriminator() noexcept { return *discriminator_; }
  FeatureBank& features() noexcept { return *features_; }
  Adam& generator_optimizer() noexcept { return gen_opt_; }
  Adam& discriminator_optimizer() noexcept { return disc_opt_; }
  const Generator& generator() const noexcept { return *generator_; }
  const Discriminator& discriminator() const noexcept { return *discriminator_; }

  std::uint64_t step() const noexcept { return step_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Sets the step counter and both optimizers' bias-correction counters.
  void set_step(std::uint64_t step) noexcept;

  /// Every parameter, buffer and bank weight, plus `<name>.adam_m` and
  /// `<name>.adam_v` for each trainable parameter and a `meta.config`
  /// record of the architecture. Values are stored as float32.
  CheckpointFile to_checkpoint() const;
  static std::unique_ptr<ModelState> from_checkpoint(const CheckpointFile& file);

private:
  std::uint64_t seed_;
  std::uint64_t step_ = 0;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<Discriminator> discriminator_;
  std::unique_ptr<FeatureBank> features_;
  Adam gen_opt_;
  Adam disc_opt_;
};

/// Generator alone, restored from a checkpoint for inference.
std::unique_ptr<Generator> load_generator(const CheckpointFile& file);

} // namespace krawtex::nn
