#include "krawtex/nn/model_state.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace krawtex::nn {

namespace {

constexpr const char* kMetaName = "meta.config";

std::array<std::uint64_t, 3> sub_seeds(std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const std::uint64_t g = rng();
  const std::uint64_t d = rng();
  const std::uint64_t f = rng();
  return {g, d, f};
}

CheckpointEntry to_entry(const std::string& name, const Tensor& t)
{
  const Shape s = t.shape();
  CheckpointEntry e;
  e.name = name;
  e.dims = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
            static_cast<std::uint32_t>(s.w)};
  e.values.reserve(t.size());
  for (double v : t.values())
    e.values.push_back(static_cast<float>(v));
  return e;
}

void from_entry(const CheckpointFile& file, const std::string& name, Tensor& target)
{
  const CheckpointEntry* e = file.find(name);
  if (!e)
    throw FormatError("checkpoint: missing entry '" + name + "'");
  const Shape s = target.shape();
  const std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                                        static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)};
  if (e->dims != dims)
    throw FormatError("checkpoint: entry '" + name + "' has the wrong shape for " + s.str());
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = static_cast<double>(e->values[i]);
}

void append_store(CheckpointFile& file, const ParameterStore& store)
{
  for (const Parameter& p : store.all())
    file.entries.push_back(to_entry(p.name, p.value));
}

void append_moments(CheckpointFile& file, const ParameterStore& store, const Adam& opt)
{
  for (const Parameter& p : store.all())
    if (p.trainable()) {
      const AdamMoments& m = opt.moments(p.name);
      file.entries.push_back(to_entry(p.name + ".adam_m", m.first));
      file.entries.push_back(to_entry(p.name + ".adam_v", m.second));
    }
}

void restore_store(const CheckpointFile& file, ParameterStore& store)
{
  for (Parameter& p : store.all())
    from_entry(file, p.name, p.value);
}

void restore_moments(const CheckpointFile& file, const ParameterStore& store, Adam& opt)
{
  for (const Parameter& p : store.all())
    if (p.trainable()) {
      AdamMoments& m = opt.moments(p.name);
      from_entry(file, p.name + ".adam_m", m.first);
      from_entry(file, p.name + ".adam_v", m.second);
    }
}

struct Meta {
  GeneratorConfig config;
  int disc_width = 0;
};

CheckpointEntry meta_entry(const GeneratorConfig& c, int disc_width)
{
  CheckpointEntry e;
  e.name = kMetaName;
  e.values = {static_cast<float>(c.split),      static_cast<float>(c.p),
              static_cast<float>(c.grid_rows),  static_cast<float>(c.grid_columns),
              static_cast<float>(c.encoder_depth), static_cast<float>(c.dense_layers),
              static_cast<float>(c.low_width),  static_cast<float>(c.growth),
              static_cast<float>(c.high_width), c.clamp_output ? 1.0f : 0.0f,
              static_cast<float>(disc_width), static_cast<float>(c.synthesis_lr_scale)};
  e.dims = {static_cast<std::uint32_t>(e.values.size())};
  return e;
}

Meta read_meta(const CheckpointFile& file)
{
  const CheckpointEntry* e = file.find(kMetaName);
  if (!e || e->values.size() != 12)
    throw FormatError("checkpoint: missing or malformed '" + std::string(kMetaName) + "'");
  const auto& v = e->values;
  auto integer = [&](std::size_t i) {
    if (!std::isfinite(v[i]) || v[i] != std::floor(v[i]))
      throw FormatError("checkpoint: non-integer architecture field");
    return static_cast<int>(v[i]);
  };
  Meta m;
  m.config.split = integer(0);
  m.config.p = static_cast<double>(v[1]);
  m.config.grid_rows = integer(2);
  m.config.grid_columns = integer(3);
  m.config.encoder_depth = integer(4);
  m.config.dense_layers = integer(5);
  m.config.low_width = integer(6);
  m.config.growth = integer(7);
  m.config.high_width = integer(8);
  m.config.clamp_output = v[9] != 0.0f;
  m.disc_width = integer(10);
  m.config.synthesis_lr_scale = static_cast<double>(v[11]);
  try {
    m.config.validate();
  }
  catch (const std::exception& ex) {
    throw FormatError(std::string("checkpoint: invalid architecture: ") + ex.what());
  }
  return m;
}

} // namespace

ModelState::ModelState(const GeneratorConfig& config, int disc_width, std::uint64_t seed)
  : ModelState(config, disc_width, seed, nullptr)
{
}

ModelState::ModelState(const GeneratorConfig& config, int disc_width, std::uint64_t seed,
                       std::unique_ptr<FeatureBank> bank)
  : seed_(seed),
    generator_(std::make_unique<Generator>(config, sub_seeds(seed)[0])),
    discriminator_(std::make_unique<Discriminator>(disc_width, sub_seeds(seed)[1])),
    features_(bank ? std::move(bank) : std::make_unique<FeatureBank>(sub_seeds(seed)[2])),
    gen_opt_(generator_->params()),
    disc_opt_(discriminator_->params())
{
}

void ModelState::set_step(std::uint64_t step) noexcept
{
  step_ = step;
  gen_opt_.set_steps(step);
  disc_opt_.set_steps(step);
}

CheckpointFile ModelState::to_checkpoint() const
{
  CheckpointFile file;
  file.entries.push_back(meta_entry(generator_->config(), discriminator_->width()));
  append_store(file, generator_->params());
  append_store(file, discriminator_->params());
  append_store(file, features_->params());
  append_moments(file, generator_->params(), gen_opt_);
  append_moments(file, discriminator_->params(), disc_opt_);
  file.step = step_;
  file.seed = seed_;
  return file;
}

std::unique_ptr<ModelState> ModelState::from_checkpoint(const CheckpointFile& file)
{
  const Meta meta = read_meta(file);
  auto state = std::make_unique<ModelState>(meta.config, meta.disc_width, file.seed,
                                            std::make_unique<FeatureBank>(file));
  restore_store(file, state->generator_->params());
  restore_store(file, state->discriminator_->params());
  restore_moments(file, state->generator_->params(), state->gen_opt_);
  restore_moments(file, state->discriminator_->params(), state->disc_opt_);
  state->set_step(file.step);
  return state;
}

std::unique_ptr<Generator> load_generator(const CheckpointFile& file)
{
  const Meta meta = read_meta(file);
  auto gen = std::make_unique<Generator>(meta.config, 0);
  restore_store(file, gen->params());
  return gen;
}

} // namespace krawtex::nn
