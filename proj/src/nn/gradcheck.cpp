#include "krawtex/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace krawtex::nn {

namespace {

struct BufferSnapshot {
  std::vector<std::pair<Parameter*, Tensor>> saved;

  explicit BufferSnapshot(const std::vector<ParameterStore*>& stores)
  {
    for (ParameterStore* s : stores)
      for (Parameter& p : s->all())
        if (p.role == ParamRole::Buffer)
          saved.emplace_back(&p, p.value);
  }
  void restore() const
  {
    for (const auto& [p, v] : saved)
      p->value = v;
  }
};

double relative(double a, double n, double floor)
{
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

} // namespace

GradCheckReport gradient_check(const std::vector<ParameterStore*>& stores, const ScalarLoss& loss,
                               const GradCheckOptions& options)
{
  const BufferSnapshot buffers(stores);
  auto evaluate = [&] {
    Tape t(false);
    const double v = t.value(loss(t))[0];
    buffers.restore();
    return v;
  };

  for (ParameterStore* s : stores)
    s->zero_grad();
  {
    Tape t;
    t.backward(loss(t));
    buffers.restore();
  }

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  auto record = [&](const std::string& name, long long index, double analytic, double numeric) {
    GradCheckEntry e{name, index, analytic, numeric, relative(analytic, numeric, options.floor)};
    ++report.probes;
    report.entries.push_back(e);
    if (e.relative_error > report.max_relative_error || report.probes == 1) {
      report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
      report.worst = e;
    }
  };

  for (ParameterStore* s : stores)
    for (Parameter& p : s->all()) {
      if (!p.trainable())
        continue;
      report.tensors.push_back(p.name);
      const Tensor grad = p.grad.empty() ? Tensor(p.value.shape()) : p.grad;
      const std::size_t size = p.value.size();

      std::vector<std::size_t> indices(size);
      for (std::size_t i = 0; i < size; ++i)
        indices[i] = i;
      if (options.samples_per_tensor != 0 && options.samples_per_tensor < size) {
        std::shuffle(indices.begin(), indices.end(), rng);
        indices.resize(options.samples_per_tensor);
        std::sort(indices.begin(), indices.end());
      }
      for (std::size_t i : indices) {
        const double saved = p.value[i];
        p.value[i] = saved + options.eps;
        const double plus = evaluate();
        p.value[i] = saved - options.eps;
        const double minus = evaluate();
        p.value[i] = saved;
        record(p.name, static_cast<long long>(i), grad[i], (plus - minus) / (2.0 * options.eps));
      }

      if (options.directional) {
        std::normal_distribution<double> dist;
        Tensor dir(p.value.shape());
        double norm = 0.0;
        for (double& v : dir.values()) {
          v = dist(rng);
          norm += v * v;
        }
        norm = std::sqrt(norm);
        double analytic = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
          dir[i] /= norm;
          analytic += grad[i] * dir[i];
        }
        const Tensor saved = p.value;
        for (std::size_t i = 0; i < size; ++i)
          p.value[i] = saved[i] + options.eps * dir[i];
        const double plus = evaluate();
        for (std::size_t i = 0; i < size; ++i)
          p.value[i] = saved[i] - options.eps * dir[i];
        const double minus = evaluate();
        p.value = saved;
        record(p.name, -1, analytic, (plus - minus) / (2.0 * options.eps));
      }
    }
  for (ParameterStore* s : stores)
    s->zero_grad();
  return report;
}

Tensor random_probe(const Shape& shape, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Tensor t(shape);
  const double k = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(t.size(), 1)));
  for (double& v : t.values())
    v = dist(rng) * k;
  return t;
}

void perturb_trainable(ParameterStore& store, std::uint64_t seed, double sigma)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (Parameter& p : store.all())
    if (p.trainable())
      for (double& v : p.value.values())
        v += dist(rng);
}

} // namespace krawtex::nn
