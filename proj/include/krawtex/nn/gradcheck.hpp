#pragma once

#include "krawtex/nn/tape.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace krawtex::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  /// Entries probed per tensor; 0 probes every entry.
  std::size_t samples_per_tensor = 0;
  /// Also compare the derivative along one random unit direction per tensor.
  bool directional = false;
  std::uint64_t seed = 0;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

struct GradCheckEntry {
  std::string tensor;
  /// Entry index, or -1 for the directional probe.
  long long index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  GradCheckEntry worst;
  std::size_t probes = 0;
  std::vector<std::string> tensors;
  std::vector<GradCheckEntry> entries;
};

using ScalarLoss = std::function<Var(Tape&)>;

/// Central finite differences against backprop for every trainable
/// parameter in `stores`. Frozen parameters and buffers are skipped; buffers
/// are restored after every evaluation so repeated forwards see one state.
GradCheckReport gradient_check(const std::vector<ParameterStore*>& stores, const ScalarLoss& loss,
                               const GradCheckOptions& options = {});

/// Random weights N(0, 1) / sqrt(size), for reducing an output to a scalar.
Tensor random_probe(const Shape& shape, std::uint64_t seed);

/// Adds N(0, sigma^2) noise to every trainable parameter, so zero-initialized
/// layers carry signal during a check.
void perturb_trainable(ParameterStore& store, std::uint64_t seed, double sigma);

} // namespace krawtex::nn
