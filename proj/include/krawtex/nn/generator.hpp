#pragma once

#include "krawtex/nn/layers.hpp"

#include <cstdint>
#include <vector>

namespace krawtex::nn {

struct GeneratorConfig {
  /// Bands 0..split-1 go to the low branch, split..63 to the high branch.
  int split = 60;
  double p = 0.5;
  int grid_rows = 3;
  int grid_columns = 6;
  int encoder_depth = 4;
  int dense_layers = 5;
  /// Channels of the first grid row; row r carries low_width * 2^r.
  int low_width = 4;
  int growth = 2;
  /// Channels of the first encoder level; level l carries high_width * 2^l.
  int high_width = 4;
  bool clamp_output = true;
  /// Step-size multiplier for the 64 x 8 x 8 synthesis weights. Each output
  /// pixel sums 4096 of them, so a full-size Adam step moves it far more
  /// than a step on any branch layer.
  double synthesis_lr_scale = 0.01;

  /// Widths 16 / 8 / 16 times `scale`, each at least 2 (growth at least 1).
  static GeneratorConfig at_scale(double scale, int split = 60, double p = 0.5);

  void validate() const;
  /// Input height and width must be multiples of this.
  int size_multiple() const;
};

/// Dense block: (layers - 1) 3x3 growth convolutions over the running
/// concatenation, a 1x1 fuse back to the input width, plus the input.
struct DenseBlock {
  std::vector<ConvLayer> growth;
  ConvLayer fuse;

  Var operator()(Tape& t, Var x) const;
};

/// Fixed Krawtchouk analysis, two correction branches over the band split,
/// and a trainable 8x8 synthesis convolution.
class Generator {
public:
  Generator(const GeneratorConfig& config, std::uint64_t seed);
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  /// (n, 1, h, w) -> (n, 1, h, w).
  Var forward(Tape& t, Var input, bool training);
  /// Evaluation-mode forward without gradient bookkeeping for parameters.
  Tensor infer(const Tensor& input);

  const GeneratorConfig& config() const noexcept { return config_; }
  ParameterStore& params() noexcept { return store_; }
  const ParameterStore& params() const noexcept { return store_; }

  /// Convolutions on each branch, counting dense-block, sampling, gate,
  /// head and tail layers.
  int low_branch_depth() const;
  int high_branch_depth() const;

private:
  Var low_branch(Tape& t, Var x);
  Var high_branch(Tape& t, Var x, bool training);
  void check_input(const Tensor& input) const;

  GeneratorConfig config_;
  ParameterStore store_;

  ConvLayer kcl_;
  ConvLayer ikcl_;

  ConvLayer low_head_;
  ConvLayer low_tail_;
  std::vector<std::vector<DenseBlock>> dense_;   // [row][column - 1]
  std::vector<std::vector<ConvLayer>> down_;     // [row - 1][column]
  std::vector<std::vector<ConvLayer>> up_;       // [row][column - columns/2]
  std::vector<std::vector<ConvLayer>> gates_;    // [row][column], unused slots empty

  std::vector<ConvLayer> enc_;
  std::vector<BatchNormLayer> enc_bn_;
  ConvLayer bottleneck_;
  BatchNormLayer bottleneck_bn_;
  std::vector<ConvLayer> dec_up_;                // [level], level < depth - 1
  std::vector<BatchNormLayer> dec_bn_;
  std::vector<ConvLayer> dec_fuse_;
  ConvLayer high_tail_;
};

} // namespace krawtex::nn
