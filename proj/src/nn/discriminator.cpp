#include "krawtex/nn/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace krawtex::nn {

Discriminator::Discriminator(int width, std::uint64_t seed) : width_(width)
{
  if (width < 1)
    throw std::invalid_argument("discriminator: width must be positive");
  Rng rng(seed);
  const int channels[] = {1, width, 2 * width, 4 * width, 1};
  for (int i = 0; i < 4; ++i)
    convs_.push_back(add_conv(store_, "disc.conv" + std::to_string(i), channels[i], channels[i + 1], 3, rng,
                              Init::He, 2));
}

int Discriminator::width_at_scale(double scale)
{
  return std::max(2, static_cast<int>(std::lround(16.0 * scale)));
}

Var Discriminator::forward(Tape& t, Var input)
{
  const Shape s = t.value(input).shape();
  if (s.c != 1)
    throw std::invalid_argument("discriminator: expected one channel, got " + std::to_string(s.c));
  Var x = input;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = convs_[i](t, x);
    if (i + 1 < convs_.size())
      x = silu(t, x);
  }
  return sigmoid(t, global_avg_pool(t, x));
}

} // namespace krawtex::nn
