#pragma once

#include <cstddef>
#include <cstdint>

#include "histmle/estimation.hpp"
#include "histmle/image.hpp"

namespace histmle {

struct SynthSpec {
  std::size_t width;
  std::size_t height;
  MixtureModel model;
  std::uint64_t seed;
};

/// Pixels drawn i.i.d. from the mixture, truncated to [0, 1] by rejection,
/// then quantized. The same spec always yields the same image.
GrayImage synthesize(const SynthSpec& spec);

}  // namespace histmle
