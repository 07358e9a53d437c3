#include "histmle/synth.hpp"

#include <random>
#include <vector>

#include "histmle/error.hpp"

namespace histmle {

GrayImage synthesize(const SynthSpec& spec) {
  if (spec.width == 0 || spec.height == 0) {
    throw Error(ErrorCode::InvalidArgument, "synthetic image dimensions must be positive");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<double> weights;
  for (const auto& m : spec.model.modes()) weights.push_back(m.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  std::vector<std::uint8_t> levels(spec.width * spec.height);
  for (auto& level : levels) {
    const GaussianMode& mode = spec.model[pick(rng)];
    std::normal_distribution<double> draw(mode.mean, mode.std);
    double x = draw(rng);
    while (x < 0.0 || x > 1.0) x = draw(rng);
    level = quantize_level(x);
  }
  return GrayImage(spec.width, spec.height, std::move(levels));
}

}  // namespace histmle
