#include "histmle/thresholding.hpp"

#include <algorithm>
#include <string>

#include "histmle/error.hpp"

namespace histmle {

std::string_view to_string(ThresholdMethod method) noexcept {
  switch (method) {
    case ThresholdMethod::Midrange: return "midrange";
    case ThresholdMethod::Otsu: return "otsu";
    case ThresholdMethod::ModalMidpoint: return "modal-midpoint";
  }
  return "unknown";
}

ThresholdSet::ThresholdSet(std::vector<double> values, ThresholdMethod method)
    : values_(std::move(values)), method_(method) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] >= 0.0 && values_[k] <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "threshold " + std::to_string(values_[k]) + " outside [0, 1]");
    }
    if (k > 0 && !(values_[k - 1] < values_[k])) {
      throw Error(ErrorCode::OrderViolation, "thresholds are not strictly increasing");
    }
  }
}

BinaryMap::BinaryMap(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (bits_.size() != width_ * height_) {
    throw Error(ErrorCode::InvalidArgument, "bit count does not match dimensions");
  }
}

GrayImage BinaryMap::to_image() const {
  std::vector<std::uint8_t> levels(bits_.size());
  std::transform(bits_.begin(), bits_.end(), levels.begin(),
                 [](std::uint8_t bit) { return static_cast<std::uint8_t>(bit ? 255 : 0); });
  return GrayImage(width_, height_, std::move(levels));
}

double midrange_threshold(const IntensityField& field) {
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  return (*hi + *lo) / 2.0;
}

double otsu_threshold(const Histogram& hist) {
  const auto counts = hist.counts();
  const std::size_t bins = counts.size();
  const auto occupied = std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; });
  if (occupied < 2) {
    throw Error(ErrorCode::DegenerateHistogram, "all mass lies in a single bin");
  }

  // Bin indices stand in for intensities; the argmax is invariant under the
  // affine map to bin centers.
  long double total_count = 0.0L;
  long double total_moment = 0.0L;
  for (std::size_t j = 0; j < bins; ++j) {
    total_count += static_cast<long double>(counts[j]);
    total_moment += static_cast<long double>(counts[j]) * static_cast<long double>(j);
  }

  long double below_count = 0.0L;
  long double below_moment = 0.0L;
  long double best = -1.0L;
  std::size_t best_cut = 1;
  // Cut c puts bins [0, c) below and [c, bins) above.
  for (std::size_t cut = 1; cut < bins; ++cut) {
    below_count += static_cast<long double>(counts[cut - 1]);
    below_moment += static_cast<long double>(counts[cut - 1]) * static_cast<long double>(cut - 1);
    const long double above_count = total_count - below_count;
    long double score = 0.0L;
    if (below_count > 0.0L && above_count > 0.0L) {
      const long double diff = total_count * below_moment - below_count * total_moment;
      score = diff * diff / (below_count * above_count);
    }
    if (score > best) {
      best = score;
      best_cut = cut;
    }
  }
  return hist.grid().left_edge(best_cut);
}

ThresholdSet modal_midpoints(const MixtureModel& model) {
  if (model.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "modal midpoints need at least two modes");
  }
  std::vector<double> values;
  for (std::size_t k = 0; k + 1 < model.size(); ++k) {
    values.push_back(std::clamp((model[k].mean + model[k + 1].mean) / 2.0, 0.0, 1.0));
  }
  return ThresholdSet(std::move(values), ThresholdMethod::ModalMidpoint);
}

BinaryMap binarize(const IntensityField& field, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "threshold " + std::to_string(t) + " outside [0, 1]");
  }
  std::vector<std::uint8_t> bits(field.size());
  std::transform(field.values().begin(), field.values().end(), bits.begin(),
                 [t](double v) { return static_cast<std::uint8_t>(v >= t ? 1 : 0); });
  return BinaryMap(field.width(), field.height(), std::move(bits));
}

}  // namespace histmle
