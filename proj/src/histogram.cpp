#include "histmle/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "histmle/error.hpp"

namespace histmle {

BinGrid::BinGrid(double origin, double width, std::size_t bin_count)
    : origin_(origin), width_(width), bin_count_(bin_count), upper_limit_(0.0) {
  if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(origin)) {
    throw Error(ErrorCode::InvalidArgument, "bin width must be positive and finite");
  }
  if (bin_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "bin count must be at least 1");
  }
  upper_limit_ = upper();
}

BinGrid BinGrid::unit(std::size_t bins) {
  BinGrid grid(0.0, 1.0 / static_cast<double>(bins), bins);
  grid.upper_limit_ = std::max(grid.upper(), 1.0);
  return grid;
}

bool BinGrid::contains(double x) const noexcept { return x >= origin_ && x <= upper_limit_; }

std::size_t BinGrid::bin_index(double x) const {
  if (!contains(x)) {
    throw Error(ErrorCode::OutOfRange, "value " + std::to_string(x) + " outside grid [" + std::to_string(origin_) +
                                           ", " + std::to_string(upper_limit_) + "]");
  }
  const std::size_t last = bin_count_ - 1;
  if (x >= left_edge(last)) return last;

  auto j = static_cast<std::size_t>(std::floor((x - origin_) / width_));
  if (j > last) j = last;
  // Division rounding can land one bin off; settle against the edges we report.
  while (j > 0 && x < left_edge(j)) --j;
  while (j < last && x >= right_edge(j)) ++j;
  return j;
}

Histogram::Histogram(BinGrid grid, std::vector<std::uint64_t> counts)
    : grid_(grid), counts_(std::move(counts)), total_(0) {
  if (counts_.size() != grid_.bin_count()) {
    throw Error(ErrorCode::InvalidArgument, "count vector length does not match bin count");
  }
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  if (total_ == 0) {
    throw Error(ErrorCode::EmptyInput, "histogram holds no samples");
  }
}

double Histogram::bin_density(std::size_t j) const {
  return static_cast<double>(counts_.at(j)) / (static_cast<double>(total_) * grid_.width());
}

double Histogram::density(double x) const { return bin_density(grid_.bin_index(x)); }

std::vector<double> Histogram::probabilities() const {
  std::vector<double> p(counts_.size());
  const auto n = static_cast<double>(total_);
  for (std::size_t j = 0; j < counts_.size(); ++j) p[j] = static_cast<double>(counts_[j]) / n;
  return p;
}

Histogram build_histogram(std::span<const double> samples, const BinGrid& grid) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "no samples to bin");
  }
  std::vector<std::uint64_t> counts(grid.bin_count(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!grid.contains(samples[i])) {
      throw Error(ErrorCode::OutOfRange,
                  "sample " + std::to_string(i) + " (" + std::to_string(samples[i]) + ") outside grid span");
    }
    ++counts[grid.bin_index(samples[i])];
  }
  return Histogram(grid, std::move(counts));
}

Histogram image_histogram(const IntensityField& field, std::size_t bins) {
  if (bins < 2) {
    throw Error(ErrorCode::InvalidArgument, "image histograms need at least 2 bins");
  }
  return build_histogram(field.values(), BinGrid::unit(bins));
}

Histogram level_histogram(const GrayImage& image) {
  std::vector<std::uint64_t> counts(256, 0);
  for (std::uint8_t level : image.levels()) ++counts[level];
  return Histogram(BinGrid::unit(256), std::move(counts));
}

}  // namespace histmle
