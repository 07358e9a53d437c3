#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "histmle/estimation.hpp"
#include "histmle/histogram.hpp"
#include "histmle/image.hpp"

namespace histmle {

enum class ThresholdMethod { Midrange, Otsu, ModalMidpoint };

std::string_view to_string(ThresholdMethod method) noexcept;

/// Strictly increasing thresholds in [0, 1].
class ThresholdSet {
 public:
  ThresholdSet(std::vector<double> values, ThresholdMethod method);

  std::span<const double> values() const noexcept { return values_; }
  ThresholdMethod method() const noexcept { return method_; }

 private:
  std::vector<double> values_;
  ThresholdMethod method_;
};

/// One bit per pixel; 1 is white.
class BinaryMap {
 public:
  BinaryMap(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  /// Levels {0, 255}, ready for save_pgm.
  GrayImage to_image() const;

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

/// (max + min) / 2 over the pixel values.
double midrange_threshold(const IntensityField& field);

/// Between-class-variance maximizing cut, returned as the left edge of the
/// first bin of the upper class. Ties go to the lowest cut.
double otsu_threshold(const Histogram& hist);

/// Midpoints between consecutive mode means; needs K >= 2.
ThresholdSet modal_midpoints(const MixtureModel& model);

/// 1 where value >= t.
BinaryMap binarize(const IntensityField& field, double t);

}  // namespace histmle
