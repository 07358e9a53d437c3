#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "histmle/image.hpp"

namespace histmle {

/// Equal-width bins covering [origin, origin + bin_count * width].
///
/// Bin j (zero-based) is the half-open interval
/// [origin + j * width, origin + (j + 1) * width). The last bin is closed on
/// the right so that the grid's upper edge itself is representable.
class BinGrid {
 public:
  BinGrid(double origin, double width, std::size_t bin_count);

  /// The default image grid: origin 0, width 1/bins, `bins` bins.
  static BinGrid unit(std::size_t bins);

  double origin() const noexcept { return origin_; }
  double width() const noexcept { return width_; }
  std::size_t bin_count() const noexcept { return bin_count_; }

  double left_edge(std::size_t j) const noexcept { return origin_ + static_cast<double>(j) * width_; }
  double right_edge(std::size_t j) const noexcept { return left_edge(j + 1); }
  double center(std::size_t j) const noexcept { return origin_ + (static_cast<double>(j) + 0.5) * width_; }
  double upper() const noexcept { return left_edge(bin_count_); }

  bool contains(double x) const noexcept;

  /// Zero-based index of the bin containing x. Throws OutOfRange.
  std::size_t bin_index(double x) const;

  friend bool operator==(const BinGrid&, const BinGrid&) = default;

 private:
  double origin_;
  double width_;
  std::size_t bin_count_;
  // Unit grids whose computed upper edge rounds just below 1.0 still accept 1.0.
  double upper_limit_;
};

/// Integer bin counts over a BinGrid. Densities are derived on demand.
class Histogram {
 public:
  Histogram(BinGrid grid, std::vector<std::uint64_t> counts);

  const BinGrid& grid() const noexcept { return grid_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }

  /// counts[j] / (n * h) for the bin containing x.
  double density(double x) const;
  double bin_density(std::size_t j) const;

  /// Bin probabilities counts[j] / n.
  std::vector<double> probabilities() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  BinGrid grid_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_;
};

Histogram build_histogram(std::span<const double> samples, const BinGrid& grid);

/// build_histogram over every pixel on BinGrid::unit(bins); bins >= 2.
Histogram image_histogram(const IntensityField& field, std::size_t bins);

/// Counts per 8-bit level, i.e. image_histogram(normalize(image), 256).
Histogram level_histogram(const GrayImage& image);

}  // namespace histmle
