#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "histmle/estimation.hpp"
#include "histmle/histogram.hpp"
#include "histmle/image.hpp"
#include "histmle/metrics.hpp"

namespace histmle {

/// Number of intensity levels used for the desired histogram and the LUT.
inline constexpr std::size_t kLevels = 256;

/// Full moves the low modes onto Min and the high modes toward Max; Half
/// moves each of them half as far.
enum class ShiftStrategy { Full, Half };

enum class Estimator { Em, Segmented };

/// Where Min and Max in the shift rules come from.
enum class RangeSource { Observed, Full };

std::string_view to_string(ShiftStrategy strategy) noexcept;
std::string_view to_string(Estimator estimator) noexcept;
std::string_view to_string(RangeSource range) noexcept;

/// Per-mode mean displacements. Modes [0, pivot) move left by a common
/// amount, modes [pivot, K) move right.
struct ShiftPlan {
  std::size_t pivot;
  std::vector<double> deltas;
  ShiftStrategy strategy;
  double min_val;
  double max_val;
};

/// pivot is the count of left-shifted modes, 1 <= pivot <= K - 1.
///
/// Full: every left mode moves by -(mu_1 - Min); right mode k moves by
/// (Max - mu_k) / (K - pivot). Half halves both magnitudes.
ShiftPlan compute_shift_plan(const MixtureModel& model, double min_val, double max_val, std::size_t pivot,
                             ShiftStrategy strategy);

/// Means move by the plan's deltas (clamped to [Min, Max]); weights and stds are kept.
MixtureModel apply_shift(const MixtureModel& model, const ShiftPlan& plan);

/// Probability of each of `levels` equal bins on [0, 1] under the mixture
/// truncated to [0, 1]. Sums to 1.
std::vector<double> desired_histogram(const MixtureModel& model, std::size_t levels = kLevels);

/// CDF matching: entry v is the smallest w with target_cdf(w) >= source_cdf(v).
std::vector<std::size_t> specification_lut(std::span<const double> source, std::span<const double> target);

using Lut = std::array<std::uint8_t, kLevels>;

/// Narrows a 256-entry specification map to 8-bit output levels.
Lut to_lut(std::span<const std::size_t> mapping);

/// out[p] = lut[in[p]]. Rejects LUTs that decrease anywhere.
GrayImage remap(const GrayImage& image, const Lut& lut);

struct EnhanceConfig {
  std::size_t modes = 2;
  Estimator estimator = Estimator::Em;
  ShiftStrategy strategy = ShiftStrategy::Half;
  std::optional<std::size_t> pivot;  ///< empty selects ceil(K / 2)
  std::size_t bins = 256;
  EmOptions em;
  RangeSource range = RangeSource::Observed;
};

std::size_t resolve_pivot(const EnhanceConfig& config);

struct EnhancementResult {
  GrayImage enhanced;
  Histogram source_hist;                ///< on the configured bin grid
  std::vector<double> source_density;   ///< per 8-bit level, sums to 1
  std::vector<double> desired_density;  ///< per 8-bit level, sums to 1
  Lut lut;
  FitReport fit;
  double threshold;  ///< midrange threshold of the input
  ShiftPlan plan;
  MixtureModel shifted;
  MetricRecord metrics_before;
  MetricRecord metrics_after;
};

/// Fits the source histogram, separates its modes and remaps the image onto
/// the shifted model by histogram specification. Failures are StageErrors.
EnhancementResult enhance(const GrayImage& image, const EnhanceConfig& config);

/// The fit stage of enhance() on its own (K may be 1 here).
FitReport fit_image(const IntensityField& field, const Histogram& hist, const EnhanceConfig& config);

}  // namespace histmle
