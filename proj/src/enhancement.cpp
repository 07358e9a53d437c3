#include "histmle/enhancement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "histmle/error.hpp"
#include "histmle/thresholding.hpp"

namespace histmle {

namespace {

// Slack for fitted means that land an ulp outside the observed range.
constexpr double kRangeSlack = 1e-9;

// CDF comparisons absorb summation rounding; well below any 1/n step.
constexpr double kCdfSlack = 1e-12;

template <typename F>
auto run_stage(const char* stage, F&& body) {
  try {
    return std::forward<F>(body)();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

// P(a <= X < b) for X ~ N(mean, std), accurate in both tails.
double normal_interval(double a, double b, double mean, double std) {
  const double za = (a - mean) / (std * std::numbers::sqrt2);
  const double zb = (b - mean) / (std * std::numbers::sqrt2);
  if (za > 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb < 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 0.5 * (std::erf(zb) - std::erf(za));
}

void check_lut(const Lut& lut) {
  for (std::size_t v = 1; v < lut.size(); ++v) {
    if (lut[v] < lut[v - 1]) {
      throw Error(ErrorCode::InvalidArgument, "LUT decreases at level " + std::to_string(v));
    }
  }
}

}  // namespace

std::string_view to_string(ShiftStrategy strategy) noexcept {
  return strategy == ShiftStrategy::Full ? "full" : "half";
}

std::string_view to_string(Estimator estimator) noexcept {
  return estimator == Estimator::Em ? "em" : "segmented";
}

std::string_view to_string(RangeSource range) noexcept {
  return range == RangeSource::Observed ? "observed" : "full";
}

ShiftPlan compute_shift_plan(const MixtureModel& model, double min_val, double max_val, std::size_t pivot,
                             ShiftStrategy strategy) {
  const std::size_t k_count = model.size();
  if (pivot < 1 || pivot >= k_count) {
    throw Error(ErrorCode::InvalidPivot,
                "pivot " + std::to_string(pivot) + " not in [1, " + std::to_string(k_count) + " - 1]");
  }
  if (!(min_val <= max_val)) {
    throw Error(ErrorCode::InvalidArgument, "Min exceeds Max");
  }
  if (model[0].mean < min_val - kRangeSlack || model[k_count - 1].mean > max_val + kRangeSlack) {
    throw Error(ErrorCode::InvalidArgument, "mode means fall outside [Min, Max]");
  }

  const double scale = strategy == ShiftStrategy::Full ? 1.0 : 0.5;
  const double right_share = static_cast<double>(k_count - pivot);
  const double left = std::max(0.0, model[0].mean - min_val);

  ShiftPlan plan{pivot, std::vector<double>(k_count), strategy, min_val, max_val};
  for (std::size_t k = 0; k < k_count; ++k) {
    plan.deltas[k] = k < pivot ? -scale * left : scale * std::max(0.0, max_val - model[k].mean) / right_share;
  }

  for (std::size_t k = 1; k < k_count; ++k) {
    if (!(model[k - 1].mean + plan.deltas[k - 1] < model[k].mean + plan.deltas[k])) {
      throw Error(ErrorCode::OrderViolation, "shifted means are not strictly increasing");
    }
  }
  return plan;
}

MixtureModel apply_shift(const MixtureModel& model, const ShiftPlan& plan) {
  if (plan.deltas.size() != model.size()) {
    throw Error(ErrorCode::InvalidArgument, "shift plan was built for a different model");
  }
  std::vector<GaussianMode> modes(model.modes().begin(), model.modes().end());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    modes[k].mean = std::clamp(modes[k].mean + plan.deltas[k], plan.min_val, plan.max_val);
  }
  return MixtureModel(std::move(modes));
}

std::vector<double> desired_histogram(const MixtureModel& model, std::size_t levels) {
  if (levels < 2) {
    throw Error(ErrorCode::InvalidArgument, "desired histogram needs at least 2 levels");
  }
  const BinGrid grid = BinGrid::unit(levels);
  std::vector<double> density(levels, 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < levels; ++v) {
    const double lo = grid.left_edge(v);
    const double hi = v + 1 == levels ? 1.0 : grid.right_edge(v);
    for (const auto& m : model.modes()) density[v] += m.weight * normal_interval(lo, hi, m.mean, m.std);
    total += density[v];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "mixture puts no mass on [0, 1]");
  }
  for (double& d : density) d /= total;
  return density;
}

std::vector<std::size_t> specification_lut(std::span<const double> source, std::span<const double> target) {
  if (source.size() != target.size() || source.empty()) {
    throw Error(ErrorCode::InvalidArgument, "source and target must cover the same non-empty level range");
  }
  const auto cumulate = [](std::span<const double> density) {
    std::vector<double> cdf(density.size());
    double running = 0.0;
    for (std::size_t v = 0; v < density.size(); ++v) {
      if (density[v] < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "negative density at level " + std::to_string(v));
      }
      running += density[v];
      cdf[v] = running;
    }
    if (std::abs(running - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "density sums to " + std::to_string(running));
    }
    return cdf;
  };
  const std::vector<double> source_cdf = cumulate(source);
  const std::vector<double> target_cdf = cumulate(target);

  const std::size_t last = target.size() - 1;
  std::vector<std::size_t> lut(source.size());
  std::size_t w = 0;
  for (std::size_t v = 0; v < source.size(); ++v) {
    // source_cdf is non-decreasing, so the search resumes where it stopped.
    while (w < last && target_cdf[w] < source_cdf[v] - kCdfSlack) ++w;
    lut[v] = w;
  }
  return lut;
}

Lut to_lut(std::span<const std::size_t> mapping) {
  if (mapping.size() != kLevels) {
    throw Error(ErrorCode::InvalidArgument, "a LUT needs exactly 256 entries");
  }
  Lut lut{};
  for (std::size_t v = 0; v < kLevels; ++v) {
    if (mapping[v] >= kLevels) {
      throw Error(ErrorCode::OutOfRange, "LUT entry " + std::to_string(mapping[v]) + " exceeds 255");
    }
    lut[v] = static_cast<std::uint8_t>(mapping[v]);
  }
  return lut;
}

GrayImage remap(const GrayImage& image, const Lut& lut) {
  check_lut(lut);
  std::vector<std::uint8_t> out(image.size());
  std::transform(image.levels().begin(), image.levels().end(), out.begin(),
                 [&lut](std::uint8_t level) { return lut[level]; });
  return GrayImage(image.width(), image.height(), std::move(out));
}

std::size_t resolve_pivot(const EnhanceConfig& config) {
  return config.pivot ? *config.pivot : (config.modes + 1) / 2;
}

FitReport fit_image(const IntensityField& field, const Histogram& hist, const EnhanceConfig& config) {
  const auto samples = field.values();
  FitReport fit = [&] {
    if (config.estimator == Estimator::Em) {
      return fit_mixture_em(samples, config.modes, std::nullopt, config.em);
    }
    if (config.modes == 1) {
      return fit_mixture_segmented(samples, {});
    }
    if (config.modes == 2) {
      const double t = midrange_threshold(field);
      return fit_mixture_segmented(samples, std::span<const double>(&t, 1));
    }
    const FitReport prefit = fit_mixture_em(samples, config.modes, std::nullopt, config.em);
    const ThresholdSet cuts = modal_midpoints(prefit.model);
    return fit_mixture_segmented(samples, cuts.values());
  }();
  fit.noise_rms = estimate_noise(hist, fit.model);
  return fit;
}

EnhancementResult enhance(const GrayImage& image, const EnhanceConfig& config) {
  run_stage("config", [&] {
    if (config.modes < 2) {
      throw Error(ErrorCode::InvalidArgument, "enhancement needs at least two modes");
    }
    const std::size_t pivot = resolve_pivot(config);
    if (pivot < 1 || pivot >= config.modes) {
      throw Error(ErrorCode::InvalidPivot, "pivot " + std::to_string(pivot) + " must lie in [1, K - 1]");
    }
    return 0;
  });

  const IntensityField field = run_stage("normalize", [&] { return normalize(image); });
  Histogram source_hist = run_stage("histogram", [&] { return image_histogram(field, config.bins); });
  const double threshold = run_stage("threshold", [&] { return midrange_threshold(field); });
  FitReport fit = run_stage("estimation", [&] { return fit_image(field, source_hist, config); });

  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  const double min_val = config.range == RangeSource::Observed ? *lo : 0.0;
  const double max_val = config.range == RangeSource::Observed ? *hi : 1.0;
  ShiftPlan plan = run_stage("shift", [&] {
    return compute_shift_plan(fit.model, min_val, max_val, resolve_pivot(config), config.strategy);
  });
  MixtureModel shifted = run_stage("shift", [&] { return apply_shift(fit.model, plan); });

  std::vector<double> desired = run_stage("desired", [&] { return desired_histogram(shifted, kLevels); });
  std::vector<double> source = run_stage("specification", [&] { return level_histogram(image).probabilities(); });
  const Lut lut = run_stage("specification", [&] { return to_lut(specification_lut(source, desired)); });
  GrayImage enhanced = run_stage("remap", [&] { return remap(image, lut); });

  MetricRecord before = run_stage("metrics", [&] { return compute_metrics(image); });
  MetricRecord after = run_stage("metrics", [&] { return compute_metrics(enhanced); });

  return EnhancementResult{std::move(enhanced), std::move(source_hist), std::move(source),  std::move(desired),
                           lut,                 std::move(fit),         threshold,          std::move(plan),
                           std::move(shifted),  before,                 after};
}

}  // namespace histmle
