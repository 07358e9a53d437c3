#include "histmle/report.hpp"

#include <cstdio>

namespace histmle {

using nlohmann::ordered_json;

std::string format_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

ordered_json to_json(const MixtureModel& model) {
  ordered_json modes = ordered_json::array();
  for (const auto& m : model.modes()) {
    modes.push_back({{"weight", m.weight}, {"mean", m.mean}, {"std", m.std}});
  }
  return modes;
}

ordered_json to_json(const FitReport& fit) {
  return {{"modes", to_json(fit.model)},
          {"log_likelihood", fit.log_likelihood},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"noise_rms", fit.noise_rms},
          {"degenerate_variance", fit.degenerate_variance},
          {"reseeded", fit.reseeded}};
}

ordered_json to_json(const StationarityReport& report) {
  ordered_json modes = ordered_json::array();
  for (const auto& m : report.modes) {
    modes.push_back({{"gradient", m.gradient}, {"curvature", m.curvature}, {"pass", m.pass}});
  }
  return {{"eps", report.eps}, {"sample_count", report.sample_count}, {"pass", report.pass}, {"modes", modes}};
}

ordered_json to_json(const MetricRecord& metrics) {
  return {{"rms_contrast", metrics.rms_contrast},
          {"michelson", metrics.michelson ? ordered_json(*metrics.michelson) : ordered_json(nullptr)},
          {"entropy_bits", metrics.entropy_bits},
          {"min_level", metrics.min_level},
          {"max_level", metrics.max_level}};
}

ordered_json to_json(const ShiftPlan& plan) {
  return {{"pivot", plan.pivot},
          {"strategy", to_string(plan.strategy)},
          {"deltas", plan.deltas},
          {"min", plan.min_val},
          {"max", plan.max_val}};
}

ordered_json to_json(const EnhanceConfig& config) {
  return {{"modes", config.modes},
          {"estimator", to_string(config.estimator)},
          {"strategy", to_string(config.strategy)},
          {"pivot", resolve_pivot(config)},
          {"bins", config.bins},
          {"tol", config.em.tol},
          {"max_iter", config.em.max_iter},
          {"range", to_string(config.range)}};
}

ordered_json to_json(const EnhancementResult& result, const EnhanceConfig& config) {
  return {{"config", to_json(config)},
          {"threshold", result.threshold},
          {"fit", to_json(result.fit)},
          {"plan", to_json(result.plan)},
          {"shifted_modes", to_json(result.shifted)},
          {"lut", result.lut},
          {"metrics_before", to_json(result.metrics_before)},
          {"metrics_after", to_json(result.metrics_after)}};
}

std::string histogram_csv(const Histogram& hist) {
  const auto& grid = hist.grid();
  std::string out = "bin_left,bin_right,count,density\n";
  for (std::size_t j = 0; j < grid.bin_count(); ++j) {
    out += format_real(grid.left_edge(j)) + "," + format_real(grid.right_edge(j)) + "," +
           std::to_string(hist.counts()[j]) + "," + format_real(hist.bin_density(j)) + "\n";
  }
  return out;
}

std::string density_csv(std::span<const double> probabilities, std::uint64_t total) {
  const BinGrid grid = BinGrid::unit(probabilities.size());
  std::string out = "bin_left,bin_right,count,density\n";
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    out += format_real(grid.left_edge(j)) + "," + format_real(grid.right_edge(j)) + "," +
           format_real(probabilities[j] * static_cast<double>(total)) + "," +
           format_real(probabilities[j] / grid.width()) + "\n";
  }
  return out;
}

}  // namespace histmle
