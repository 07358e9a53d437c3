#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "histmle/enhancement.hpp"
#include "histmle/estimation.hpp"
#include "histmle/histogram.hpp"
#include "histmle/metrics.hpp"

namespace histmle {

nlohmann::ordered_json to_json(const MixtureModel& model);
nlohmann::ordered_json to_json(const FitReport& fit);
nlohmann::ordered_json to_json(const StationarityReport& report);
nlohmann::ordered_json to_json(const MetricRecord& metrics);
nlohmann::ordered_json to_json(const ShiftPlan& plan);
nlohmann::ordered_json to_json(const EnhanceConfig& config);
nlohmann::ordered_json to_json(const EnhancementResult& result, const EnhanceConfig& config);

/// `bin_left,bin_right,count,density`, one row per bin.
std::string histogram_csv(const Histogram& hist);

/// Same columns for a per-level probability vector on the unit grid; the
/// count column holds the expected count for `total` samples.
std::string density_csv(std::span<const double> probabilities, std::uint64_t total);

/// 17 significant digits, so the text reads back to the same double.
std::string format_real(double value);

}  // namespace histmle
