#include "histmle/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "histmle/error.hpp"

namespace histmle {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

double gaussian_log_pdf(double x, double mean, double std) noexcept {
  const double z = (x - mean) / std;
  return -0.5 * z * z - std::log(std) - kLogSqrt2Pi;
}

double population_std(std::span<const double> samples) {
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(samples.size()));
}

// Linear interpolation between order statistics.
double quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Distinct sample values with their multiplicities. Quantized images repeat
// values heavily, so EM sums run over at most a few hundred terms.
struct WeightedSamples {
  std::vector<double> values;
  std::vector<double> counts;
};

WeightedSamples group_samples(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  WeightedSamples out;
  for (double x : sorted) {
    if (out.values.empty() || out.values.back() != x) {
      out.values.push_back(x);
      out.counts.push_back(0.0);
    }
    out.counts.back() += 1.0;
  }
  return out;
}

// Working state of one EM run. Component order is fixed during iteration and
// only sorted by mean on output.
class EmState {
 public:
  EmState(const WeightedSamples& samples, std::vector<GaussianMode> modes)
      : values_(samples.values),
        counts_(samples.counts),
        modes_(std::move(modes)),
        resp_(values_.size() * modes_.size()),
        log_density_(values_.size()) {
    for (double c : counts_) total_ += c;
  }

  // Fills responsibilities for the current parameters; returns the log-likelihood.
  double expectation() {
    const std::size_t k_count = modes_.size();
    std::vector<double> log_terms(k_count);
    double ll = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < k_count; ++k) {
        log_terms[k] = std::log(modes_[k].weight) + gaussian_log_pdf(values_[i], modes_[k].mean, modes_[k].std);
        peak = std::max(peak, log_terms[k]);
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        log_terms[k] = std::exp(log_terms[k] - peak);
        sum += log_terms[k];
      }
      double* row = &resp_[i * k_count];
      for (std::size_t k = 0; k < k_count; ++k) row[k] = log_terms[k] / sum;
      log_density_[i] = peak + std::log(sum);
      ll += counts_[i] * log_density_[i];
    }
    return ll;
  }

  void maximization() {
    const std::size_t k_count = modes_.size();
    for (std::size_t k = 0; k < k_count; ++k) {
      double mass = 0.0;
      double first = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        const double r = counts_[i] * resp_[i * k_count + k];
        mass += r;
        first += r * values_[i];
      }
      if (mass <= 0.0) {
        modes_[k].weight = 0.0;
        continue;
      }
      const double mean = first / mass;
      double second = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        const double d = values_[i] - mean;
        second += counts_[i] * resp_[i * k_count + k] * d * d;
      }
      const double raw_std = std::sqrt(second / mass);
      if (raw_std < kSigmaMin) floored_ = true;
      modes_[k] = GaussianMode{mass / total_, mean, std::max(raw_std, kSigmaMin)};
    }
  }

  std::optional<std::size_t> collapsed_component() const {
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      if (!(modes_[k].weight >= kCollapseWeight)) return k;
    }
    return std::nullopt;
  }

  // Moves component k onto the worst-explained sample of the last E-step.
  void reseed(std::size_t k, double spread) {
    const auto worst = std::min_element(log_density_.begin(), log_density_.end());
    const auto idx = static_cast<std::size_t>(worst - log_density_.begin());
    const double uniform = 1.0 / static_cast<double>(modes_.size());
    modes_[k] = GaussianMode{uniform, values_[idx], std::max(spread, kSigmaMin)};
    double total = 0.0;
    for (const auto& m : modes_) total += m.weight;
    for (auto& m : modes_) m.weight /= total;
  }

  const std::vector<GaussianMode>& modes() const noexcept { return modes_; }
  bool floored() const noexcept { return floored_; }

 private:
  std::span<const double> values_;
  std::span<const double> counts_;
  std::vector<GaussianMode> modes_;
  std::vector<double> resp_;
  std::vector<double> log_density_;
  double total_ = 0.0;
  bool floored_ = false;
};

bool relative_gain_below(double previous, double current, double tol) {
  const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
  return (current - previous) / scale < tol;
}

}  // namespace

double gaussian_pdf(double x, double mean, double std) noexcept {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * std::numbers::pi));
}

MixtureModel::MixtureModel(std::vector<GaussianMode> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "a mixture needs at least one mode");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const auto& m = modes_[k];
    if (!std::isfinite(m.mean) || !std::isfinite(m.std) || !std::isfinite(m.weight)) {
      throw Error(ErrorCode::InvalidArgument, "mode " + std::to_string(k) + " has non-finite parameters");
    }
    if (!(m.weight > 0.0 && m.weight <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "mode " + std::to_string(k) + " weight outside (0, 1]");
    }
    if (m.std < kSigmaMin) {
      throw Error(ErrorCode::InvalidArgument, "mode " + std::to_string(k) + " std below the floor");
    }
    if (k > 0 && !(modes_[k - 1].mean < m.mean)) {
      throw Error(ErrorCode::OrderViolation, "mode means are not strictly increasing");
    }
    total += m.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "mode weights sum to " + std::to_string(total));
  }
}

MixtureModel MixtureModel::from_unsorted(std::vector<GaussianMode> modes) {
  std::stable_sort(modes.begin(), modes.end(),
                   [](const GaussianMode& a, const GaussianMode& b) { return a.mean < b.mean; });
  double total = 0.0;
  for (const auto& m : modes) total += m.weight;
  if (total > 0.0) {
    for (auto& m : modes) m.weight /= total;
  }
  return MixtureModel(std::move(modes));
}

double MixtureModel::pdf(double x) const noexcept {
  double sum = 0.0;
  for (const auto& m : modes_) sum += m.weight * gaussian_pdf(x, m.mean, m.std);
  return sum;
}

double MixtureModel::log_pdf(double x) const noexcept {
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& m : modes_) peak = std::max(peak, std::log(m.weight) + gaussian_log_pdf(x, m.mean, m.std));
  double sum = 0.0;
  for (const auto& m : modes_) sum += std::exp(std::log(m.weight) + gaussian_log_pdf(x, m.mean, m.std) - peak);
  return peak + std::log(sum);
}

MleEstimate gaussian_mle(std::span<const double> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "gaussian_mle needs at least one sample");
  }
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double raw = std::sqrt(ss / static_cast<double>(samples.size()));
  return MleEstimate{mean, std::max(raw, kSigmaMin), raw < kSigmaMin};
}

MixtureModel auto_init(std::span<const double> samples, std::size_t modes) {
  if (modes == 0) {
    throw Error(ErrorCode::InvalidArgument, "mode count must be at least 1");
  }
  if (samples.size() < modes) {
    throw Error(ErrorCode::TooFewSamples,
                std::to_string(samples.size()) + " samples cannot seed " + std::to_string(modes) + " modes");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const auto k_count = static_cast<double>(modes);
  std::vector<double> means(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    means[k] = quantile(sorted, static_cast<double>(k + 1) / (k_count + 1.0));
  }
  // Heavy ties can make quantiles coincide; fall back to evenly spaced means over the range.
  if (std::adjacent_find(means.begin(), means.end(), std::greater_equal<>()) != means.end()) {
    const double lo = sorted.front();
    const double hi = sorted.back();
    for (std::size_t k = 0; k < modes; ++k) {
      means[k] = lo + (hi - lo) * static_cast<double>(k + 1) / (k_count + 1.0);
    }
  }
  const double spread = std::max(population_std(samples) / k_count, kSigmaMin);
  std::vector<GaussianMode> init;
  init.reserve(modes);
  for (double mean : means) init.push_back(GaussianMode{1.0 / k_count, mean, spread});
  return MixtureModel::from_unsorted(std::move(init));
}

FitReport fit_mixture_em(std::span<const double> samples, std::size_t modes, const std::optional<MixtureModel>& init,
                         const EmOptions& options) {
  if (modes == 0) {
    throw Error(ErrorCode::InvalidArgument, "mode count must be at least 1");
  }
  if (!(options.tol > 0.0) || options.max_iter < 0) {
    throw Error(ErrorCode::InvalidArgument, "tol must be positive and max_iter non-negative");
  }
  if (samples.size() < modes) {
    throw Error(ErrorCode::TooFewSamples,
                std::to_string(samples.size()) + " samples cannot support " + std::to_string(modes) + " modes");
  }
  if (init && init->size() != modes) {
    throw Error(ErrorCode::InvalidArgument, "initial model has the wrong number of modes");
  }
  const WeightedSamples grouped = group_samples(samples);
  if (modes > 1) {
    const std::size_t distinct = grouped.values.size();
    if (distinct < modes) {
      throw Error(ErrorCode::DegenerateVariance, "only " + std::to_string(distinct) +
                                                     " distinct sample values; cannot separate " +
                                                     std::to_string(modes) + " modes");
    }
  }

  const MixtureModel start = init ? *init : auto_init(samples, modes);
  const double reseed_spread = population_std(samples) / static_cast<double>(modes);
  EmState state(grouped, std::vector<GaussianMode>(start.modes().begin(), start.modes().end()));

  double ll = state.expectation();
  std::vector<double> trace{ll};
  bool converged = false;
  bool reseeded = false;
  int iterations = 0;

  while (iterations < options.max_iter) {
    state.maximization();
    ++iterations;
    bool just_reseeded = false;
    if (const auto k = state.collapsed_component()) {
      if (reseeded) {
        throw Error(ErrorCode::CollapsedComponent,
                    "component " + std::to_string(*k) + " collapsed again after re-seeding");
      }
      state.reseed(*k, reseed_spread);
      reseeded = true;
      just_reseeded = true;
    }
    const double next = state.expectation();
    trace.push_back(next);
    const bool done = !just_reseeded && relative_gain_below(ll, next, options.tol);
    ll = next;
    if (done) {
      converged = true;
      break;
    }
  }

  std::vector<GaussianMode> fitted = state.modes();
  std::stable_sort(fitted.begin(), fitted.end(),
                   [](const GaussianMode& a, const GaussianMode& b) { return a.mean < b.mean; });
  for (std::size_t k = 1; k < fitted.size(); ++k) {
    if (!(fitted[k - 1].mean < fitted[k].mean)) {
      throw Error(ErrorCode::DegenerateVariance, "two fitted modes share the same mean");
    }
  }

  return FitReport{MixtureModel::from_unsorted(std::move(fitted)),
                   ll,
                   iterations,
                   converged,
                   0.0,
                   std::move(trace),
                   reseeded,
                   state.floored()};
}

FitReport fit_mixture_segmented(std::span<const double> samples, std::span<const double> thresholds) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "no samples to segment");
  }
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    if (!(thresholds[k - 1] < thresholds[k])) {
      throw Error(ErrorCode::InvalidArgument, "thresholds must be strictly increasing");
    }
  }
  std::vector<std::vector<double>> classes(thresholds.size() + 1);
  for (double x : samples) {
    const auto cls = static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), x) -
                                              thresholds.begin());
    classes[cls].push_back(x);
  }

  std::vector<GaussianMode> modes;
  bool floored = false;
  const auto n = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (classes[k].empty()) {
      throw Error(ErrorCode::EmptyClass, "threshold interval " + std::to_string(k) + " captures no samples");
    }
    const MleEstimate est = gaussian_mle(classes[k]);
    floored = floored || est.degenerate_variance;
    modes.push_back(GaussianMode{static_cast<double>(classes[k].size()) / n, est.mean, est.std});
  }
  MixtureModel model = MixtureModel::from_unsorted(std::move(modes));
  const double ll = log_likelihood(model, samples);
  return FitReport{std::move(model), ll, 0, true, 0.0, {ll}, false, floored};
}

double log_likelihood(const MixtureModel& model, std::span<const double> samples) {
  double ll = 0.0;
  for (double x : samples) ll += model.log_pdf(x);
  return ll;
}

StationarityReport check_stationarity(const MixtureModel& model, std::span<const double> samples, double eps) {
  const std::size_t k_count = model.size();
  std::vector<double> gradient(k_count, 0.0);
  std::vector<double> curvature(k_count, 0.0);
  std::vector<double> resp(k_count);

  for (double x : samples) {
    const double log_density = model.log_pdf(x);
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& m = model[k];
      resp[k] = std::exp(std::log(m.weight) + gaussian_log_pdf(x, m.mean, m.std) - log_density);
    }
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& m = model[k];
      const double var = m.std * m.std;
      const double score = (x - m.mean) / var;
      gradient[k] += resp[k] * score;
      curvature[k] += resp[k] * (score * score - 1.0 / var) - resp[k] * resp[k] * score * score;
    }
  }

  StationarityReport report{{}, eps, samples.size(), true};
  const double bound = eps * static_cast<double>(samples.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    const bool pass = std::abs(gradient[k]) < bound && curvature[k] < 0.0;
    report.modes.push_back(ModeStationarity{gradient[k], curvature[k], pass});
    report.pass = report.pass && pass;
  }
  return report;
}

double estimate_noise(const Histogram& hist, const MixtureModel& model) {
  const auto& grid = hist.grid();
  double ss = 0.0;
  for (std::size_t j = 0; j < grid.bin_count(); ++j) {
    const double residual = hist.bin_density(j) - model.pdf(grid.center(j));
    ss += residual * residual;
  }
  return std::sqrt(ss / static_cast<double>(grid.bin_count()));
}

}  // namespace histmle
