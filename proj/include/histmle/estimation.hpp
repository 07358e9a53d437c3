#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "histmle/histogram.hpp"

namespace histmle {

/// Floor applied to every standard deviation (intensity units).
inline constexpr double kSigmaMin = 1e-4;

/// EM weights below this are treated as a collapsed component.
inline constexpr double kCollapseWeight = 1e-6;

struct GaussianMode {
  double weight;
  double mean;
  double std;

  friend bool operator==(const GaussianMode&, const GaussianMode&) = default;
};

/// Gaussian modes ordered by strictly increasing mean, weights summing to 1.
class MixtureModel {
 public:
  /// Validates; throws InvalidArgument unless the modes already satisfy the invariants.
  explicit MixtureModel(std::vector<GaussianMode> modes);

  /// Sorts by mean, renormalizes the weights, then validates.
  static MixtureModel from_unsorted(std::vector<GaussianMode> modes);

  std::span<const GaussianMode> modes() const noexcept { return modes_; }
  const GaussianMode& operator[](std::size_t k) const { return modes_.at(k); }
  std::size_t size() const noexcept { return modes_.size(); }

  double pdf(double x) const noexcept;
  double log_pdf(double x) const noexcept;

  friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

 private:
  std::vector<GaussianMode> modes_;
};

double gaussian_pdf(double x, double mean, double std) noexcept;

struct MleEstimate {
  double mean;
  double std;
  /// Raw standard deviation fell below kSigmaMin and was floored.
  bool degenerate_variance;
};

/// Closed-form Gaussian maximum-likelihood estimate (1/n variance).
MleEstimate gaussian_mle(std::span<const double> samples);

struct EmOptions {
  double tol = 1e-8;  ///< stop when the relative log-likelihood gain drops below this
  int max_iter = 500;
};

struct FitReport {
  MixtureModel model;
  double log_likelihood;
  int iterations;
  bool converged;
  double noise_rms = 0.0;
  /// Log-likelihood of the starting model followed by one entry per iteration.
  std::vector<double> log_likelihood_trace;
  /// A collapsed component was re-seeded once during the run.
  bool reseeded = false;
  /// Some mode's variance hit the kSigmaMin floor.
  bool degenerate_variance = false;
};

/// Deterministic starting point: means at the k/(K+1) sample quantiles,
/// stds at global std / K, uniform weights.
MixtureModel auto_init(std::span<const double> samples, std::size_t modes);

/// Maximum-likelihood K-component fit by expectation maximization on raw samples.
FitReport fit_mixture_em(std::span<const double> samples, std::size_t modes,
                         const std::optional<MixtureModel>& init = std::nullopt, const EmOptions& options = {});

/// Split samples at the given increasing thresholds (x >= t goes up) and fit
/// one Gaussian per class by gaussian_mle. Weight is the class fraction.
FitReport fit_mixture_segmented(std::span<const double> samples, std::span<const double> thresholds);

/// Sum over samples of log sum_k w_k phi(x; mu_k, sigma_k).
double log_likelihood(const MixtureModel& model, std::span<const double> samples);

struct ModeStationarity {
  double gradient;   ///< d loglik / d mu_k
  double curvature;  ///< d^2 loglik / d mu_k^2
  bool pass;
};

struct StationarityReport {
  std::vector<ModeStationarity> modes;
  double eps;
  std::size_t sample_count;
  bool pass;
};

/// Passes iff |gradient| < eps * n and curvature < 0 for every mode.
StationarityReport check_stationarity(const MixtureModel& model, std::span<const double> samples, double eps);

/// RMS over bin centers of histogram density minus mixture pdf.
double estimate_noise(const Histogram& hist, const MixtureModel& model);

}  // namespace histmle
