#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "histmle/error.hpp"
#include "histmle/estimation.hpp"
#include "histmle/histogram.hpp"
#include "oracles.hpp"

using namespace histmle;

namespace {

const std::vector<GaussianMode> kTwoSpikeTruth{{0.5, 0.3, 0.05}, {0.5, 0.7, 0.05}};

std::vector<double> two_spike_samples(std::size_t n = 20000, std::uint64_t seed = 20240611) {
  std::mt19937_64 rng(seed);
  return oracle::sample_mixture(rng, kTwoSpikeTruth, n);
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("gaussian_mle closed form") {
  const auto est = gaussian_mle(std::vector<double>{0.2, 0.4, 0.6});
  CHECK(est.mean == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(est.std == doctest::Approx(std::sqrt(0.08 / 3.0)).epsilon(1e-12));
  CHECK(est.std == doctest::Approx(0.163299).epsilon(1e-6));
  CHECK_FALSE(est.degenerate_variance);

  CHECK(gaussian_mle(std::vector<double>{0.0, 1.0}).mean == 0.5);

  const auto flat = gaussian_mle(std::vector<double>{0.3, 0.3, 0.3});
  CHECK(flat.mean == doctest::Approx(0.3));
  CHECK(flat.std == kSigmaMin);
  CHECK(flat.degenerate_variance);

  CHECK(error_of([] { gaussian_mle(std::vector<double>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("MixtureModel invariants") {
  CHECK_NOTHROW(MixtureModel({{0.4, 0.2, 0.1}, {0.6, 0.5, 0.1}}));
  CHECK(error_of([] { MixtureModel({{0.5, 0.5, 0.1}, {0.5, 0.2, 0.1}}); }) == ErrorCode::OrderViolation);
  CHECK(error_of([] { MixtureModel({{0.5, 0.2, 0.1}, {0.6, 0.5, 0.1}}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { MixtureModel({{1.0, 0.2, 1e-5}}); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { MixtureModel(std::vector<GaussianMode>{}); }) == ErrorCode::InvalidArgument);

  const auto sorted = MixtureModel::from_unsorted({{2.0, 0.8, 0.1}, {2.0, 0.1, 0.1}});
  CHECK(sorted[0].mean == 0.1);
  CHECK(sorted[0].weight == 0.5);
}

TEST_CASE("log_likelihood") {
  const MixtureModel standard({{1.0, 0.0, 1.0}});
  CHECK(log_likelihood(standard, std::vector<double>{0.0}) ==
        doctest::Approx(-0.918938533204672742).epsilon(1e-14));

  std::mt19937_64 rng(1);
  const auto modes = oracle::random_modes(rng, 3);
  const MixtureModel model(modes);
  std::vector<double> xs = oracle::sample_mixture(rng, modes, 200);
  const double base = log_likelihood(model, xs);
  CHECK(base == doctest::Approx(static_cast<double>(oracle::log_likelihood(modes, xs))).epsilon(1e-12));

  std::vector<double> with_dup = xs;
  with_dup.push_back(xs[17]);
  CHECK(log_likelihood(model, with_dup) == doctest::Approx(base + model.log_pdf(xs[17])).epsilon(1e-13));

  std::shuffle(xs.begin(), xs.end(), rng);
  CHECK(log_likelihood(model, xs) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("EM with one mode reduces to gaussian_mle") {
  const auto xs = two_spike_samples(5000);
  const FitReport fit = fit_mixture_em(xs, 1);
  const MleEstimate mle = gaussian_mle(xs);
  CHECK(std::abs(fit.model[0].mean - mle.mean) < 1e-9);
  CHECK(std::abs(fit.model[0].std - mle.std) < 1e-9);
  CHECK(fit.model[0].weight == 1.0);
  CHECK(fit.converged);
}

TEST_CASE("EM recovers the two-mode generator") {
  const auto xs = two_spike_samples();
  const FitReport fit = fit_mixture_em(xs, 2);
  REQUIRE(fit.model.size() == 2);
  CHECK(fit.converged);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(fit.model[k].mean - kTwoSpikeTruth[k].mean) <= 0.01);
    CHECK(std::abs(fit.model[k].std - kTwoSpikeTruth[k].std) <= 0.01);
    CHECK(std::abs(fit.model[k].weight - kTwoSpikeTruth[k].weight) <= 0.03);
  }
  const MixtureModel start = auto_init(xs, 2);
  CHECK(fit.log_likelihood >= log_likelihood(start, xs));
}

TEST_CASE("EM log-likelihood never decreases and outputs valid models") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 3);
    const auto truth = oracle::random_modes(rng, k);
    const auto xs = oracle::sample_mixture(rng, truth, 800);
    const FitReport fit = fit_mixture_em(xs, k, std::nullopt, EmOptions{1e-10, 300});
    CHECK_FALSE(fit.reseeded);
    for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
      CHECK(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-9);
    }
    double weight_sum = 0.0;
    for (std::size_t m = 0; m < fit.model.size(); ++m) {
      weight_sum += fit.model[m].weight;
      CHECK(fit.model[m].std >= kSigmaMin);
      if (m > 0) CHECK(fit.model[m - 1].mean < fit.model[m].mean);
    }
    CHECK(std::abs(weight_sum - 1.0) < 1e-9);
    CHECK(fit.iterations <= 300);
  }
}

TEST_CASE("EM from an explicit start never ends below it") {
  std::mt19937_64 rng(4);
  const auto xs = two_spike_samples(3000, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const MixtureModel init(oracle::random_modes(rng, 2));
    const FitReport fit = fit_mixture_em(xs, 2, init);
    CHECK(fit.log_likelihood >= log_likelihood(init, xs) - 1e-9);
  }
}

TEST_CASE("EM is deterministic") {
  const auto xs = two_spike_samples(4000, 77);
  const FitReport a = fit_mixture_em(xs, 3);
  const FitReport b = fit_mixture_em(xs, 3);
  CHECK(a.model == b.model);
  CHECK(a.log_likelihood == b.log_likelihood);
  CHECK(a.iterations == b.iterations);
  CHECK(a.log_likelihood_trace == b.log_likelihood_trace);
}

TEST_CASE("EM error paths") {
  CHECK(error_of([] { fit_mixture_em(std::vector<double>{0.5}, 2); }) == ErrorCode::TooFewSamples);
  CHECK(error_of([] { fit_mixture_em(std::vector<double>(100, 0.4), 2); }) == ErrorCode::DegenerateVariance);
  CHECK(error_of([] { fit_mixture_em(std::vector<double>{0.1, 0.2}, 2, std::nullopt, EmOptions{0.0, 10}); }) ==
        ErrorCode::InvalidArgument);

  // Constant data with one mode is fine: the variance is floored and flagged.
  const FitReport flat = fit_mixture_em(std::vector<double>(50, 0.4), 1);
  CHECK(flat.model[0].std == kSigmaMin);
  CHECK(flat.degenerate_variance);
}

TEST_CASE("EM re-seeds a collapsed component once, then gives up") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> low(0.0, 0.3);
  std::vector<double> xs(2000);
  for (auto& x : xs) x = low(rng);
  xs.push_back(0.8);

  const MixtureModel one_far({{0.5, 0.15, 0.08}, {0.5, 0.99, 0.0005}});
  const FitReport fit = fit_mixture_em(xs, 2, one_far);
  CHECK(fit.reseeded);
  CHECK(fit.model.size() == 2);

  const MixtureModel two_far({{0.4, 0.15, 0.08}, {0.3, 0.97, 0.0005}, {0.3, 0.99, 0.0005}});
  CHECK(error_of([&] { fit_mixture_em(xs, 3, two_far); }) == ErrorCode::CollapsedComponent);
}

TEST_CASE("EM on quantized samples matches raw-sample EM") {
  // Heavily repeated values, as produced by 8-bit images.
  std::mt19937_64 rng(8);
  const auto modes = std::vector<GaussianMode>{{0.5, 0.3, 0.05}, {0.5, 0.7, 0.05}};
  std::vector<double> samples = oracle::sample_mixture(rng, modes, 20000);
  for (double& x : samples) x = std::clamp(std::round(x * 255.0), 0.0, 255.0) / 255.0;

  const MixtureModel start = auto_init(samples, 2);
  const FitReport fit = fit_mixture_em(samples, 2, start, EmOptions{1e-14, 5000});
  const auto expected = oracle::em_raw({start.modes().begin(), start.modes().end()}, samples);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(fit.model[k].weight - expected[k].weight) < 1e-6);
    CHECK(std::abs(fit.model[k].mean - expected[k].mean) < 1e-6);
    CHECK(std::abs(fit.model[k].std - expected[k].std) < 1e-6);
  }
}

TEST_CASE("segmented fit") {
  const std::vector<double> xs{0.1, 0.2, 0.8, 0.9};
  const std::vector<double> cut{0.5};
  const FitReport fit = fit_mixture_segmented(xs, cut);
  REQUIRE(fit.model.size() == 2);
  CHECK(fit.model[0].weight == 0.5);
  CHECK(fit.model[0].mean == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(fit.model[1].mean == doctest::Approx(0.85).epsilon(1e-14));
  CHECK(fit.iterations == 0);
  CHECK(fit.converged);

  const auto one = fit_mixture_segmented(xs, {});
  const auto mle = gaussian_mle(xs);
  CHECK(one.model[0].mean == mle.mean);
  CHECK(one.model[0].std == mle.std);

  const std::vector<double> empty_cut{0.95};
  CHECK(error_of([&] { fit_mixture_segmented(xs, empty_cut); }) == ErrorCode::EmptyClass);
  const std::vector<double> bad_order{0.6, 0.4};
  CHECK(error_of([&] { fit_mixture_segmented(xs, bad_order); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("segmented and EM fits agree on well separated modes") {
  const auto xs = two_spike_samples();
  const std::vector<double> cut{0.5};
  const FitReport seg = fit_mixture_segmented(xs, cut);
  const FitReport em = fit_mixture_em(xs, 2);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(seg.model[k].mean - em.model[k].mean) < 0.005);
}

TEST_CASE("stationarity of closed-form and EM fits") {
  const auto xs = two_spike_samples();
  const auto n = static_cast<double>(xs.size());

  const MleEstimate mle = gaussian_mle(xs);
  const MixtureModel single({{1.0, mle.mean, mle.std}});
  const StationarityReport s1 = check_stationarity(single, xs, 1e-8);
  CHECK(std::abs(s1.modes[0].gradient) < 1e-8 * n);
  CHECK(s1.modes[0].curvature < 0.0);
  CHECK(s1.pass);

  const FitReport fit = fit_mixture_em(xs, 2);
  const StationarityReport s2 = check_stationarity(fit.model, xs, 1e-4);
  CHECK(s2.pass);
  MESSAGE("EM gradients at convergence: " << s2.modes[0].gradient << ", " << s2.modes[1].gradient);

  std::vector<GaussianMode> moved(fit.model.modes().begin(), fit.model.modes().end());
  moved[0].mean += 0.05;
  const StationarityReport s3 = check_stationarity(MixtureModel(moved), xs, 1e-4);
  CHECK_FALSE(s3.pass);
  CHECK_FALSE(s3.modes[0].pass);
  CHECK(s3.modes[0].gradient < 0.0);
}

TEST_CASE("analytic mean gradient matches central differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 3);
    const auto modes = oracle::random_modes(rng, k);
    const auto xs = oracle::sample_mixture(rng, oracle::random_modes(rng, k), 300);
    const StationarityReport report = check_stationarity(MixtureModel(modes), xs, 1.0);
    for (std::size_t m = 0; m < k; ++m) {
      const double analytic = report.modes[m].gradient;
      const double fd = oracle::mean_gradient_fd(modes, xs, m);
      const double scale = std::max({std::abs(analytic), std::abs(fd), 1.0});
      CHECK(std::abs(analytic - fd) / scale < 1e-4);
    }
  }
}

TEST_CASE("gaussian_mle is the argmax of the one-mode likelihood") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(2 + trial % 40);
    for (auto& x : xs) x = unit(rng);
    const MleEstimate mle = gaussian_mle(xs);
    const double best = log_likelihood(MixtureModel({{1.0, mle.mean, mle.std}}), xs);
    CHECK(best >= log_likelihood(MixtureModel({{1.0, mle.mean + 0.01, mle.std}}), xs));
    CHECK(best >= log_likelihood(MixtureModel({{1.0, mle.mean - 0.01, mle.std}}), xs));
  }
}

TEST_CASE("noise estimate") {
  // One unit bin holding every sample has density 1, matched by N(0.5, 1/sqrt(2 pi)) at its center.
  const Histogram flat = build_histogram(std::vector<double>{0.2, 0.7, 0.9}, BinGrid(0.0, 1.0, 1));
  const MixtureModel exact({{1.0, 0.5, 1.0 / std::sqrt(2.0 * std::numbers::pi)}});
  CHECK(estimate_noise(flat, exact) < 1e-12);

  const auto xs = two_spike_samples();
  std::vector<double> clipped;
  for (double x : xs) clipped.push_back(std::clamp(x, 0.0, 1.0));
  const Histogram hist = build_histogram(clipped, BinGrid::unit(256));
  const MixtureModel truth(kTwoSpikeTruth);
  const double noise = estimate_noise(hist, truth);
  const double peak = truth.pdf(0.3);
  MESSAGE("two-mode synthetic noise_rms = " << noise << " (peak density " << peak << ")");
  CHECK(noise < 0.1 * peak);
  CHECK(noise > 0.0);
}
