#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "histmle/enhancement.hpp"
#include "histmle/error.hpp"
#include "histmle/estimation.hpp"
#include "histmle/histogram.hpp"
#include "histmle/image.hpp"
#include "histmle/metrics.hpp"
#include "histmle/report.hpp"
#include "histmle/synth.hpp"
#include "histmle/thresholding.hpp"

namespace histmle::cli {

namespace {

enum class LogLevel { Off, Warn, Info, Debug };

// Diagnostics on stderr, filtered by HISTMLE_LOG (off|info|debug; warnings when unset).
class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(level_from_env()) {}

  void warn(const std::string& msg) const { emit(LogLevel::Warn, "warning", msg); }
  void info(const std::string& msg) const { emit(LogLevel::Info, "info", msg); }
  void debug(const std::string& msg) const { emit(LogLevel::Debug, "debug", msg); }
  void error(const std::string& msg) const { err_ << "histmle: error: " << msg << '\n'; }

 private:
  static LogLevel level_from_env() {
    const char* raw = std::getenv("HISTMLE_LOG");
    if (raw == nullptr) return LogLevel::Warn;
    const std::string value(raw);
    if (value == "off") return LogLevel::Off;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }

  void emit(LogLevel at, const char* tag, const std::string& msg) const {
    if (level_ >= at) err_ << "histmle: " << tag << ": " << msg << '\n';
  }

  std::ostream& err_;
  LogLevel level_;
};

// Raised for argument combinations CLI11 validators cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct PipelineOptions {
  std::size_t modes = 2;
  std::string estimator = "em";
  std::string strategy = "half";
  std::string pivot = "auto";
  std::size_t bins = 256;
  double tol = 1e-8;
  int max_iter = 500;
  std::string range = "observed";

  EnhanceConfig to_config(bool needs_shift) const {
    EnhanceConfig config;
    config.modes = modes;
    config.estimator = lowercase(estimator) == "segmented" ? Estimator::Segmented : Estimator::Em;
    config.strategy = lowercase(strategy) == "full" ? ShiftStrategy::Full : ShiftStrategy::Half;
    config.bins = bins;
    config.em = EmOptions{tol, max_iter};
    config.range = lowercase(range) == "full" ? RangeSource::Full : RangeSource::Observed;
    if (pivot != "auto") {
      std::size_t parsed = 0;
      try {
        std::size_t used = 0;
        parsed = std::stoul(pivot, &used);
        if (used != pivot.size()) throw std::invalid_argument(pivot);
      } catch (const std::exception&) {
        throw UsageError("--pivot must be an integer or 'auto', got '" + pivot + "'");
      }
      config.pivot = parsed;
    }
    if (needs_shift) {
      if (modes < 2) throw UsageError("enhance needs --modes >= 2");
      const std::size_t p = resolve_pivot(config);
      if (p < 1 || p >= modes) {
        throw UsageError("--pivot must satisfy 1 <= pivot < modes");
      }
    }
    return config;
  }
};

void add_pipeline_options(CLI::App& cmd, PipelineOptions& opts) {
  cmd.add_option("--modes,-k", opts.modes, "Number of Gaussian modes K")->check(CLI::Range(1, 64));
  cmd.add_option("--estimator", opts.estimator, "em | segmented")
      ->check(CLI::IsMember({"em", "segmented"}, CLI::ignore_case));
  cmd.add_option("--strategy", opts.strategy, "full | half")
      ->check(CLI::IsMember({"full", "half"}, CLI::ignore_case));
  cmd.add_option("--pivot", opts.pivot, "Number of modes shifted left, or 'auto' for ceil(K/2)");
  cmd.add_option("--bins", opts.bins, "Histogram bins")->check(CLI::Range(2, 1 << 20));
  cmd.add_option("--tol", opts.tol, "Relative log-likelihood tolerance for EM")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", opts.max_iter, "EM iteration cap")->check(CLI::NonNegativeNumber);
  cmd.add_option("--range", opts.range, "Min/Max source: observed | full")
      ->check(CLI::IsMember({"observed", "full"}, CLI::ignore_case));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

void warn_on_narrow_range(const IntensityField& field, const Log& log) {
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  if (*hi - *lo < 0.1) {
    log.warn("dynamic range " + format_real(*hi - *lo) +
             " is below 0.1; shifts derived from Min/Max will be very large relative to the threshold");
  }
}

int cmd_enhance(const std::string& input, const std::string& output, const PipelineOptions& opts,
                const std::string& report_path, const std::string& dump_dir, const Log& log) {
  const EnhanceConfig config = opts.to_config(true);
  const GrayImage image = read_pgm_file(input);
  warn_on_narrow_range(normalize(image), log);
  const EnhancementResult result = enhance(image, config);
  log.info("fit converged=" + std::string(result.fit.converged ? "true" : "false") +
           " iterations=" + std::to_string(result.fit.iterations));
  write_pgm_file(output, result.enhanced);
  if (!report_path.empty()) {
    write_text(report_path, to_json(result, config).dump(2) + "\n");
  }
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    write_text(std::filesystem::path(dump_dir) / "source_hist.csv", histogram_csv(result.source_hist));
    write_text(std::filesystem::path(dump_dir) / "desired_hist.csv",
               density_csv(result.desired_density, result.source_hist.total()));
  }
  log.debug("wrote " + output);
  return kExitOk;
}

int cmd_fit(const std::string& input, const PipelineOptions& opts, double eps, std::ostream& out, const Log& log) {
  const EnhanceConfig config = opts.to_config(false);
  const GrayImage image = read_pgm_file(input);
  const IntensityField field = normalize(image);
  warn_on_narrow_range(field, log);
  const Histogram hist = image_histogram(field, config.bins);
  FitReport fit = [&] {
    try {
      return fit_image(field, hist, config);
    } catch (const Error& e) {
      throw StageError("estimation", e);
    }
  }();
  auto json = to_json(fit);
  json["estimator"] = to_string(config.estimator);
  json["threshold"] = midrange_threshold(field);
  json["stationarity"] = to_json(check_stationarity(fit.model, field.values(), eps));
  out << json.dump(2) << '\n';
  return kExitOk;
}

int cmd_hist(const std::string& input, std::size_t bins, std::ostream& out) {
  const GrayImage image = read_pgm_file(input);
  out << histogram_csv(image_histogram(normalize(image), bins));
  return kExitOk;
}

MixtureModel parse_synth_modes(const std::vector<std::string>& specs) {
  std::vector<GaussianMode> modes;
  for (const auto& spec : specs) {
    GaussianMode mode{};
    char tail = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &mode.weight, &mode.mean, &mode.std, &tail) != 3) {
      throw UsageError("--mode expects weight:mean:std, got '" + spec + "'");
    }
    modes.push_back(mode);
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const GaussianMode& a, const GaussianMode& b) { return a.mean < b.mean; });
  try {
    return MixtureModel(std::move(modes));
  } catch (const Error& e) {
    throw UsageError(std::string("invalid synth model: ") + e.what());
  }
}

int cmd_synth(std::size_t width, std::size_t height, const std::vector<std::string>& mode_specs, std::uint64_t seed,
              const std::string& output, const Log& log) {
  const std::vector<std::string> specs =
      mode_specs.empty() ? std::vector<std::string>{"0.5:0.3:0.05", "0.5:0.7:0.05"} : mode_specs;
  const SynthSpec spec{width, height, parse_synth_modes(specs), seed};
  write_pgm_file(output, synthesize(spec));
  log.info("synthesized " + std::to_string(width) + "x" + std::to_string(height) + " image to " + output);
  return kExitOk;
}

int cmd_metrics(const std::string& input, std::ostream& out) {
  out << to_json(compute_metrics(read_pgm_file(input))).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Log log(err);
  CLI::App app{"Histogram mode separation and contrast enhancement for grayscale PGM images", "histmle"};
  app.require_subcommand(1);

  PipelineOptions pipeline;
  std::string input;
  std::string output;
  std::string report_path;
  std::string dump_dir;
  double eps = 1e-4;
  std::size_t hist_bins = 256;
  std::size_t width = 256;
  std::size_t height = 256;
  std::uint64_t seed = 1;
  std::vector<std::string> mode_specs;

  auto* enhance_cmd = app.add_subcommand("enhance", "Enhance an image by separating its histogram modes");
  enhance_cmd->add_option("input", input, "Input PGM")->required();
  enhance_cmd->add_option("output", output, "Output PGM")->required();
  add_pipeline_options(*enhance_cmd, pipeline);
  enhance_cmd->add_option("--report", report_path, "Write a JSON report");
  enhance_cmd->add_option("--dump-hist", dump_dir, "Write source/desired histogram CSVs into this directory");

  auto* fit_cmd = app.add_subcommand("fit", "Fit the histogram modes and print the report as JSON");
  fit_cmd->add_option("input", input, "Input PGM")->required();
  add_pipeline_options(*fit_cmd, pipeline);
  fit_cmd->add_option("--eps", eps, "Stationarity tolerance per sample")->check(CLI::PositiveNumber);

  auto* hist_cmd = app.add_subcommand("hist", "Print the intensity histogram as CSV");
  hist_cmd->add_option("input", input, "Input PGM")->required();
  hist_cmd->add_option("--bins", hist_bins, "Histogram bins")->check(CLI::Range(2, 1 << 20));

  auto* synth_cmd = app.add_subcommand("synth", "Sample a synthetic image from a Gaussian mixture");
  synth_cmd->add_option("--out", output, "Output PGM")->required();
  synth_cmd->add_option("--width", width, "Width in pixels")->check(CLI::Range(1, 1 << 16));
  synth_cmd->add_option("--height", height, "Height in pixels")->check(CLI::Range(1, 1 << 16));
  synth_cmd->add_option("--mode", mode_specs, "Mixture mode as weight:mean:std (repeatable)");
  synth_cmd->add_option("--seed", seed, "Generator seed");

  auto* metrics_cmd = app.add_subcommand("metrics", "Print contrast metrics as JSON");
  metrics_cmd->add_option("input", input, "Input PGM")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*enhance_cmd) return cmd_enhance(input, output, pipeline, report_path, dump_dir, log);
    if (*fit_cmd) return cmd_fit(input, pipeline, eps, out, log);
    if (*hist_cmd) return cmd_hist(input, hist_bins, out);
    if (*synth_cmd) return cmd_synth(width, height, mode_specs, seed, output, log);
    if (*metrics_cmd) return cmd_metrics(input, out);
  } catch (const UsageError& e) {
    log.error(e.what());
    return kExitUsage;
  } catch (const StageError& e) {
    log.error(e.stage() + " stage failed: " + std::string(to_string(e.code())) + ": " + e.detail());
    return kExitFailure;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace histmle::cli
