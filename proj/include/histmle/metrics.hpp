#pragma once

#include <optional>

#include "histmle/histogram.hpp"
#include "histmle/image.hpp"

namespace histmle {

struct MetricRecord {
  double rms_contrast;
  std::optional<double> michelson;  ///< empty for an all-black image
  double entropy_bits;
  int min_level;
  int max_level;
};

/// Population standard deviation of the intensities.
double rms_contrast(const IntensityField& field);

/// (max - min) / (max + min); empty when max + min == 0.
std::optional<double> michelson_contrast(const IntensityField& field);

/// -sum p log2 p over non-empty bins.
double shannon_entropy(const Histogram& hist);

MetricRecord compute_metrics(const GrayImage& image);

}  // namespace histmle
