#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace histmle {

/// 8-bit grayscale raster, row-major, top row first.
class GrayImage {
 public:
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> levels);
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return levels_.size(); }

  std::span<const std::uint8_t> levels() const noexcept { return levels_; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return levels_[y * width_ + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> levels_;
};

/// Real-valued image with every sample in [0, 1]; 0 is black, 1 is white.
class IntensityField {
 public:
  IntensityField(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const IntensityField&, const IntensityField&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

/// Decodes a binary PGM (P5, maxval 255). Header comments are skipped.
GrayImage load_pgm(std::span<const std::uint8_t> bytes);

/// Encodes the canonical form "P5\n<w> <h>\n255\n" followed by the raw samples.
std::vector<std::uint8_t> save_pgm(const GrayImage& image);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& image);

/// level / 255
IntensityField normalize(const GrayImage& image);

/// round(value * 255), half away from zero, clamped to [0, 255].
GrayImage quantize(const IntensityField& field);

std::uint8_t quantize_level(double value) noexcept;

}  // namespace histmle
