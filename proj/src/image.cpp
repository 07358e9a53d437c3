#include "histmle/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "histmle/error.hpp"

namespace histmle {

namespace {

void check_dimensions(std::size_t width, std::size_t height, std::size_t count) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  }
  if (count != width * height) {
    throw Error(ErrorCode::InvalidArgument,
                "sample count " + std::to_string(count) + " does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

// Cursor over a PNM header: whitespace and '#' comments separate tokens.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t read_number(const char* what) {
    skip_separators();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (std::size_t{1} << 40)) {
        throw Error(ErrorCode::MalformedHeader, std::string(what) + " is too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      throw Error(ErrorCode::MalformedHeader, std::string("expected ") + what);
    }
    return value;
  }

  // Exactly one whitespace byte ends the header.
  void consume_final_separator() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedHeader, "missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> levels)
    : width_(width), height_(height), levels_(std::move(levels)) {
  check_dimensions(width_, height_, levels_.size());
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : GrayImage(width, height, std::vector<std::uint8_t>(width * height, fill)) {}

IntensityField::IntensityField(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dimensions(width_, height_, values_.size());
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "intensity " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::MalformedHeader, "missing P5 magic");
  }
  HeaderReader header(bytes);
  const std::size_t width = header.read_number("width");
  const std::size_t height = header.read_number("height");
  const std::size_t maxval = header.read_number("maxval");
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::MalformedHeader, "zero image dimension");
  }
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval) + " (only 255 is supported)");
  }
  header.consume_final_separator();

  const std::size_t count = width * height;
  const std::size_t available = bytes.size() - header.position();
  if (available < count) {
    throw Error(ErrorCode::TruncatedPayload,
                "expected " + std::to_string(count) + " samples, found " + std::to_string(available));
  }
  auto first = bytes.begin() + static_cast<std::ptrdiff_t>(header.position());
  return GrayImage(width, height, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(count)));
}

std::vector<std::uint8_t> save_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + image.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), image.levels().begin(), image.levels().end());
  return out;
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_pgm(bytes);
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  const auto bytes = save_pgm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::Io, "short write to " + path.string());
  }
}

IntensityField normalize(const GrayImage& image) {
  std::vector<double> values(image.size());
  std::transform(image.levels().begin(), image.levels().end(), values.begin(),
                 [](std::uint8_t level) { return static_cast<double>(level) / 255.0; });
  return IntensityField(image.width(), image.height(), std::move(values));
}

std::uint8_t quantize_level(double value) noexcept {
  // std::round rounds halfway cases away from zero.
  const double scaled = std::round(value * 255.0);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

GrayImage quantize(const IntensityField& field) {
  std::vector<std::uint8_t> levels(field.size());
  std::transform(field.values().begin(), field.values().end(), levels.begin(), quantize_level);
  return GrayImage(field.width(), field.height(), std::move(levels));
}

}  // namespace histmle
