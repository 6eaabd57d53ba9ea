#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace deid {

// 8-bit raster, row-major, channel-interleaved. channels is 1 or 3.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const {
    return data_[index(x, y, c)];
  }
  std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t>& data() noexcept { return data_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Face region for one frame. x, y may be negative; the effective region is
// the intersection with the image bounds.
struct FaceBox {
  std::string frame_id;
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  bool operator==(const FaceBox&) const = default;
};

// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const noexcept { return x0 >= x1 || y0 >= y1; }
};

PixelRect clip_to_image(const FaceBox& box, int width, int height);

// Format is chosen from the extension: .png, or .ppm/.pgm/.pnm (binary P6 for
// three channels, P5 for one).
RasterImage read_raster(const std::filesystem::path& path);
void write_raster(const RasterImage& img, const std::filesystem::path& path);

// Netpbm in-memory codecs, exposed for golden-file tests.
std::vector<std::uint8_t> encode_pnm(const RasterImage& img);
RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes,
                       const std::string& source_name);

}  // namespace deid
