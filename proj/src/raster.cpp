#include "deid/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "deid/error.hpp"

namespace deid {

namespace {

void check_dims(int width, int height, int channels) {
  if (width < 1 || height < 1)
    throw DataError("raster dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  if (channels != 1 && channels != 3)
    throw DataError("unsupported channel count " + std::to_string(channels));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool is_pnm_extension(const std::string& ext) {
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

// Header token reader for netpbm: skips whitespace and '#' comments.
class PnmHeader {
 public:
  PnmHeader(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  int read_int(const char* field) {
    skip_space_and_comments();
    std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw ParseError(name_, std::string(field) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size())
        throw ParseError(name_, std::string("truncated header, expected ") + field, pos_);
      throw ParseError(name_, std::string("expected ") + field, pos_);
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates the header from the raster.
  void end_header() {
    if (pos_ >= bytes_.size())
      throw ParseError(name_, "truncated header", pos_);
    if (!std::isspace(bytes_[pos_]))
      throw ParseError(name_, "expected whitespace after maxval", pos_);
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

RasterImage read_png(const std::filesystem::path& path) {
  const std::string name = path.string();
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, name.c_str()))
    throw ParseError(name, std::string("invalid PNG: ") + image.message);

  auto fail = [&](const std::string& what) {
    png_image_free(&image);
    throw ParseError(name, what);
  };
  if (image.format & PNG_FORMAT_FLAG_ALPHA)
    fail("unsupported channel count (alpha channel present)");
  if (image.format & PNG_FORMAT_FLAG_LINEAR) fail("only 8-bit PNG is supported");

  const int channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, data.data(), 0, nullptr))
    fail(std::string("PNG decode failed: ") + image.message);
  png_image_free(&image);
  return RasterImage(width, height, channels, std::move(data));
}

void write_png(const RasterImage& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::string name = path.string();
  if (!png_image_write_to_file(&image, name.c_str(), 0, img.data().data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DataError(name + ": PNG write failed: " + msg);
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels,
                         std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels)
    throw DataError("raster data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(channels));
}

PixelRect clip_to_image(const FaceBox& box, int width, int height) {
  PixelRect r;
  // 64-bit to keep x + w from overflowing on extreme boxes.
  r.x0 = static_cast<int>(std::clamp<long long>(box.x, 0, width));
  r.y0 = static_cast<int>(std::clamp<long long>(box.y, 0, height));
  r.x1 = static_cast<int>(std::clamp<long long>(static_cast<long long>(box.x) + box.w, 0, width));
  r.y1 = static_cast<int>(std::clamp<long long>(static_cast<long long>(box.y) + box.h, 0, height));
  return r;
}

std::vector<std::uint8_t> encode_pnm(const RasterImage& img) {
  const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes,
                       const std::string& source_name) {
  if (bytes.size() < 2) throw ParseError(source_name, "truncated header", bytes.size());
  if (bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ParseError(source_name, "not a binary PGM/PPM (expected P5 or P6)", 0);
  const int channels = bytes[1] == '6' ? 3 : 1;
  PnmHeader header(bytes, source_name);
  header.advance(2);
  const int width = header.read_int("width");
  const int height = header.read_int("height");
  const std::size_t maxval_at = header.pos();
  const int maxval = header.read_int("maxval");
  if (maxval != 255)
    throw ParseError(source_name, "unsupported maxval " + std::to_string(maxval), maxval_at);
  header.end_header();
  if (width < 1 || height < 1)
    throw ParseError(source_name, "zero image dimension", header.pos());

  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  const std::size_t have = bytes.size() - header.pos();
  if (have < need)
    throw ParseError(source_name,
                     "truncated raster: expected " + std::to_string(need) +
                         " bytes, found " + std::to_string(have),
                     bytes.size());
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(header.pos()),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(header.pos() + need));
  return RasterImage(width, height, channels, std::move(data));
}

RasterImage read_raster(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (is_pnm_extension(ext)) return decode_pnm(read_file(path), path.string());
  throw DataError(path.string() + ": unsupported raster extension '" + ext + "'");
}

void write_raster(const RasterImage& img, const std::filesystem::path& path) {
  check_dims(img.width(), img.height(), img.channels());
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(img, path);
  } else if (is_pnm_extension(ext)) {
    write_file(path, encode_pnm(img));
  } else {
    throw DataError(path.string() + ": unsupported raster extension '" + ext + "'");
  }
}

}  // namespace deid
