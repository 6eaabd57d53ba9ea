#include "deid/transforms.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace deid {

RasterImage apply_mask(const RasterImage& img, const FaceBox& box) {
  RasterImage out = img;
  const PixelRect r = clip_to_image(box, img.width(), img.height());
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = 0;
  return out;
}

int blur_kernel_size(const FaceBox& box) {
  int k = std::max(1, std::min(box.w, box.h) / 2);
  if (k % 2 == 0) --k;
  return k;
}

RasterImage apply_blur(const RasterImage& img, const FaceBox& box) {
  RasterImage out = img;
  const PixelRect r = clip_to_image(box, img.width(), img.height());
  const int k = blur_kernel_size(box);
  if (r.empty() || k == 1) return out;

  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const int half = k / 2;

  // Summed-area table over the original image, (w+1) x (h+1) per channel.
  const std::size_t stride = static_cast<std::size_t>(w + 1);
  std::vector<std::uint64_t> sat(stride * (h + 1) * ch, 0);
  auto S = [&](int x, int y, int c) -> std::uint64_t& {
    return sat[(static_cast<std::size_t>(y) * stride + x) * ch + c];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        S(x + 1, y + 1, c) = img.at(x, y, c) + S(x, y + 1, c) + S(x + 1, y, c) - S(x, y, c);

  for (int y = r.y0; y < r.y1; ++y) {
    const int wy0 = std::max(0, y - half);
    const int wy1 = std::min(h, y + half + 1);
    for (int x = r.x0; x < r.x1; ++x) {
      const int wx0 = std::max(0, x - half);
      const int wx1 = std::min(w, x + half + 1);
      const std::uint64_t count = static_cast<std::uint64_t>(wx1 - wx0) * (wy1 - wy0);
      for (int c = 0; c < ch; ++c) {
        const std::uint64_t sum = S(wx1, wy1, c) - S(wx0, wy1, c) - S(wx1, wy0, c) + S(wx0, wy0, c);
        // round(sum / count), halves upward, in exact integer arithmetic
        out.at(x, y, c) = static_cast<std::uint8_t>((2 * sum + count) / (2 * count));
      }
    }
  }
  return out;
}

}  // namespace deid
