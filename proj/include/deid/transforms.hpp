#pragma once

#include "deid/raster.hpp"

namespace deid {

// Sets every pixel of box ∩ image to 0 on all channels.
RasterImage apply_mask(const RasterImage& img, const FaceBox& box);

// Odd square kernel side derived from the box: floor(min(w, h) / 2), at least
// 1, reduced by one when even.
int blur_kernel_size(const FaceBox& box);

// Box-filter average over box ∩ image. Each output pixel is the mean of the
// original pixels in a k x k window clamped to the image (pixels outside the
// face box included), rounded half-up.
RasterImage apply_blur(const RasterImage& img, const FaceBox& box);

}  // namespace deid
