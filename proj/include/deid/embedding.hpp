#pragma once

#include <array>
#include <span>
#include <vector>

#include "deid/identity.hpp"

namespace deid {

using Point2 = std::array<double, 2>;

// Projection of the mean-centred set onto its top two principal components.
// Each component is signed so its largest-magnitude coordinate is positive.
std::vector<Point2> pca_embed_2d(std::span<const Vector> points);
std::vector<Point2> pca_embed_2d(std::span<const FaceDescriptor> descriptors);

}  // namespace deid
