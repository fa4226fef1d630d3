#pragma once

#include "cdsa/types.hpp"

namespace cdsa {

// Euclidean disk dilation: output pixel is set iff some input-true pixel lies
// within center-to-center distance <= radius. radius 0 is the identity.
Mask dilate(const Mask& mask, double radius);

// Exact Euclidean distance (pixel centers) to the nearest false pixel; 0 on
// background. Throws DataError when the mask has no background at all.
Image distance_transform(const Mask& mask);

// Squared Euclidean distance to the nearest true pixel (exact integers);
// pixels with no site anywhere get a value >= 1e17.
Image squared_distance_to_true(const Mask& sites);

// Zhang-Suen iterative thinning. Skeleton is a subset of the input and
// preserves its 8-connected component count.
Mask hard_skeleton(const Mask& mask);

// Number of 8-connected foreground components.
int connected_components(const Mask& mask);

}  // namespace cdsa
