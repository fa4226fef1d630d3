#pragma once

#include <cstdint>

#include "cdsa/types.hpp"

namespace cdsa {

enum class BackgroundStyle { flat, gradient, rib_bands };

struct PhantomConfig {
  std::uint64_t seed = 0;
  int tree_depth = 4;        // branching levels; 1 = single tube
  double root_width = 5.0;   // px, >= 2
  double width_decay = 0.7;  // per-level width ratio, in (0,1)
  BackgroundStyle background_style = BackgroundStyle::rib_bands;
  Index image_size = 192;

  void validate() const;
};

struct Phantom {
  Image angiogram_bg;  // values in (0,1], usable as a log-domain background
  Mask vessel_mask;    // per-level disk dilation of the centerline
  Mask centerline;     // the generating polyline rasterization
};

// Deterministic recursive branching tree; segments leaving the image are
// clipped. centerline is always a subset of vessel_mask.
Phantom generate_phantom(const PhantomConfig& cfg);

}  // namespace cdsa
