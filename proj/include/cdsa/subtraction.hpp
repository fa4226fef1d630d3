#pragma once

#include <optional>

#include "cdsa/anm.hpp"
#include "cdsa/rng.hpp"
#include "cdsa/types.hpp"

namespace cdsa {

struct BeerLambertParams {
  double i0 = 1.0;                      // incident intensity
  double mu_bg_d_bg = 0.0;              // scalar background optical depth
  std::optional<Image> mu_bg_d_bg_map;  // per-pixel alternative
  double mu_c = 1.0;                    // contrast attenuation per px of depth
  double epsilon_log = 1e-4;            // log clamp floor

  void validate() const;
};

// i0 * exp(-mu_bg_d_bg), map or scalar.
Image beer_lambert_background(const BeerLambertParams& p, Index height, Index width);

struct VesselFrame {
  Image i_raw;  // i_bg * exp(-mu_c * depth); equals i_bg outside the mask
  Image depth;  // distance-transform thickness proxy d_c (pixels)
};

VesselFrame synthesize_vessel_frame(const Image& i_bg, const Mask& mask,
                                    const BeerLambertParams& p);

// ln(max(pv_bg, eps)) - ln(max(pv_raw, eps)). Where the attenuation model
// holds exactly this recovers mu_c * d_c; equal inputs give exactly 0.
Image log_subtract(const Image& pv_bg, const Image& pv_raw, double epsilon_log,
                   Index* clamped_count = nullptr);

struct NoiseSpec {
  NoiseParams params;
  double dilate_radius = 3.0;
  double blur_sigma = 2.0;
};

struct SyntheticPair {
  Image input;   // vessel frame, optionally noise-corrupted
  Image target;  // the clean background (restoration ground truth)
  Image depth;
};

// rng is required when noise is present.
SyntheticPair generate_synthetic_pair(const Image& i_bg, const Mask& mask,
                                      const BeerLambertParams& p,
                                      const std::optional<NoiseSpec>& noise,
                                      SeededRng* rng);

// Pearson r between the two images over mask pixels; DataError on constant
// support.
double vessel_pearson(const Image& subtracted, const Image& raw, const Mask& mask);

}  // namespace cdsa
