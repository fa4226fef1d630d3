#include "cdsa/subtraction.hpp"

#include <cmath>

#include "cdsa/errors.hpp"
#include "cdsa/morphology.hpp"

namespace cdsa {

void BeerLambertParams::validate() const {
  if (!(i0 > 0)) throw ArgumentError("beer-lambert: i0 must be > 0");
  if (mu_c < 0) throw ArgumentError("beer-lambert: mu_c must be >= 0");
  if (!(epsilon_log > 0)) throw ArgumentError("beer-lambert: epsilon_log must be > 0");
}

Image beer_lambert_background(const BeerLambertParams& p, Index height, Index width) {
  p.validate();
  if (p.mu_bg_d_bg_map) {
    if (p.mu_bg_d_bg_map->rows() != height || p.mu_bg_d_bg_map->cols() != width)
      throw ArgumentError("beer_lambert_background: depth map shape mismatch");
    return p.i0 * (-*p.mu_bg_d_bg_map).exp();
  }
  return Image::Constant(height, width, p.i0 * std::exp(-p.mu_bg_d_bg));
}

VesselFrame synthesize_vessel_frame(const Image& i_bg, const Mask& mask,
                                    const BeerLambertParams& p) {
  p.validate();
  if (!same_shape(i_bg, mask)) throw ArgumentError("synthesize_vessel_frame: shape mismatch");
  if ((i_bg <= 0.0).any())
    throw ArgumentError("synthesize_vessel_frame: i_bg must be strictly positive");
  if ((i_bg > 1.0).any())
    throw ArgumentError("synthesize_vessel_frame: i_bg must be <= 1");

  VesselFrame f;
  f.depth = mask.any() ? distance_transform(mask) : Image::Zero(i_bg.rows(), i_bg.cols());
  // exp(0) = 1 keeps pixels outside the mask bit-identical to i_bg
  f.i_raw = i_bg * (-p.mu_c * f.depth).exp();
  return f;
}

Image log_subtract(const Image& pv_bg, const Image& pv_raw, double epsilon_log,
                   Index* clamped_count) {
  if (!same_shape(pv_bg, pv_raw)) throw ArgumentError("log_subtract: shape mismatch");
  if (!(epsilon_log > 0)) throw ArgumentError("log_subtract: epsilon_log must be > 0");
  if (clamped_count)
    *clamped_count = ((pv_bg < epsilon_log) || (pv_raw < epsilon_log)).count();
  return pv_bg.max(epsilon_log).log() - pv_raw.max(epsilon_log).log();
}

SyntheticPair generate_synthetic_pair(const Image& i_bg, const Mask& mask,
                                      const BeerLambertParams& p,
                                      const std::optional<NoiseSpec>& noise, SeededRng* rng) {
  VesselFrame frame = synthesize_vessel_frame(i_bg, mask, p);
  SyntheticPair pair;
  pair.depth = std::move(frame.depth);
  pair.target = i_bg;
  if (noise) {
    if (!rng) throw ArgumentError("generate_synthetic_pair: noise requested without rng");
    const Image m = soft_mask(mask, noise->dilate_radius, noise->blur_sigma);
    pair.input = synthesize_noise(frame.i_raw, noise->params, m, *rng);
  } else {
    pair.input = std::move(frame.i_raw);
  }
  return pair;
}

double vessel_pearson(const Image& subtracted, const Image& raw, const Mask& mask) {
  if (!same_shape(subtracted, raw) || !same_shape(subtracted, mask))
    throw ArgumentError("vessel_pearson: shape mismatch");
  const Index n = mask.count();
  if (n < 2) throw DataError("vessel_pearson: mask support smaller than 2 pixels");

  double sum_a = 0, sum_b = 0;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) {
        sum_a += subtracted(i, j);
        sum_b += raw(i, j);
      }
  const double mean_a = sum_a / static_cast<double>(n);
  const double mean_b = sum_b / static_cast<double>(n);

  double var_a = 0, var_b = 0, cov = 0;
  for (Index i = 0; i < mask.rows(); ++i)
    for (Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) {
        const double da = subtracted(i, j) - mean_a;
        const double db = raw(i, j) - mean_b;
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
      }
  if (var_a == 0.0 || var_b == 0.0)
    throw DataError("vessel_pearson: correlation undefined on constant support");
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace cdsa
