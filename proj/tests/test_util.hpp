#pragma once

// Shared generators and brute-force oracles. Oracles are deliberately naive
// and independent of the library's computation paths.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cdsa/rng.hpp"
#include "cdsa/types.hpp"

namespace testutil {

using cdsa::Image;
using cdsa::Index;
using cdsa::Mask;
using cdsa::SeededRng;
using cdsa::Tensor4;

inline Image random_image(SeededRng& rng, Index h, Index w, double lo = 0.0, double hi = 1.0) {
  Image img(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) img(i, j) = lo + (hi - lo) * rng.next_uniform();
  return img;
}

inline Mask random_mask(SeededRng& rng, Index h, Index w, double density = 0.5) {
  Mask m(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) m(i, j) = rng.next_uniform() < density;
  return m;
}

inline Tensor4 random_tensor(SeededRng& rng, Index n, Index c, Index h, Index w,
                             double lo = -1.0, double hi = 1.0) {
  Tensor4 t(n, c, h, w);
  for (Index i = 0; i < t.size(); ++i) t.data[i] = lo + (hi - lo) * rng.next_uniform();
  return t;
}

// all-pairs Euclidean dilation
inline Mask dilate_oracle(const Mask& mask, double radius) {
  const Index h = mask.rows(), w = mask.cols();
  Mask out = Mask::Constant(h, w, false);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      bool hit = false;
      for (Index y = 0; y < h && !hit; ++y)
        for (Index x = 0; x < w && !hit; ++x) {
          if (!mask(y, x)) continue;
          const double d2 = static_cast<double>((i - y) * (i - y) + (j - x) * (j - x));
          if (d2 <= radius * radius) hit = true;
        }
      out(i, j) = hit;
    }
  return out;
}

// all-pairs nearest-false scan
inline Image distance_transform_oracle(const Mask& mask) {
  const Index h = mask.rows(), w = mask.cols();
  Image out = Image::Zero(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      if (!mask(i, j)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
          if (mask(y, x)) continue;
          const double d2 = static_cast<double>((i - y) * (i - y) + (j - x) * (j - x));
          best = std::min(best, d2);
        }
      out(i, j) = std::sqrt(best);
    }
  return out;
}

// dense (non-separable) convolution with the same truncated kernel and
// mirror boundary as the library definition
inline Image gaussian_smooth_oracle(const Image& img, double sigma) {
  const Index radius = static_cast<Index>(std::ceil(4.0 * sigma));
  const Index n = 2 * radius + 1;
  Image k1(1, n);
  for (Index i = -radius; i <= radius; ++i)
    k1(0, i + radius) = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
  k1 /= k1.sum();

  const Index h = img.rows(), w = img.cols();
  Image out(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index dy = -radius; dy <= radius; ++dy)
        for (Index dx = -radius; dx <= radius; ++dx)
          acc += k1(0, dy + radius) * k1(0, dx + radius) *
                 img(cdsa::mirror_index(i + dy, h), cdsa::mirror_index(j + dx, w));
      out(i, j) = acc;
    }
  return out;
}

// direct windowed mean with mirror boundary
inline Image local_mean_oracle(const Image& img, int k) {
  const Index h = img.rows(), w = img.cols();
  const Index r = k / 2;
  Image out(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index dy = -r; dy <= r; ++dy)
        for (Index dx = -r; dx <= r; ++dx)
          acc += img(cdsa::mirror_index(i + dy, h), cdsa::mirror_index(j + dx, w));
      out(i, j) = acc / (static_cast<double>(k) * static_cast<double>(k));
    }
  return out;
}

// two-pass (mean then squared deviation) variance, numerically stable
inline Image local_variance_oracle(const Image& img, int k) {
  const Index h = img.rows(), w = img.cols();
  const Index r = k / 2;
  const Image mu = local_mean_oracle(img, k);
  Image out(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index dy = -r; dy <= r; ++dy)
        for (Index dx = -r; dx <= r; ++dx) {
          const double d =
              img(cdsa::mirror_index(i + dy, h), cdsa::mirror_index(j + dx, w)) - mu(i, j);
          acc += d * d;
        }
      out(i, j) = acc / (static_cast<double>(k) * static_cast<double>(k));
    }
  return out;
}

inline bool masks_equal(const Mask& a, const Mask& b) { return (a == b).all(); }

inline double max_abs_diff(const Image& a, const Image& b) {
  return (a - b).abs().maxCoeff();
}

}  // namespace testutil
