#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace cdsa {

using Index = Eigen::Index;

// Row-major rasters so memory order matches raster file order.
template <typename Scalar>
using ImageT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Image = ImageT<double>;
using Mask = ImageT<bool>;

inline Image to_image(const Mask& m) { return m.cast<double>(); }

template <typename A, typename B>
bool same_shape(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

// Symmetric mirror: ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
inline Index mirror_index(Index i, Index n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

// Batch x channel x height x width tensor, row-major in (n, c, h, w).
template <typename Scalar>
struct Tensor4T {
  Index n = 0, c = 0, h = 0, w = 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> data;

  Tensor4T() = default;
  Tensor4T(Index n_, Index c_, Index h_, Index w_)
      : n(n_), c(c_), h(h_), w(w_),
        data(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(n_ * c_ * h_ * w_)) {}

  Index size() const { return n * c * h * w; }

  Index offset(Index in, Index ic, Index iy, Index ix) const {
    return ((in * c + ic) * h + iy) * w + ix;
  }
  Scalar& at(Index in, Index ic, Index iy, Index ix) { return data[offset(in, ic, iy, ix)]; }
  Scalar at(Index in, Index ic, Index iy, Index ix) const { return data[offset(in, ic, iy, ix)]; }

  Eigen::Map<ImageT<Scalar>> plane(Index in, Index ic) {
    return {data.data() + offset(in, ic, 0, 0), h, w};
  }
  Eigen::Map<const ImageT<Scalar>> plane(Index in, Index ic) const {
    return {data.data() + offset(in, ic, 0, 0), h, w};
  }

  bool same_shape(const Tensor4T& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

using Tensor4 = Tensor4T<double>;

}  // namespace cdsa
