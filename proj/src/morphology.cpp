#include "cdsa/morphology.hpp"

#include <cmath>
#include <vector>

#include "cdsa/errors.hpp"

namespace cdsa {

namespace {

constexpr double kEdtInf = 1e18;

// Felzenszwalb-Huttenlocher 1-D squared distance transform (lower envelope
// of parabolas). Exact for integer inputs.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + static_cast<double>(q) * q) -
                (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = static_cast<double>(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

Image squared_distance_to_true(const Mask& sites) {
  const Index h = sites.rows(), w = sites.cols();
  Image sq(h, w);

  // column pass
  {
    std::vector<double> f(static_cast<std::size_t>(h)), d(static_cast<std::size_t>(h));
    std::vector<int> v(static_cast<std::size_t>(h) + 1);
    std::vector<double> z(static_cast<std::size_t>(h) + 2);
    for (Index j = 0; j < w; ++j) {
      for (Index i = 0; i < h; ++i) f[static_cast<std::size_t>(i)] = sites(i, j) ? 0.0 : kEdtInf;
      edt_1d(f, d, v, z);
      for (Index i = 0; i < h; ++i) sq(i, j) = d[static_cast<std::size_t>(i)];
    }
  }
  // row pass
  {
    std::vector<double> f(static_cast<std::size_t>(w)), d(static_cast<std::size_t>(w));
    std::vector<int> v(static_cast<std::size_t>(w) + 1);
    std::vector<double> z(static_cast<std::size_t>(w) + 2);
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) f[static_cast<std::size_t>(j)] = sq(i, j);
      edt_1d(f, d, v, z);
      for (Index j = 0; j < w; ++j) sq(i, j) = d[static_cast<std::size_t>(j)];
    }
  }
  return sq;
}

Mask dilate(const Mask& mask, double radius) {
  if (radius < 0) throw ArgumentError("dilate: radius must be >= 0");
  if (radius == 0 || !mask.any()) return mask;
  const Image sq = squared_distance_to_true(mask);
  // both sides exact: integer squared distances vs radius^2
  return sq <= radius * radius;
}

Image distance_transform(const Mask& mask) {
  if (mask.all()) throw DataError("distance_transform: no background present");
  const Image sq = squared_distance_to_true(!mask);
  return sq.sqrt();
}

Mask hard_skeleton(const Mask& mask) {
  const Index h = mask.rows(), w = mask.cols();
  Mask img = mask;
  auto at = [&](Index i, Index j) -> int {
    return (i >= 0 && i < h && j >= 0 && j < w && img(i, j)) ? 1 : 0;
  };

  std::vector<std::pair<Index, Index>> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int phase = 0; phase < 2; ++phase) {
      kill.clear();
      for (Index i = 0; i < h; ++i) {
        for (Index j = 0; j < w; ++j) {
          if (!img(i, j)) continue;
          const int p2 = at(i - 1, j), p3 = at(i - 1, j + 1), p4 = at(i, j + 1);
          const int p5 = at(i + 1, j + 1), p6 = at(i + 1, j), p7 = at(i + 1, j - 1);
          const int p8 = at(i, j - 1), p9 = at(i - 1, j - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const int ring[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
          int a = 0;
          for (int t = 0; t < 8; ++t)
            if (ring[t] == 0 && ring[t + 1] == 1) ++a;
          if (a != 1) continue;
          if (phase == 0) {
            if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
          } else {
            if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
          }
          kill.emplace_back(i, j);
        }
      }
      for (const auto& [i, j] : kill) img(i, j) = false;
      changed = changed || !kill.empty();
    }
  }
  return img;
}

int connected_components(const Mask& mask) {
  const Index h = mask.rows(), w = mask.cols();
  Mask seen = Mask::Constant(h, w, false);
  std::vector<std::pair<Index, Index>> stack;
  int count = 0;
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      if (!mask(i, j) || seen(i, j)) continue;
      ++count;
      seen(i, j) = true;
      stack.emplace_back(i, j);
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        for (Index dy = -1; dy <= 1; ++dy) {
          for (Index dx = -1; dx <= 1; ++dx) {
            const Index ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (mask(ny, nx) && !seen(ny, nx)) {
              seen(ny, nx) = true;
              stack.emplace_back(ny, nx);
            }
          }
        }
      }
    }
  }
  return count;
}

}  // namespace cdsa
