#include "cdsa/vesselness.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "cdsa/errors.hpp"

namespace cdsa {

void ScaleSpaceConfig::validate() const {
  if (sigmas.empty()) throw ArgumentError("scale config: sigmas must be nonempty");
  double prev = 0.0;
  for (double s : sigmas) {
    if (!(s > prev)) throw ArgumentError("scale config: sigmas must be positive and strictly increasing");
    prev = s;
  }
  if (!(beta > 0)) throw ArgumentError("scale config: beta must be > 0");
  if (c && !(*c > 0)) throw ArgumentError("scale config: c must be > 0");
  if (!(gamma_norm >= 0)) throw ArgumentError("scale config: gamma_norm must be >= 0");
}

Image gaussian_kernel(double sigma) {
  if (!(sigma > 0)) throw ArgumentError("gaussian_kernel: sigma must be > 0");
  const Index radius = static_cast<Index>(std::ceil(4.0 * sigma));
  Image k(1, 2 * radius + 1);
  for (Index i = -radius; i <= radius; ++i)
    k(0, i + radius) = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
  k /= k.sum();
  return k;
}

Image gaussian_smooth(const Image& img, double sigma) {
  const Image kernel = gaussian_kernel(sigma);
  const Index radius = kernel.cols() / 2;
  const Index h = img.rows(), w = img.cols();

  Image tmp(h, w);  // horizontal pass
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index t = -radius; t <= radius; ++t)
        acc += kernel(0, t + radius) * img(i, mirror_index(j + t, w));
      tmp(i, j) = acc;
    }
  }
  Image out(h, w);  // vertical pass
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index t = -radius; t <= radius; ++t)
        acc += kernel(0, t + radius) * tmp(mirror_index(i + t, h), j);
      out(i, j) = acc;
    }
  }
  return out;
}

HessianField hessian_at_scale(const Image& img, double sigma, double gamma_norm) {
  if (!(sigma > 0)) throw ArgumentError("hessian_at_scale: sigma must be > 0");
  const Index radius = static_cast<Index>(std::ceil(4.0 * sigma));
  const Index support = 2 * radius + 1;
  if (img.rows() < support || img.cols() < support)
    throw ArgumentError("hessian_at_scale: image smaller than kernel support");

  const Image s = gaussian_smooth(img, sigma);
  const double norm = std::pow(sigma, gamma_norm);
  const Index h = img.rows(), w = img.cols();

  HessianField field;
  field.hxx.resize(h, w);
  field.hxy.resize(h, w);
  field.hyy.resize(h, w);
  field.border = radius + 1;

  auto val = [&](Index i, Index j) { return s(mirror_index(i, h), mirror_index(j, w)); };
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      const double center = s(i, j);
      field.hxx(i, j) = norm * (val(i, j + 1) - 2.0 * center + val(i, j - 1));
      field.hyy(i, j) = norm * (val(i + 1, j) - 2.0 * center + val(i - 1, j));
      field.hxy(i, j) = norm * 0.25 *
                        (val(i + 1, j + 1) - val(i + 1, j - 1) - val(i - 1, j + 1) +
                         val(i - 1, j - 1));
    }
  }
  return field;
}

std::pair<double, double> eig2x2_symmetric(double hxx, double hxy, double hyy) {
  const double mean = 0.5 * (hxx + hyy);
  const double half_diff = 0.5 * (hxx - hyy);
  const double disc = std::sqrt(half_diff * half_diff + hxy * hxy);
  const double a = mean - disc, b = mean + disc;
  if (std::abs(a) <= std::abs(b)) return {a, b};
  return {b, a};
}

double frangi_vesselness(double lambda1, double lambda2, double beta, double c,
                         VesselPolarity polarity) {
  const bool gate =
      polarity == VesselPolarity::dark_vessels ? lambda2 > 0.0 : lambda2 < 0.0;
  if (!gate) return 0.0;
  const double rb = lambda1 / lambda2;
  const double s2 = lambda1 * lambda1 + lambda2 * lambda2;
  return std::exp(-rb * rb / (2.0 * beta * beta)) *
         (1.0 - std::exp(-s2 / (2.0 * c * c)));
}

Image frangi_response(const HessianField& h, const ScaleSpaceConfig& cfg) {
  cfg.validate();
  if (!same_shape(h.hxx, h.hxy) || !same_shape(h.hxx, h.hyy))
    throw ArgumentError("frangi_response: inconsistent Hessian field");
  const Index rows = h.hxx.rows(), cols = h.hxx.cols();

  Image l1(rows, cols), l2(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const auto [a, b] = eig2x2_symmetric(h.hxx(i, j), h.hxy(i, j), h.hyy(i, j));
      l1(i, j) = a;
      l2(i, j) = b;
    }

  double c_value;
  if (cfg.c) {
    c_value = *cfg.c;
  } else {
    const double s_max = (l1.square() + l2.square()).sqrt().maxCoeff();
    if (s_max <= 0.0) return Image::Zero(rows, cols);
    c_value = 0.5 * s_max;
  }

  Image out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      out(i, j) = frangi_vesselness(l1(i, j), l2(i, j), cfg.beta, c_value, cfg.polarity);

  const Index b = std::min({h.border, rows, cols});
  if (b > 0) {
    out.topRows(b).setZero();
    out.bottomRows(b).setZero();
    out.leftCols(b).setZero();
    out.rightCols(b).setZero();
  }
  return out;
}

Image integrated_geometric_prior(const Image& img, const ScaleSpaceConfig& cfg, int threads) {
  cfg.validate();
  const auto response_at = [&](double sigma) {
    return frangi_response(hessian_at_scale(img, sigma, cfg.gamma_norm), cfg);
  };

  std::vector<Image> responses(cfg.sigmas.size());
  if (threads <= 1 || cfg.sigmas.size() == 1) {
    for (std::size_t s = 0; s < cfg.sigmas.size(); ++s) responses[s] = response_at(cfg.sigmas[s]);
  } else {
    std::vector<std::future<Image>> futures;
    futures.reserve(cfg.sigmas.size());
    for (double sigma : cfg.sigmas)
      futures.push_back(std::async(std::launch::async, response_at, sigma));
    for (std::size_t s = 0; s < futures.size(); ++s) responses[s] = futures[s].get();
  }

  Image prior = responses[0];
  for (std::size_t s = 1; s < responses.size(); ++s) prior = prior.max(responses[s]);
  return prior;
}

}  // namespace cdsa
