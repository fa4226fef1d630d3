#include "cdsa/stat_loss.hpp"

#include <algorithm>
#include <cmath>

#include "cdsa/errors.hpp"

namespace cdsa {

void StatLossConfig::validate() const {
  if (window_k < 3 || window_k % 2 == 0)
    throw ArgumentError("stat loss: window_k must be odd and >= 3");
  if (lambda < 0) throw ArgumentError("stat loss: lambda must be >= 0");
  if (!(epsilon > 0)) throw ArgumentError("stat loss: epsilon must be > 0");
}

namespace {

void check_window(const Image& img, int k, const char* who) {
  if (k < 3 || k % 2 == 0) throw ArgumentError(std::string(who) + ": k must be odd and >= 3");
  if (img.rows() < k || img.cols() < k)
    throw ArgumentError(std::string(who) + ": image smaller than window");
}

// separable box sum with symmetric-mirror boundary
Image box_mean(const Image& img, int k) {
  const Index h = img.rows(), w = img.cols();
  const Index r = k / 2;
  Image tmp(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index t = -r; t <= r; ++t) acc += img(i, mirror_index(j + t, w));
      tmp(i, j) = acc;
    }
  Image out(h, w);
  const double inv = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (Index t = -r; t <= r; ++t) acc += tmp(mirror_index(i + t, h), j);
      out(i, j) = acc * inv;
    }
  return out;
}

// adjoint of box_mean: scatter each window's weight back through the mirror
Image box_mean_adjoint(const Image& g, int k) {
  const Index h = g.rows(), w = g.cols();
  const Index r = k / 2;
  const double inv = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  Image out = Image::Zero(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      const double v = g(i, j) * inv;
      if (v == 0.0) continue;
      for (Index di = -r; di <= r; ++di) {
        const Index y = mirror_index(i + di, h);
        for (Index dj = -r; dj <= r; ++dj) out(y, mirror_index(j + dj, w)) += v;
      }
    }
  return out;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

Image local_mean(const Image& img, int k) {
  check_window(img, k, "local_mean");
  return box_mean(img, k);
}

Image local_second_moment(const Image& img, int k) {
  check_window(img, k, "local_second_moment");
  return box_mean(img.square(), k);
}

Image local_variance(const Image& img, int k) {
  check_window(img, k, "local_variance");
  const Image mu = box_mean(img, k);
  return (box_mean(img.square(), k) - mu.square()).max(0.0);
}

StatLossTerms moment_alignment_terms(const Image& i_syn, const Image& i_tar, const Mask& w,
                                     const StatLossConfig& cfg) {
  cfg.validate();
  if (!same_shape(i_syn, i_tar) || !same_shape(i_syn, w))
    throw ArgumentError("moment_alignment_loss: shape mismatch");

  const Image mu_s = local_mean(i_syn, cfg.window_k);
  const Image mu_t = local_mean(i_tar, cfg.window_k);
  const Image var_s = local_variance(i_syn, cfg.window_k);
  const Image var_t = local_variance(i_tar, cfg.window_k);

  StatLossTerms t;
  for (Index i = 0; i < i_syn.rows(); ++i)
    for (Index j = 0; j < i_syn.cols(); ++j) {
      if (!w(i, j)) continue;
      ++t.weighted_pixels;
      t.variance_term +=
          std::abs(std::log(var_s(i, j) + cfg.epsilon) - std::log(var_t(i, j) + cfg.epsilon));
      t.mean_term += std::abs(mu_s(i, j) - mu_t(i, j));
    }
  t.total = t.variance_term + cfg.lambda * t.mean_term;
  return t;
}

double moment_alignment_loss(const Image& i_syn, const Image& i_tar, const Mask& w,
                             const StatLossConfig& cfg) {
  return moment_alignment_terms(i_syn, i_tar, w, cfg).total;
}

Image moment_alignment_gradient(const Image& i_syn, const Image& i_tar, const Mask& w,
                                const StatLossConfig& cfg) {
  cfg.validate();
  if (!same_shape(i_syn, i_tar) || !same_shape(i_syn, w))
    throw ArgumentError("moment_alignment_gradient: shape mismatch");
  const int k = cfg.window_k;

  const Image mu_s = local_mean(i_syn, k);
  const Image mu_t = local_mean(i_tar, k);
  const Image e2_s = local_second_moment(i_syn, k);
  const Image raw_var = e2_s - mu_s.square();
  const Image var_s = raw_var.max(0.0);
  const Image var_t = local_variance(i_tar, k);

  const Image wmap = to_image(w);
  Image g_var(i_syn.rows(), i_syn.cols());
  Image g_mu(i_syn.rows(), i_syn.cols());
  for (Index i = 0; i < i_syn.rows(); ++i)
    for (Index j = 0; j < i_syn.cols(); ++j) {
      const double diff =
          std::log(var_s(i, j) + cfg.epsilon) - std::log(var_t(i, j) + cfg.epsilon);
      const double through_clamp = raw_var(i, j) >= 0.0 ? 1.0 : 0.0;
      g_var(i, j) = wmap(i, j) * sign_of(diff) / (var_s(i, j) + cfg.epsilon) * through_clamp;
      g_mu(i, j) = wmap(i, j) * cfg.lambda * sign_of(mu_s(i, j) - mu_t(i, j));
    }

  // var = E[X^2] - mu^2; E[X^2] = box(I^2), mu = box(I)
  const Image g_e2 = box_mean_adjoint(g_var, k);
  const Image g_mu_total = g_mu + g_var * (-2.0 * mu_s);
  return 2.0 * i_syn * g_e2 + box_mean_adjoint(g_mu_total, k);
}

Mask stat_loss_kink_mask(const Image& i_syn, const Image& i_tar, const Mask& w,
                         const StatLossConfig& cfg, double tol) {
  cfg.validate();
  const int k = cfg.window_k;
  const Index r = k / 2;
  const Index h = i_syn.rows(), wd = i_syn.cols();

  const Image mu_s = local_mean(i_syn, k);
  const Image mu_t = local_mean(i_tar, k);
  const Image e2_s = local_second_moment(i_syn, k);
  const Image raw_var = e2_s - mu_s.square();
  const Image var_s = raw_var.max(0.0);
  const Image var_t = local_variance(i_tar, k);

  Mask kinks = Mask::Constant(h, wd, false);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < wd; ++j) {
      if (!w(i, j)) continue;
      const double log_diff =
          std::log(var_s(i, j) + cfg.epsilon) - std::log(var_t(i, j) + cfg.epsilon);
      const bool kink = std::abs(log_diff) < tol ||
                        (cfg.lambda > 0.0 && std::abs(mu_s(i, j) - mu_t(i, j)) < tol) ||
                        std::abs(raw_var(i, j)) < 1e-9;
      if (!kink) continue;
      for (Index di = -r; di <= r; ++di) {
        const Index y = mirror_index(i + di, h);
        for (Index dj = -r; dj <= r; ++dj) kinks(y, mirror_index(j + dj, wd)) = true;
      }
    }
  return kinks;
}

double gradcheck_statloss(const Image& i_syn, const Image& i_tar, const Mask& w,
                          const StatLossConfig& cfg, double step) {
  const Image analytic = moment_alignment_gradient(i_syn, i_tar, w, cfg);
  const Mask skip = stat_loss_kink_mask(i_syn, i_tar, w, cfg);

  Image probe = i_syn;
  double worst = 0.0;
  for (Index i = 0; i < i_syn.rows(); ++i)
    for (Index j = 0; j < i_syn.cols(); ++j) {
      if (skip(i, j)) continue;
      const double save = probe(i, j);
      probe(i, j) = save + step;
      const double lp = moment_alignment_loss(probe, i_tar, w, cfg);
      probe(i, j) = save - step;
      const double lm = moment_alignment_loss(probe, i_tar, w, cfg);
      probe(i, j) = save;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic(i, j);
      worst = std::max(worst,
                       std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)}));
    }
  return worst;
}

}  // namespace cdsa
