#include "cdsa/anm.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "cdsa/errors.hpp"
#include "cdsa/image_io.hpp"
#include "cdsa/morphology.hpp"
#include "cdsa/vesselness.hpp"

namespace cdsa {

namespace fs = std::filesystem;

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void CoordAttParams::validate(Index channels) const {
  if (identity_mode) return;
  const Index c_mid = reduce_w.rows();
  if (reduce_w.cols() != channels)
    throw ArgumentError("coord_att: reduction conv does not match channel count");
  if (reduce_b.size() != c_mid) throw ArgumentError("coord_att: reduction bias size");
  if (attn_h_w.rows() != channels || attn_h_w.cols() != c_mid ||
      attn_w_w.rows() != channels || attn_w_w.cols() != c_mid)
    throw ArgumentError("coord_att: expansion conv shapes");
  if (attn_h_b.size() != channels || attn_w_b.size() != channels)
    throw ArgumentError("coord_att: expansion bias sizes");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Tensor4 coord_att(const Tensor4& f, const CoordAttParams& p) {
  if (p.identity_mode) return f;
  p.validate(f.c);

  Tensor4 out(f.n, f.c, f.h, f.w);
  for (Index in = 0; in < f.n; ++in) {
    // axis pooling: means along W give a c x h slab, along H a c x w slab
    Eigen::MatrixXd pooled(f.c, f.h + f.w);
    for (Index ic = 0; ic < f.c; ++ic) {
      const auto plane = f.plane(in, ic);
      for (Index y = 0; y < f.h; ++y) pooled(ic, y) = plane.row(y).mean();
      for (Index x = 0; x < f.w; ++x) pooled(ic, f.h + x) = plane.col(x).mean();
    }
    Eigen::MatrixXd mid = (p.reduce_w * pooled).colwise() + p.reduce_b;
    mid = mid.cwiseMax(0.0);  // relu

    Eigen::MatrixXd logit_h = (p.attn_h_w * mid.leftCols(f.h)).colwise() + p.attn_h_b;
    Eigen::MatrixXd logit_w = (p.attn_w_w * mid.rightCols(f.w)).colwise() + p.attn_w_b;

    for (Index ic = 0; ic < f.c; ++ic) {
      auto src = f.plane(in, ic);
      auto dst = out.plane(in, ic);
      for (Index y = 0; y < f.h; ++y) {
        const double ah = sigmoid(logit_h(ic, y));
        for (Index x = 0; x < f.w; ++x)
          dst(y, x) = src(y, x) * ah * sigmoid(logit_w(ic, x));
      }
    }
  }
  return out;
}

Eigen::VectorXd masked_dual_pool(const Tensor4& f, const Mask& m_dil, const CoordAttParams& p) {
  if (m_dil.rows() != f.h || m_dil.cols() != f.w)
    throw ArgumentError("masked_dual_pool: mask spatial dims must equal feature dims");
  constexpr double kEps = 1e-6;
  const Tensor4 a = coord_att(f, p);

  Eigen::VectorXd descriptor = Eigen::VectorXd::Zero(2 * f.c);
  const double mask_sum = static_cast<double>(m_dil.count()) * static_cast<double>(f.n);
  const Image m = to_image(m_dil);
  for (Index ic = 0; ic < f.c; ++ic) {
    double acc = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (Index in = 0; in < f.n; ++in) {
      const auto plane = a.plane(in, ic);
      const Image masked = plane * m;
      acc += masked.sum();
      best = std::max(best, masked.maxCoeff());
    }
    descriptor(ic) = acc / (mask_sum + kEps);
    descriptor(f.c + ic) = best;
  }
  return descriptor;
}

NoiseParams regress_noise_params(const Eigen::VectorXd& descriptor, const HeadParams& h) {
  if (h.w_alpha.size() != descriptor.size() || h.w_gamma.size() != descriptor.size())
    throw ArgumentError("regress_noise_params: head width does not match descriptor");
  NoiseParams p;
  p.alpha = softplus(h.w_alpha.dot(descriptor) + h.b_alpha);
  p.gamma = softplus(h.w_gamma.dot(descriptor) + h.b_gamma);
  return p;
}

Image soft_mask(const Mask& mask, double dilate_radius, double blur_sigma) {
  if (dilate_radius < 0) throw ArgumentError("soft_mask: dilate_radius must be >= 0");
  // kernel normalization is exact only to an ulp; pin the contract range
  return gaussian_smooth(to_image(dilate(mask, dilate_radius)), blur_sigma)
      .max(0.0)
      .min(1.0);
}

Image synthesize_noise(const Image& i_bg, const NoiseParams& params, const Image& m_soft,
                       SeededRng& rng) {
  if (!same_shape(i_bg, m_soft)) throw ArgumentError("synthesize_noise: shape mismatch");
  if (params.alpha < 0 || params.gamma < 0)
    throw ArgumentError("synthesize_noise: alpha and gamma must be >= 0");
  if ((i_bg < 0.0).any())
    throw ArgumentError("synthesize_noise: i_bg must be >= 0 (clamp before calling)");

  const std::uint64_t base = rng.counter();
  const Index n = i_bg.size();
  Image out(i_bg.rows(), i_bg.cols());
  const double* bg = i_bg.data();
  const double* m = m_soft.data();
  double* dst = out.data();
  for (Index k = 0; k < n; ++k) {
    const std::uint64_t u = base + 2 * static_cast<std::uint64_t>(k);
    const double eps = rng.normal_from_pair(u, u + 1);
    const double sigma = std::sqrt(params.alpha * bg[k] + params.gamma);
    dst[k] = bg[k] + eps * sigma * m[k];
  }
  rng.skip(2 * static_cast<std::uint64_t>(n));
  return out;
}

CoordAttParams make_coord_att_params(Index channels, Index reduction, SeededRng& rng) {
  const Index c_mid = std::max<Index>(1, channels / reduction);
  auto randn = [&rng](Index r, Index c) {
    Eigen::MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = 0.5 * rng.next_normal();
    return m;
  };
  CoordAttParams p;
  p.reduce_w = randn(c_mid, channels);
  p.reduce_b = randn(c_mid, 1);
  p.attn_h_w = randn(channels, c_mid);
  p.attn_h_b = randn(channels, 1);
  p.attn_w_w = randn(channels, c_mid);
  p.attn_w_b = randn(channels, 1);
  return p;
}

HeadParams make_head_params(Index descriptor_len, SeededRng& rng) {
  HeadParams h;
  h.w_alpha.resize(descriptor_len);
  h.w_gamma.resize(descriptor_len);
  for (Index i = 0; i < descriptor_len; ++i) {
    h.w_alpha(i) = 0.5 * rng.next_normal();
    h.w_gamma(i) = 0.5 * rng.next_normal();
  }
  h.b_alpha = 0.5 * rng.next_normal();
  h.b_gamma = 0.5 * rng.next_normal();
  return h;
}

namespace {

Tensor4 pack_matrix(const Eigen::MatrixXd& m) {
  Tensor4 t(m.rows(), 1, 1, m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) t.at(i, 0, 0, j) = m(i, j);
  return t;
}

Eigen::MatrixXd unpack_matrix(const Tensor4& t) {
  if (t.c != 1 || t.h != 1) throw DataError("parameter tensor must be (rows,1,1,cols)");
  Eigen::MatrixXd m(t.n, t.w);
  for (Index i = 0; i < t.n; ++i)
    for (Index j = 0; j < t.w; ++j) m(i, j) = t.at(i, 0, 0, j);
  return m;
}

std::string param_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / (std::string(name) + ".t4")).string();
}

}  // namespace

void save_coord_att_params(const std::string& dir, const CoordAttParams& p) {
  fs::create_directories(dir);
  save_tensor4(param_path(dir, "reduce_w"), pack_matrix(p.reduce_w));
  save_tensor4(param_path(dir, "reduce_b"), pack_matrix(p.reduce_b));
  save_tensor4(param_path(dir, "attn_h_w"), pack_matrix(p.attn_h_w));
  save_tensor4(param_path(dir, "attn_h_b"), pack_matrix(p.attn_h_b));
  save_tensor4(param_path(dir, "attn_w_w"), pack_matrix(p.attn_w_w));
  save_tensor4(param_path(dir, "attn_w_b"), pack_matrix(p.attn_w_b));
}

CoordAttParams load_coord_att_params(const std::string& dir) {
  CoordAttParams p;
  p.reduce_w = unpack_matrix(load_tensor4(param_path(dir, "reduce_w")));
  p.reduce_b = unpack_matrix(load_tensor4(param_path(dir, "reduce_b")));
  p.attn_h_w = unpack_matrix(load_tensor4(param_path(dir, "attn_h_w")));
  p.attn_h_b = unpack_matrix(load_tensor4(param_path(dir, "attn_h_b")));
  p.attn_w_w = unpack_matrix(load_tensor4(param_path(dir, "attn_w_w")));
  p.attn_w_b = unpack_matrix(load_tensor4(param_path(dir, "attn_w_b")));
  return p;
}

void save_head_params(const std::string& dir, const HeadParams& h) {
  fs::create_directories(dir);
  save_tensor4(param_path(dir, "alpha_w"), pack_matrix(h.w_alpha.transpose()));
  save_tensor4(param_path(dir, "alpha_b"),
               pack_matrix(Eigen::MatrixXd::Constant(1, 1, h.b_alpha)));
  save_tensor4(param_path(dir, "gamma_w"), pack_matrix(h.w_gamma.transpose()));
  save_tensor4(param_path(dir, "gamma_b"),
               pack_matrix(Eigen::MatrixXd::Constant(1, 1, h.b_gamma)));
}

HeadParams load_head_params(const std::string& dir) {
  HeadParams h;
  h.w_alpha = unpack_matrix(load_tensor4(param_path(dir, "alpha_w"))).row(0);
  h.b_alpha = unpack_matrix(load_tensor4(param_path(dir, "alpha_b")))(0, 0);
  h.w_gamma = unpack_matrix(load_tensor4(param_path(dir, "gamma_w"))).row(0);
  h.b_gamma = unpack_matrix(load_tensor4(param_path(dir, "gamma_b")))(0, 0);
  return h;
}

}  // namespace cdsa
