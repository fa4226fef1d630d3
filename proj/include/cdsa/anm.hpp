#pragma once

#include <Eigen/Dense>

#include <string>

#include "cdsa/rng.hpp"
#include "cdsa/types.hpp"

namespace cdsa {

struct NoiseParams {
  double alpha = 0.0;  // signal-dependent gain
  double gamma = 0.0;  // stationary variance floor
};

// Coordinate attention: shared reduction conv over H- and W-pooled features,
// relu, per-axis expansion convs, sigmoid attention maps.
struct CoordAttParams {
  Eigen::MatrixXd reduce_w;  // c_mid x c
  Eigen::VectorXd reduce_b;  // c_mid
  Eigen::MatrixXd attn_h_w;  // c x c_mid
  Eigen::VectorXd attn_h_b;  // c
  Eigen::MatrixXd attn_w_w;  // c x c_mid
  Eigen::VectorXd attn_w_b;  // c
  bool identity_mode = false;

  void validate(Index channels) const;
};

struct HeadParams {
  Eigen::VectorXd w_alpha;
  double b_alpha = 0.0;
  Eigen::VectorXd w_gamma;
  double b_gamma = 0.0;
};

double softplus(double x);

Tensor4 coord_att(const Tensor4& f, const CoordAttParams& p);

// Masked mean and masked max of the attended features, per channel over the
// whole batch; descriptor = [mean || max], length 2c. An empty mask yields a
// zero descriptor.
Eigen::VectorXd masked_dual_pool(const Tensor4& f, const Mask& m_dil, const CoordAttParams& p);

// alpha = softplus(w_alpha . d + b_alpha), gamma likewise; strictly positive.
NoiseParams regress_noise_params(const Eigen::VectorXd& descriptor, const HeadParams& h);

// gaussian_smooth(dilate(mask, radius), blur_sigma), values in [0,1].
Image soft_mask(const Mask& mask, double dilate_radius, double blur_sigma);

// I_syn = I_bg + (eps * sqrt(alpha I_bg + gamma)) .* m_soft, one independent
// standard normal per pixel from counter-indexed draws, so any pixel
// partition reproduces the same field. Advances rng by 2 draws per pixel.
Image synthesize_noise(const Image& i_bg, const NoiseParams& params, const Image& m_soft,
                       SeededRng& rng);

// Test/CLI helper: seeded small random parameters, c_mid = max(1, c/reduction).
CoordAttParams make_coord_att_params(Index channels, Index reduction, SeededRng& rng);
HeadParams make_head_params(Index descriptor_len, SeededRng& rng);

// Parameter files: one CDSAT4 tensor per matrix with fixed names inside dir
// (reduce_w/reduce_b/attn_h_w/attn_h_b/attn_w_w/attn_w_b, alpha_w/alpha_b/
// gamma_w/gamma_b). Matrices are packed as (rows, 1, 1, cols).
void save_coord_att_params(const std::string& dir, const CoordAttParams& p);
CoordAttParams load_coord_att_params(const std::string& dir);
void save_head_params(const std::string& dir, const HeadParams& h);
HeadParams load_head_params(const std::string& dir);

}  // namespace cdsa
