#pragma once

#include <Eigen/Dense>

#include "cdsa/types.hpp"

namespace cdsa {

inline constexpr double kBnEpsilon = 1e-5;

// 1x1 convolution followed by inference-mode batch norm.
struct Conv1x1Params {
  Eigen::MatrixXd weights;  // c_out x c_in
  Eigen::VectorXd bias;     // c_out
  Eigen::VectorXd bn_gamma, bn_beta, bn_mean, bn_var;  // c_out each

  void validate() const;  // throws ArgumentError
  static Conv1x1Params with_identity_bn(Eigen::MatrixXd w, Eigen::VectorXd b);
};

// Non-overlapping window maximum; dims must divide exactly.
Tensor4 max_pool2(const Tensor4& t, Index kernel);

// sigmoid(BN(conv1x1(maxpool(p_geom, kernel)))); output strictly in (0,1).
Tensor4 spatial_gate(const Tensor4& p_geom, const Conv1x1Params& params, Index kernel = 2);

Tensor4 upsample_nearest(const Tensor4& t, Index factor_h, Index factor_w);

// F_hat = F (1 + G); a spatially smaller gate is nearest-neighbor upsampled
// by the integer shape ratio first.
Tensor4 gated_modulation(const Tensor4& f_l, const Tensor4& gate);

// Gradients of sum(gated_modulation(f_l, spatial_gate(p_geom, ...))) with
// respect to every input.
struct GsmGradients {
  Tensor4 d_f_l;
  Tensor4 d_p_geom;
  Eigen::MatrixXd d_weights;
  Eigen::VectorXd d_bias;
};

GsmGradients gsm_gradients(const Tensor4& f_l, const Tensor4& p_geom,
                           const Conv1x1Params& params, Index kernel = 2);

// Max relative error of the analytic gradients against central differences,
// over every element of f_l, p_geom, weights and bias.
double gradcheck_gsm(const Tensor4& f_l, const Tensor4& p_geom,
                     const Conv1x1Params& params, Index kernel = 2,
                     double step = 1e-4);

}  // namespace cdsa
