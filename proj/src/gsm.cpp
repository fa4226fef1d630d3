#include "cdsa/gsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cdsa/errors.hpp"

namespace cdsa {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct PooledTape {
  Tensor4 out;
  std::vector<Index> argmax;  // flat index into the input, per output element
};

PooledTape max_pool2_tape(const Tensor4& t, Index kernel) {
  if (kernel <= 0) throw ArgumentError("max_pool2: kernel must be >= 1");
  if (t.h % kernel != 0 || t.w % kernel != 0)
    throw ArgumentError("max_pool2: dims not divisible by kernel (no implicit padding)");
  PooledTape tape;
  tape.out = Tensor4(t.n, t.c, t.h / kernel, t.w / kernel);
  tape.argmax.resize(static_cast<std::size_t>(tape.out.size()));
  Index o = 0;
  for (Index in = 0; in < t.n; ++in)
    for (Index ic = 0; ic < t.c; ++ic)
      for (Index oy = 0; oy < tape.out.h; ++oy)
        for (Index ox = 0; ox < tape.out.w; ++ox, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          Index best_idx = -1;
          for (Index dy = 0; dy < kernel; ++dy)
            for (Index dx = 0; dx < kernel; ++dx) {
              const Index idx = t.offset(in, ic, oy * kernel + dy, ox * kernel + dx);
              if (t.data[idx] > best) {
                best = t.data[idx];
                best_idx = idx;
              }
            }
          tape.out.data[o] = best;
          tape.argmax[static_cast<std::size_t>(o)] = best_idx;
        }
  return tape;
}

}  // namespace

void Conv1x1Params::validate() const {
  const Index c_out = weights.rows();
  if (c_out == 0 || weights.cols() == 0) throw ArgumentError("conv1x1: empty weights");
  if (bias.size() != c_out || bn_gamma.size() != c_out || bn_beta.size() != c_out ||
      bn_mean.size() != c_out || bn_var.size() != c_out)
    throw ArgumentError("conv1x1: per-channel parameter sizes must equal c_out");
  if ((bn_var.array() < 0.0).any()) throw ArgumentError("conv1x1: bn_var must be >= 0");
}

Conv1x1Params Conv1x1Params::with_identity_bn(Eigen::MatrixXd w, Eigen::VectorXd b) {
  Conv1x1Params p;
  const Index c_out = w.rows();
  p.weights = std::move(w);
  p.bias = std::move(b);
  p.bn_gamma = Eigen::VectorXd::Ones(c_out);
  p.bn_beta = Eigen::VectorXd::Zero(c_out);
  p.bn_mean = Eigen::VectorXd::Zero(c_out);
  p.bn_var = Eigen::VectorXd::Ones(c_out);
  return p;
}

Tensor4 max_pool2(const Tensor4& t, Index kernel) { return max_pool2_tape(t, kernel).out; }

Tensor4 spatial_gate(const Tensor4& p_geom, const Conv1x1Params& params, Index kernel) {
  params.validate();
  if (p_geom.c != params.weights.cols())
    throw ArgumentError("spatial_gate: channel count does not match conv weights");
  const Tensor4 pooled = max_pool2(p_geom, kernel);
  const Index c_out = params.weights.rows();

  Tensor4 gate(pooled.n, c_out, pooled.h, pooled.w);
  const Index hw = pooled.h * pooled.w;
  for (Index in = 0; in < pooled.n; ++in) {
    for (Index co = 0; co < c_out; ++co) {
      const double inv_std = 1.0 / std::sqrt(params.bn_var(co) + kBnEpsilon);
      for (Index p = 0; p < hw; ++p) {
        double y = params.bias(co);
        for (Index ci = 0; ci < pooled.c; ++ci)
          y += params.weights(co, ci) * pooled.data[pooled.offset(in, ci, 0, 0) + p];
        const double z =
            (y - params.bn_mean(co)) * inv_std * params.bn_gamma(co) + params.bn_beta(co);
        gate.data[gate.offset(in, co, 0, 0) + p] = sigmoid(z);
      }
    }
  }
  return gate;
}

Tensor4 upsample_nearest(const Tensor4& t, Index factor_h, Index factor_w) {
  if (factor_h <= 0 || factor_w <= 0) throw ArgumentError("upsample_nearest: factor must be >= 1");
  Tensor4 out(t.n, t.c, t.h * factor_h, t.w * factor_w);
  for (Index in = 0; in < t.n; ++in)
    for (Index ic = 0; ic < t.c; ++ic)
      for (Index y = 0; y < out.h; ++y)
        for (Index x = 0; x < out.w; ++x)
          out.at(in, ic, y, x) = t.at(in, ic, y / factor_h, x / factor_w);
  return out;
}

Tensor4 gated_modulation(const Tensor4& f_l, const Tensor4& gate) {
  if (f_l.n != gate.n || f_l.c != gate.c)
    throw ArgumentError("gated_modulation: batch/channel mismatch");
  const Tensor4* g = &gate;
  Tensor4 up;
  if (f_l.h != gate.h || f_l.w != gate.w) {
    if (gate.h == 0 || gate.w == 0 || f_l.h % gate.h != 0 || f_l.w % gate.w != 0)
      throw ArgumentError("gated_modulation: gate shape is not an integer divisor of features");
    up = upsample_nearest(gate, f_l.h / gate.h, f_l.w / gate.w);
    g = &up;
  }
  Tensor4 out = f_l;
  out.data = f_l.data * (1.0 + g->data);
  return out;
}

GsmGradients gsm_gradients(const Tensor4& f_l, const Tensor4& p_geom,
                           const Conv1x1Params& params, Index kernel) {
  params.validate();
  const PooledTape pooled = max_pool2_tape(p_geom, kernel);
  const Index c_out = params.weights.rows();
  if (p_geom.c != params.weights.cols())
    throw ArgumentError("gsm_gradients: channel count does not match conv weights");
  if (f_l.n != pooled.out.n || f_l.c != c_out)
    throw ArgumentError("gsm_gradients: feature batch/channel mismatch");
  if (f_l.h % pooled.out.h != 0 || f_l.w % pooled.out.w != 0)
    throw ArgumentError("gsm_gradients: feature dims not a multiple of gate dims");
  const Index fh = f_l.h / pooled.out.h, fw = f_l.w / pooled.out.w;

  // forward pieces
  const Tensor4 gate = spatial_gate(p_geom, params, kernel);

  GsmGradients g;
  g.d_f_l = f_l;
  g.d_p_geom = Tensor4(p_geom.n, p_geom.c, p_geom.h, p_geom.w);
  g.d_weights = Eigen::MatrixXd::Zero(params.weights.rows(), params.weights.cols());
  g.d_bias = Eigen::VectorXd::Zero(c_out);

  // dJ/dF = 1 + G at the feature resolution
  for (Index in = 0; in < f_l.n; ++in)
    for (Index ic = 0; ic < f_l.c; ++ic)
      for (Index y = 0; y < f_l.h; ++y)
        for (Index x = 0; x < f_l.w; ++x)
          g.d_f_l.at(in, ic, y, x) = 1.0 + gate.at(in, ic, y / fh, x / fw);

  // dJ/dG: each gate element scales a block of F
  Tensor4 d_gate(gate.n, gate.c, gate.h, gate.w);
  for (Index in = 0; in < gate.n; ++in)
    for (Index ic = 0; ic < gate.c; ++ic)
      for (Index gy = 0; gy < gate.h; ++gy)
        for (Index gx = 0; gx < gate.w; ++gx) {
          double acc = 0.0;
          for (Index dy = 0; dy < fh; ++dy)
            for (Index dx = 0; dx < fw; ++dx)
              acc += f_l.at(in, ic, gy * fh + dy, gx * fw + dx);
          d_gate.at(in, ic, gy, gx) = acc;
        }

  // through sigmoid and BN to the conv output
  Tensor4 d_y(gate.n, gate.c, gate.h, gate.w);
  for (Index in = 0; in < gate.n; ++in)
    for (Index co = 0; co < c_out; ++co) {
      const double bn_scale =
          params.bn_gamma(co) / std::sqrt(params.bn_var(co) + kBnEpsilon);
      for (Index p = 0; p < gate.h * gate.w; ++p) {
        const Index idx = gate.offset(in, co, 0, 0) + p;
        const double s = gate.data[idx];
        d_y.data[idx] = d_gate.data[idx] * s * (1.0 - s) * bn_scale;
      }
    }

  // conv: accumulate weight/bias gradients, push into the pooled prior
  Tensor4 d_pooled(pooled.out.n, pooled.out.c, pooled.out.h, pooled.out.w);
  const Index hw = pooled.out.h * pooled.out.w;
  for (Index in = 0; in < pooled.out.n; ++in)
    for (Index co = 0; co < c_out; ++co)
      for (Index p = 0; p < hw; ++p) {
        const double dy = d_y.data[d_y.offset(in, co, 0, 0) + p];
        g.d_bias(co) += dy;
        for (Index ci = 0; ci < pooled.out.c; ++ci) {
          const Index pidx = pooled.out.offset(in, ci, 0, 0) + p;
          g.d_weights(co, ci) += dy * pooled.out.data[pidx];
          d_pooled.data[pidx] += dy * params.weights(co, ci);
        }
      }

  // max-pool routes to the argmax element
  for (Index o = 0; o < d_pooled.size(); ++o)
    g.d_p_geom.data[pooled.argmax[static_cast<std::size_t>(o)]] += d_pooled.data[o];

  return g;
}

namespace {

double gsm_objective(const Tensor4& f_l, const Tensor4& p_geom, const Conv1x1Params& params,
                     Index kernel) {
  return gated_modulation(f_l, spatial_gate(p_geom, params, kernel)).data.sum();
}

double rel_err(double a, double n) {
  return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
}

}  // namespace

double gradcheck_gsm(const Tensor4& f_l, const Tensor4& p_geom, const Conv1x1Params& params,
                     Index kernel, double step) {
  const GsmGradients g = gsm_gradients(f_l, p_geom, params, kernel);
  double worst = 0.0;

  // f_l elements
  {
    Tensor4 f = f_l;
    for (Index i = 0; i < f.size(); ++i) {
      const double save = f.data[i];
      f.data[i] = save + step;
      const double jp = gsm_objective(f, p_geom, params, kernel);
      f.data[i] = save - step;
      const double jm = gsm_objective(f, p_geom, params, kernel);
      f.data[i] = save;
      worst = std::max(worst, rel_err(g.d_f_l.data[i], (jp - jm) / (2.0 * step)));
    }
  }
  // p_geom elements
  {
    Tensor4 p = p_geom;
    for (Index i = 0; i < p.size(); ++i) {
      const double save = p.data[i];
      p.data[i] = save + step;
      const double jp = gsm_objective(f_l, p, params, kernel);
      p.data[i] = save - step;
      const double jm = gsm_objective(f_l, p, params, kernel);
      p.data[i] = save;
      worst = std::max(worst, rel_err(g.d_p_geom.data[i], (jp - jm) / (2.0 * step)));
    }
  }
  // conv weights and bias
  {
    Conv1x1Params q = params;
    for (Index r = 0; r < q.weights.rows(); ++r)
      for (Index cc = 0; cc < q.weights.cols(); ++cc) {
        const double save = q.weights(r, cc);
        q.weights(r, cc) = save + step;
        const double jp = gsm_objective(f_l, p_geom, q, kernel);
        q.weights(r, cc) = save - step;
        const double jm = gsm_objective(f_l, p_geom, q, kernel);
        q.weights(r, cc) = save;
        worst = std::max(worst, rel_err(g.d_weights(r, cc), (jp - jm) / (2.0 * step)));
      }
    for (Index r = 0; r < q.bias.size(); ++r) {
      const double save = q.bias(r);
      q.bias(r) = save + step;
      const double jp = gsm_objective(f_l, p_geom, q, kernel);
      q.bias(r) = save - step;
      const double jm = gsm_objective(f_l, p_geom, q, kernel);
      q.bias(r) = save;
      worst = std::max(worst, rel_err(g.d_bias(r), (jp - jm) / (2.0 * step)));
    }
  }
  return worst;
}

}  // namespace cdsa
