#include "cdsa/topo_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cdsa/errors.hpp"

namespace cdsa {

void LossWeights::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0)
    throw ArgumentError("loss weights must be >= 0");
}

void SoftSkeletonConfig::validate() const {
  if (iterations < 1) throw ArgumentError("soft skeleton: iterations must be >= 1");
}

namespace {

void check_shapes(const Image& a, const Image& b, const char* who) {
  if (!same_shape(a, b)) throw ArgumentError(std::string(who) + ": shape mismatch");
}

// 3x3 pooling over in-bounds neighbors, winner index and runner-up gap
// recorded for backprop and tie detection. First winner in scan order.
struct Pool3 {
  Image out;
  std::vector<Index> arg;  // flat winner index per output pixel
  Image gap;               // winner vs best competitor
};

template <bool kMax>
Pool3 pool3(const Image& in) {
  const Index h = in.rows(), w = in.cols();
  Pool3 p;
  p.out.resize(h, w);
  p.gap.resize(h, w);
  p.arg.resize(static_cast<std::size_t>(h * w));
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      double best = kMax ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
      double second = best;
      Index best_idx = -1;
      for (Index di = -1; di <= 1; ++di) {
        const Index y = i + di;
        if (y < 0 || y >= h) continue;
        for (Index dj = -1; dj <= 1; ++dj) {
          const Index x = j + dj;
          if (x < 0 || x >= w) continue;
          const double v = in(y, x);
          const bool better = kMax ? v > best : v < best;
          if (better) {
            second = best;
            best = v;
            best_idx = y * w + x;
          } else {
            const bool closer = kMax ? v > second : v < second;
            if (closer) second = v;
          }
        }
      }
      p.out(i, j) = best;
      p.arg[static_cast<std::size_t>(i * w + j)] = best_idx;
      p.gap(i, j) = std::isfinite(second) ? std::abs(best - second)
                                          : std::numeric_limits<double>::infinity();
    }
  }
  return p;
}

// soft skeleton rounds r = 0..k with e_0 = input, e_{r+1} = minpool3(e_r):
//   delta_r = relu(e_r - maxpool3(minpool3(e_r)))
//   skel   += relu(delta_r - skel*delta_r)
struct SkeletonTape {
  int rounds = 0;  // k
  std::vector<Image> erode;        // e_r, r = 0..k
  std::vector<Pool3> min_tape;     // minpool3(e_r)
  std::vector<Pool3> max_tape;     // maxpool3(min_tape.out)
  std::vector<Image> delta;        // relu residual
  std::vector<Image> skel_before;  // skel prior to the round's update
  Image skel;
};

SkeletonTape skeleton_forward(const Image& img, int k) {
  SkeletonTape t;
  t.rounds = k;
  t.erode.reserve(static_cast<std::size_t>(k) + 1);
  t.erode.push_back(img);
  t.skel = Image::Zero(img.rows(), img.cols());
  for (int r = 0; r <= k; ++r) {
    const Image& e = t.erode.back();
    t.min_tape.push_back(pool3<false>(e));
    t.max_tape.push_back(pool3<true>(t.min_tape.back().out));
    t.delta.push_back((e - t.max_tape.back().out).max(0.0));
    t.skel_before.push_back(t.skel);
    const Image& d = t.delta.back();
    t.skel += (d - t.skel * d).max(0.0);
    if (r < k) t.erode.push_back(t.min_tape.back().out);
  }
  return t;
}

Image scatter(const std::vector<Index>& arg, const Image& g) {
  Image out = Image::Zero(g.rows(), g.cols());
  const double* src = g.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < arg.size(); ++i) dst[arg[i]] += src[i];
  return out;
}

Image skeleton_backward(const SkeletonTape& t, const Image& g_skel_final) {
  Image g_skel = g_skel_final;
  Image g_e_next;  // gradient w.r.t. e_{r+1} while walking r downwards
  for (int r = t.rounds; r >= 0; --r) {
    const Image& e = t.erode[static_cast<std::size_t>(r)];
    const Image& d = t.delta[static_cast<std::size_t>(r)];
    const Image& sb = t.skel_before[static_cast<std::size_t>(r)];
    const auto& mt = t.min_tape[static_cast<std::size_t>(r)];
    const auto& xt = t.max_tape[static_cast<std::size_t>(r)];

    // skel_new = skel + relu(delta - skel*delta)
    const Image update_active = ((d - sb * d) > 0.0).cast<double>();
    const Image g_delta_from_update = g_skel * update_active * (1.0 - sb);
    const Image g_skel_prev = g_skel * (1.0 - update_active * d);

    // delta = relu(e - o)
    const Image delta_active = ((e - xt.out) > 0.0).cast<double>();
    const Image g_pre = g_delta_from_update * delta_active;
    Image g_e = g_pre;            // d delta / d e
    const Image g_o = -g_pre;     // d delta / d o

    // o = maxpool3(m), m = minpool3(e)
    Image g_m = scatter(xt.arg, g_o);
    if (r < t.rounds) g_m += g_e_next;  // e_{r+1} = m_r
    g_e += scatter(mt.arg, g_m);

    g_e_next = std::move(g_e);
    g_skel = g_skel_prev;
  }
  return g_e_next;
}

void mark_box(Mask& m, Index ci, Index cj, Index radius) {
  const Index h = m.rows(), w = m.cols();
  const Index i0 = std::max<Index>(0, ci - radius), i1 = std::min(h - 1, ci + radius);
  const Index j0 = std::max<Index>(0, cj - radius), j1 = std::min(w - 1, cj + radius);
  for (Index i = i0; i <= i1; ++i)
    for (Index j = j0; j <= j1; ++j) m(i, j) = true;
}

// Input pixels whose perturbation can flip a selection or relu activation.
// e_r depends on input within Chebyshev radius r, min windows add 1, the
// opening adds 2.
Mask skeleton_ties(const SkeletonTape& t, double tol) {
  const Index h = t.skel.rows(), w = t.skel.cols();
  Mask ties = Mask::Constant(h, w, false);
  for (int r = 0; r <= t.rounds; ++r) {
    const auto& mt = t.min_tape[static_cast<std::size_t>(r)];
    const auto& xt = t.max_tape[static_cast<std::size_t>(r)];
    const Image& e = t.erode[static_cast<std::size_t>(r)];
    const Image& d = t.delta[static_cast<std::size_t>(r)];
    const Image& sb = t.skel_before[static_cast<std::size_t>(r)];
    for (Index i = 0; i < h; ++i) {
      for (Index j = 0; j < w; ++j) {
        if (mt.gap(i, j) < tol) mark_box(ties, i, j, r + 1);
        if (xt.gap(i, j) < tol) mark_box(ties, i, j, r + 2);
        if (std::abs(e(i, j) - xt.out(i, j)) < tol) mark_box(ties, i, j, r + 2);
        const double a = d(i, j) * (1.0 - sb(i, j));
        if (a != 0.0 && std::abs(a) < tol) mark_box(ties, i, j, r + 2);
      }
    }
  }
  return ties;
}

}  // namespace

double soft_dice_loss(const Image& pred, const Image& gt) {
  check_shapes(pred, gt, "soft_dice_loss");
  const double s = kLossSmoothing;
  return 1.0 - (2.0 * (pred * gt).sum() + s) / (pred.sum() + gt.sum() + s);
}

Image soft_dice_gradient(const Image& pred, const Image& gt) {
  check_shapes(pred, gt, "soft_dice_gradient");
  const double s = kLossSmoothing;
  const double num = 2.0 * (pred * gt).sum() + s;
  const double den = pred.sum() + gt.sum() + s;
  return -(2.0 * gt * den - num) / (den * den);
}

double bce_loss(const Image& pred, const Mask& gt) {
  if (!same_shape(pred, gt)) throw ArgumentError("bce_loss: shape mismatch");
  const Image p = pred.min(1.0 - kBceClamp).max(kBceClamp);
  const Image g = to_image(gt);
  return -(g * p.log() + (1.0 - g) * (1.0 - p).log()).mean();
}

Image bce_gradient(const Image& pred, const Mask& gt) {
  if (!same_shape(pred, gt)) throw ArgumentError("bce_gradient: shape mismatch");
  const double n = static_cast<double>(pred.size());
  const Image g = to_image(gt);
  Image grad(pred.rows(), pred.cols());
  for (Index i = 0; i < pred.rows(); ++i)
    for (Index j = 0; j < pred.cols(); ++j) {
      const double p = pred(i, j);
      if (p <= kBceClamp || p >= 1.0 - kBceClamp) {
        grad(i, j) = 0.0;  // clamp zone
      } else {
        grad(i, j) = (-g(i, j) / p + (1.0 - g(i, j)) / (1.0 - p)) / n;
      }
    }
  return grad;
}

Image soft_skeleton(const Image& soft_mask, const SoftSkeletonConfig& cfg) {
  cfg.validate();
  return skeleton_forward(soft_mask, cfg.iterations).skel;
}

namespace {

struct ClDiceParts {
  double tprec = 0, tsens = 0;
  double sum_sp = 0, sum_sg = 0;       // skeleton masses
  double sum_sp_gt = 0, sum_sg_pred = 0;
};

ClDiceParts cldice_parts(const Image& s_pred, const Image& s_gt, const Image& pred,
                         const Image& gt) {
  ClDiceParts c;
  const double s = kLossSmoothing;
  c.sum_sp = s_pred.sum();
  c.sum_sg = s_gt.sum();
  c.sum_sp_gt = (s_pred * gt).sum();
  c.sum_sg_pred = (s_gt * pred).sum();
  c.tprec = (c.sum_sp_gt + s) / (c.sum_sp + s);
  c.tsens = (c.sum_sg_pred + s) / (c.sum_sg + s);
  return c;
}

}  // namespace

double soft_cldice_loss(const Image& pred, const Image& gt, const SoftSkeletonConfig& cfg) {
  check_shapes(pred, gt, "soft_cldice_loss");
  cfg.validate();
  const Image s_pred = soft_skeleton(pred, cfg);
  const Image s_gt = soft_skeleton(gt, cfg);
  const ClDiceParts c = cldice_parts(s_pred, s_gt, pred, gt);
  return 1.0 - 2.0 * c.tprec * c.tsens / (c.tprec + c.tsens);
}

Image soft_cldice_gradient(const Image& pred, const Image& gt, const SoftSkeletonConfig& cfg) {
  check_shapes(pred, gt, "soft_cldice_gradient");
  cfg.validate();
  const SkeletonTape tape = skeleton_forward(pred, cfg.iterations);
  const Image s_gt = soft_skeleton(gt, cfg);
  const ClDiceParts c = cldice_parts(tape.skel, s_gt, pred, gt);
  const double s = kLossSmoothing;
  const double denom = (c.tprec + c.tsens) * (c.tprec + c.tsens);
  const double dl_dtp = -2.0 * c.tsens * c.tsens / denom;
  const double dl_dts = -2.0 * c.tprec * c.tprec / denom;

  // Tprec depends on pred through the skeleton
  const double sp_den = c.sum_sp + s;
  const Image dtp_dsp = (gt * sp_den - (c.sum_sp_gt + s)) / (sp_den * sp_den);
  Image grad = skeleton_backward(tape, dl_dtp * dtp_dsp);
  // Tsens depends on pred directly
  grad += dl_dts * s_gt / (c.sum_sg + s);
  return grad;
}

double total_loss(const Image& pred, const Image& gt_soft, const Mask& gt_mask,
                  const LossWeights& w, const SoftSkeletonConfig& cfg) {
  w.validate();
  double loss = 0.0;
  if (w.lambda1 != 0.0) loss += w.lambda1 * soft_dice_loss(pred, gt_soft);
  if (w.lambda2 != 0.0) loss += w.lambda2 * bce_loss(pred, gt_mask);
  if (w.lambda3 != 0.0) loss += w.lambda3 * soft_cldice_loss(pred, gt_soft, cfg);
  return loss;
}

Image total_loss_gradient(const Image& pred, const Image& gt_soft, const Mask& gt_mask,
                          const LossWeights& w, const SoftSkeletonConfig& cfg) {
  w.validate();
  Image grad = Image::Zero(pred.rows(), pred.cols());
  if (w.lambda1 != 0.0) grad += w.lambda1 * soft_dice_gradient(pred, gt_soft);
  if (w.lambda2 != 0.0) grad += w.lambda2 * bce_gradient(pred, gt_mask);
  if (w.lambda3 != 0.0) grad += w.lambda3 * soft_cldice_gradient(pred, gt_soft, cfg);
  return grad;
}

Mask cldice_tie_mask(const Image& pred, const SoftSkeletonConfig& cfg, double tol) {
  cfg.validate();
  return skeleton_ties(skeleton_forward(pred, cfg.iterations), tol);
}

double gradcheck_losses(const Image& pred, const Image& gt, const LossWeights& w,
                        const SoftSkeletonConfig& cfg, double step) {
  const Mask gt_mask = gt > 0.5;
  const Image analytic = total_loss_gradient(pred, gt, gt_mask, w, cfg);

  Mask skip = Mask::Constant(pred.rows(), pred.cols(), false);
  if (w.lambda3 != 0.0) skip = skip || cldice_tie_mask(pred, cfg);
  if (w.lambda2 != 0.0)
    skip = skip || (pred < kBceClamp + 2.0 * step) || (pred > 1.0 - kBceClamp - 2.0 * step);

  Image probe = pred;
  double worst = 0.0;
  for (Index i = 0; i < pred.rows(); ++i) {
    for (Index j = 0; j < pred.cols(); ++j) {
      if (skip(i, j)) continue;
      const double save = probe(i, j);
      probe(i, j) = save + step;
      const double lp = total_loss(probe, gt, gt_mask, w, cfg);
      probe(i, j) = save - step;
      const double lm = total_loss(probe, gt, gt_mask, w, cfg);
      probe(i, j) = save;
      const double numeric = (lp - lm) / (2.0 * step);
      const double a = analytic(i, j);
      worst = std::max(worst,
                       std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)}));
    }
  }
  return worst;
}

}  // namespace cdsa
