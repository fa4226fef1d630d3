#pragma once

#include "cdsa/types.hpp"

namespace cdsa {

struct LossWeights {
  double lambda1 = 1.0;  // Dice
  double lambda2 = 1.0;  // cross-entropy
  double lambda3 = 1.0;  // clDice

  void validate() const;
};

struct SoftSkeletonConfig {
  // Erosion/opening rounds; must exceed the maximal vessel half-width.
  int iterations = 10;

  void validate() const;
};

inline constexpr double kLossSmoothing = 1.0;
inline constexpr double kBceClamp = 1e-7;

// 1 - (2 sum(p g) + s) / (sum p + sum g + s), s = 1.
double soft_dice_loss(const Image& pred, const Image& gt);

// Pixel mean of -[g ln p + (1-g) ln(1-p)], p clamped to [1e-7, 1-1e-7].
// Bounded by -ln(1e-7) ~= 16.12.
double bce_loss(const Image& pred, const Mask& gt);

// Differentiable skeleton by iterated 3x3 soft erosion and opening; the
// per-round residual relu(erode - open(erode)) is folded in as
// skel += relu(delta - skel*delta), which keeps values in [0,1].
Image soft_skeleton(const Image& soft_mask, const SoftSkeletonConfig& cfg);

double soft_cldice_loss(const Image& pred, const Image& gt, const SoftSkeletonConfig& cfg);

// lambda1 * Dice + lambda2 * CE + lambda3 * clDice. Dice and clDice consume
// the soft map, CE the hard mask.
double total_loss(const Image& pred, const Image& gt_soft, const Mask& gt_mask,
                  const LossWeights& w, const SoftSkeletonConfig& cfg);

Image soft_dice_gradient(const Image& pred, const Image& gt);
Image bce_gradient(const Image& pred, const Mask& gt);
Image soft_cldice_gradient(const Image& pred, const Image& gt, const SoftSkeletonConfig& cfg);
Image total_loss_gradient(const Image& pred, const Image& gt_soft, const Mask& gt_mask,
                          const LossWeights& w, const SoftSkeletonConfig& cfg);

// Pixels whose finite difference would cross a min/max selection or relu kink
// in the soft-skeleton pipeline (selection margins below tol).
Mask cldice_tie_mask(const Image& pred, const SoftSkeletonConfig& cfg, double tol = 1e-3);

// Analytic vs central-difference gradient of total_loss w.r.t. pred, tie and
// clamp pixels excluded. gt supplies the soft map; gt > 0.5 the hard mask.
double gradcheck_losses(const Image& pred, const Image& gt, const LossWeights& w,
                        const SoftSkeletonConfig& cfg, double step = 1e-4);

}  // namespace cdsa
