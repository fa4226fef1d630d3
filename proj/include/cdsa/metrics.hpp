#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cdsa/types.hpp"

namespace cdsa {

enum class MetricRegion { global, vessel, non_vessel };

std::string region_name(MetricRegion r);

struct MetricReport {
  std::string name;
  double value = 0.0;
  MetricRegion region = MetricRegion::global;
  bool infinite = false;  // PSNR on identical inputs, reported capped
  std::vector<std::pair<std::string, std::string>> params;
};

inline constexpr double kPsnrCap = 99.0;  // dB sentinel for infinite PSNR

struct DiceIou {
  double dice = 0.0;
  double iou = 0.0;
};

// Both-empty convention: dice = iou = 1.
DiceIou dice_iou(const Mask& pred, const Mask& gt);

// 2 Tprec Tsens / (Tprec + Tsens) over hard skeletons. Empty-skeleton
// conventions: one side empty -> that rate is 0; both empty -> 1.
double hard_cldice(const Mask& pred, const Mask& gt);

// 95th percentile (linear interpolation) of the pooled directed boundary
// distances, scaled by spacing. Boundary = mask pixels with a false
// 4-neighbor (image edge counts as false).
double hd95(const Mask& pred, const Mask& gt, double spacing = 1.0);

// 10 log10(range^2 / MSE); identical images return kPsnrCap with the
// infinite flag set.
double psnr(const Image& a, const Image& b, double data_range, bool* infinite = nullptr);

// Mean local SSIM, 11x11 Gaussian window sigma 1.5, C1=(0.01 r)^2,
// C2=(0.03 r)^2, mirror boundary. Images must be at least 11x11.
double ssim(const Image& a, const Image& b, double data_range);
Image ssim_map(const Image& a, const Image& b, double data_range);

enum class MaskedMetricKind { psnr, ssim };

// PSNR over the region's pixels; SSIM averaged over windows centered in the
// region. The selected region must be nonempty.
MetricReport masked_metric(const Image& a, const Image& b, const Mask& mask,
                           MaskedMetricKind which, MetricRegion region);

// dice((subtracted > threshold), gt).
double threshold_segmentation_dice(const Image& subtracted, const Mask& gt, double threshold);

// 256-bin between-class-variance maximizer over [min, max].
double otsu_threshold(const Image& img);

// Always throws DataError: needs a pretrained perceptual network.
double fid(const Image& a, const Image& b);

std::string metrics_to_json(const std::vector<MetricReport>& reports);

}  // namespace cdsa
