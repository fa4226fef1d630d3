#include "cdsa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "cdsa/errors.hpp"
#include "cdsa/morphology.hpp"

namespace cdsa {

std::string region_name(MetricRegion r) {
  switch (r) {
    case MetricRegion::global:
      return "global";
    case MetricRegion::vessel:
      return "vessel";
    case MetricRegion::non_vessel:
      return "non_vessel";
  }
  return "global";
}

DiceIou dice_iou(const Mask& pred, const Mask& gt) {
  if (!same_shape(pred, gt)) throw ArgumentError("dice_iou: shape mismatch");
  const double inter = static_cast<double>((pred && gt).count());
  const double p = static_cast<double>(pred.count());
  const double g = static_cast<double>(gt.count());
  if (p == 0.0 && g == 0.0) return {1.0, 1.0};
  DiceIou r;
  r.dice = p + g > 0.0 ? 2.0 * inter / (p + g) : 1.0;
  const double uni = p + g - inter;
  r.iou = uni > 0.0 ? inter / uni : 1.0;
  return r;
}

double hard_cldice(const Mask& pred, const Mask& gt) {
  if (!same_shape(pred, gt)) throw ArgumentError("hard_cldice: shape mismatch");
  const Mask sp = hard_skeleton(pred);
  const Mask sg = hard_skeleton(gt);
  const double np = static_cast<double>(sp.count());
  const double ng = static_cast<double>(sg.count());
  if (np == 0.0 && ng == 0.0) return 1.0;
  const double tprec = np > 0.0 ? static_cast<double>((sp && gt).count()) / np : 0.0;
  const double tsens = ng > 0.0 ? static_cast<double>((sg && pred).count()) / ng : 0.0;
  if (tprec + tsens == 0.0) return 0.0;
  return 2.0 * tprec * tsens / (tprec + tsens);
}

namespace {

Mask boundary_of(const Mask& m) {
  const Index h = m.rows(), w = m.cols();
  Mask b = Mask::Constant(h, w, false);
  auto off = [&](Index i, Index j) {
    return i < 0 || i >= h || j < 0 || j >= w || !m(i, j);
  };
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j)
      if (m(i, j) && (off(i - 1, j) || off(i + 1, j) || off(i, j - 1) || off(i, j + 1)))
        b(i, j) = true;
  return b;
}

double percentile_linear(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

double hd95(const Mask& pred, const Mask& gt, double spacing) {
  if (!same_shape(pred, gt)) throw ArgumentError("hd95: shape mismatch");
  if (!pred.any() || !gt.any()) throw DataError("hd95: undefined on an empty mask");

  const Mask bp = boundary_of(pred);
  const Mask bg = boundary_of(gt);
  const Image sq_to_p = squared_distance_to_true(bp);
  const Image sq_to_g = squared_distance_to_true(bg);

  std::vector<double> pooled;
  for (Index i = 0; i < pred.rows(); ++i)
    for (Index j = 0; j < pred.cols(); ++j) {
      if (bp(i, j)) pooled.push_back(std::sqrt(sq_to_g(i, j)));
      if (bg(i, j)) pooled.push_back(std::sqrt(sq_to_p(i, j)));
    }
  return percentile_linear(pooled, 0.95) * spacing;
}

double psnr(const Image& a, const Image& b, double data_range, bool* infinite) {
  if (!same_shape(a, b)) throw ArgumentError("psnr: shape mismatch");
  if (!(data_range > 0)) throw ArgumentError("psnr: data_range must be > 0");
  const double mse = (a - b).square().mean();
  if (infinite) *infinite = mse == 0.0;
  if (mse == 0.0) return kPsnrCap;
  return 10.0 * std::log10(data_range * data_range / mse);
}

namespace {

constexpr int kSsimRadius = 5;  // 11x11 window

Image ssim_window_filter(const Image& img) {
  const Index h = img.rows(), w = img.cols();
  double kern[2 * kSsimRadius + 1];
  double sum = 0.0;
  for (int t = -kSsimRadius; t <= kSsimRadius; ++t) {
    kern[t + kSsimRadius] = std::exp(-static_cast<double>(t * t) / (2.0 * 1.5 * 1.5));
    sum += kern[t + kSsimRadius];
  }
  for (double& v : kern) v /= sum;

  Image tmp(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        acc += kern[t + kSsimRadius] * img(i, mirror_index(j + t, w));
      tmp(i, j) = acc;
    }
  Image out(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int t = -kSsimRadius; t <= kSsimRadius; ++t)
        acc += kern[t + kSsimRadius] * tmp(mirror_index(i + t, h), j);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace

Image ssim_map(const Image& a, const Image& b, double data_range) {
  if (!same_shape(a, b)) throw ArgumentError("ssim: shape mismatch");
  if (!(data_range > 0)) throw ArgumentError("ssim: data_range must be > 0");
  if (a.rows() < 2 * kSsimRadius + 1 || a.cols() < 2 * kSsimRadius + 1)
    throw ArgumentError("ssim: image smaller than the 11x11 window");

  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);

  const Image mu_a = ssim_window_filter(a);
  const Image mu_b = ssim_window_filter(b);
  const Image var_a = ssim_window_filter(a.square()) - mu_a.square();
  const Image var_b = ssim_window_filter(b.square()) - mu_b.square();
  const Image cov = ssim_window_filter(a * b) - mu_a * mu_b;

  return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
         ((mu_a.square() + mu_b.square() + c1) * (var_a + var_b + c2));
}

double ssim(const Image& a, const Image& b, double data_range) {
  return ssim_map(a, b, data_range).mean();
}

MetricReport masked_metric(const Image& a, const Image& b, const Mask& mask,
                           MaskedMetricKind which, MetricRegion region) {
  if (!same_shape(a, b) || !same_shape(a, mask))
    throw ArgumentError("masked_metric: shape mismatch");
  if (region == MetricRegion::global)
    throw ArgumentError("masked_metric: region must be vessel or non_vessel");
  const Mask sel = region == MetricRegion::vessel ? mask : Mask(!mask);
  const Index n = sel.count();
  if (n == 0)
    throw DataError("masked_metric: empty " + region_name(region) + " region");

  MetricReport r;
  r.region = region;
  if (which == MaskedMetricKind::psnr) {
    r.name = "psnr";
    double acc = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j)
        if (sel(i, j)) {
          const double d = a(i, j) - b(i, j);
          acc += d * d;
        }
    const double mse = acc / static_cast<double>(n);
    r.infinite = mse == 0.0;
    r.value = r.infinite ? kPsnrCap : 10.0 * std::log10(1.0 / mse);
    r.params.emplace_back("data_range", "1");
  } else {
    r.name = "ssim";
    const Image map = ssim_map(a, b, 1.0);
    double acc = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j)
        if (sel(i, j)) acc += map(i, j);
    r.value = acc / static_cast<double>(n);
    r.params.emplace_back("data_range", "1");
    r.params.emplace_back("window", "11");
  }
  return r;
}

double threshold_segmentation_dice(const Image& subtracted, const Mask& gt, double threshold) {
  if (!std::isfinite(threshold))
    throw ArgumentError("threshold_segmentation_dice: threshold must be finite");
  return dice_iou(subtracted > threshold, gt).dice;
}

double otsu_threshold(const Image& img) {
  const double lo = img.minCoeff(), hi = img.maxCoeff();
  if (hi <= lo) return lo;
  constexpr int kBins = 256;
  std::vector<double> hist(kBins, 0.0);
  const double scale = (kBins - 1) / (hi - lo);
  const double* p = img.data();
  for (Index i = 0; i < img.size(); ++i) {
    int bin = static_cast<int>((p[i] - lo) * scale);
    bin = std::clamp(bin, 0, kBins - 1);
    hist[static_cast<std::size_t>(bin)] += 1.0;
  }
  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int t = 0; t < kBins; ++t) sum_all += t * hist[static_cast<std::size_t>(t)];

  double w0 = 0.0, sum0 = 0.0, best_var = -1.0;
  int best_t = 0;
  for (int t = 0; t < kBins; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    sum0 += t * hist[static_cast<std::size_t>(t)];
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return lo + (static_cast<double>(best_t) + 0.5) / scale;
}

double fid(const Image&, const Image&) {
  throw DataError(
      "fid: requires a pretrained perceptual network and is not part of this toolkit");
}

std::string metrics_to_json(const std::vector<MetricReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const MetricReport& r : reports) {
    nlohmann::json obj;
    obj["name"] = r.name;
    obj["value"] = r.value;
    obj["region"] = region_name(r.region);
    obj["infinite"] = r.infinite;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    obj["params"] = params;
    arr.push_back(obj);
  }
  return arr.dump(2);
}

}  // namespace cdsa
