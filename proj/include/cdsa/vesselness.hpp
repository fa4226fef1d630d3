#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cdsa/types.hpp"

namespace cdsa {

enum class VesselPolarity { dark_vessels, bright_vessels };

struct ScaleSpaceConfig {
  std::vector<double> sigmas{1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  double beta = 0.5;
  std::optional<double> c;  // empty = auto: half the max structureness S at each scale
  VesselPolarity polarity = VesselPolarity::dark_vessels;
  double gamma_norm = 2.0;

  void validate() const;  // throws ArgumentError
};

// Scale-normalized second derivatives; the boundary ring of width `border`
// is excluded from downstream scale maxima.
struct HessianField {
  Image hxx, hxy, hyy;
  Index border = 0;
};

// Separable convolution with a normalized Gaussian truncated at radius
// ceil(4*sigma), symmetric-mirror boundary.
Image gaussian_smooth(const Image& img, double sigma);

Image gaussian_kernel(double sigma);  // 1 x (2r+1), weights sum to 1

HessianField hessian_at_scale(const Image& img, double sigma, double gamma_norm = 2.0);

// Eigenvalues of [[hxx, hxy], [hxy, hyy]] ordered |l1| <= |l2|.
std::pair<double, double> eig2x2_symmetric(double hxx, double hxy, double hyy);

// Per-pixel tubularity: 0 if the polarity gate fails, else
// exp(-Rb^2/(2 beta^2)) * (1 - exp(-S^2/(2 c^2))).
double frangi_vesselness(double lambda1, double lambda2, double beta, double c,
                         VesselPolarity polarity);

Image frangi_response(const HessianField& h, const ScaleSpaceConfig& cfg);

// Geometric prior: per-pixel maximum of the tubularity response over
// cfg.sigmas; per-scale boundary rings are zeroed. Per-scale work may be
// spread over `threads`; the scale reduction order is fixed.
Image integrated_geometric_prior(const Image& img, const ScaleSpaceConfig& cfg,
                                 int threads = 1);

}  // namespace cdsa
