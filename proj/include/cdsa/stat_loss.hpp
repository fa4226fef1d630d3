#pragma once

#include "cdsa/types.hpp"

namespace cdsa {

struct StatLossConfig {
  int window_k = 11;      // odd, >= 3
  double lambda = 1.0;    // mean-term weight
  double epsilon = 1e-6;  // log-domain stability constant

  void validate() const;
};

// Box-filter mean over a k x k window, symmetric-mirror boundary.
Image local_mean(const Image& img, int k);

// local_mean(img^2, k) exactly.
Image local_second_moment(const Image& img, int k);

// E[X^2] - mu^2, clamped at 0 from below.
Image local_variance(const Image& img, int k);

struct StatLossTerms {
  double total = 0.0;          // variance_term + lambda * mean_term
  double variance_term = 0.0;  // sum W |log(var_syn+eps) - log(var_tar+eps)|
  double mean_term = 0.0;      // sum W |mu_syn - mu_tar|
  Index weighted_pixels = 0;
};

StatLossTerms moment_alignment_terms(const Image& i_syn, const Image& i_tar, const Mask& w,
                                     const StatLossConfig& cfg);
double moment_alignment_loss(const Image& i_syn, const Image& i_tar, const Mask& w,
                             const StatLossConfig& cfg);

// d loss / d i_syn.
Image moment_alignment_gradient(const Image& i_syn, const Image& i_tar, const Mask& w,
                                const StatLossConfig& cfg);

// Pixels whose finite difference crosses an absolute-value kink or the
// variance clamp (window arguments within tol of the kink).
Mask stat_loss_kink_mask(const Image& i_syn, const Image& i_tar, const Mask& w,
                         const StatLossConfig& cfg, double tol = 1e-3);

double gradcheck_statloss(const Image& i_syn, const Image& i_tar, const Mask& w,
                          const StatLossConfig& cfg, double step = 1e-4);

}  // namespace cdsa
