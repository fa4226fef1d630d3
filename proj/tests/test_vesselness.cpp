#include <doctest.h>

#include <cmath>
#include <vector>

#include "cdsa/errors.hpp"
#include "cdsa/vesselness.hpp"
#include "test_util.hpp"

using namespace cdsa;

namespace {

// dark tube along the rows: intensity dips to (1 - depth) at column `center`
// with a Gaussian cross-profile of the given radius
Image dark_tube(Index h, Index w, double center, double radius, double depth = 0.8) {
  Image img(h, w);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j) {
      const double d = static_cast<double>(j) - center;
      img(i, j) = 1.0 - depth * std::exp(-d * d / (2.0 * radius * radius));
    }
  return img;
}

}  // namespace

TEST_CASE("gaussian kernel is normalized") {
  for (double sigma : {0.7, 1.0, 2.5, 4.0}) {
    const Image k = gaussian_kernel(sigma);
    CHECK(std::abs(k.sum() - 1.0) < 1e-12);
    CHECK(k.cols() == 2 * static_cast<Index>(std::ceil(4.0 * sigma)) + 1);
  }
  CHECK_THROWS_AS(gaussian_kernel(0.0), ArgumentError);
  CHECK_THROWS_AS(gaussian_smooth(Image::Zero(8, 8), -1.0), ArgumentError);
}

TEST_CASE("gaussian smoothing preserves constants") {
  const Image c = Image::Constant(20, 17, 0.37);
  for (double sigma : {1.0, 2.0}) {
    CHECK(testutil::max_abs_diff(gaussian_smooth(c, sigma), c) < 1e-6);
  }
}

TEST_CASE("gaussian smoothing of an impulse matches the dense oracle") {
  Image img = Image::Zero(21, 21);
  img(10, 10) = 1.0;
  const Image fast = gaussian_smooth(img, 1.0);
  const Image slow = testutil::gaussian_smooth_oracle(img, 1.0);
  CHECK(testutil::max_abs_diff(fast, slow) < 1e-10);
}

TEST_CASE("gaussian smoothing on random images matches the dense oracle") {
  SeededRng rng(61);
  const Image img = testutil::random_image(rng, 18, 14);
  for (double sigma : {0.8, 1.5}) {
    CHECK(testutil::max_abs_diff(gaussian_smooth(img, sigma),
                                 testutil::gaussian_smooth_oracle(img, sigma)) < 1e-10);
  }
}

TEST_CASE("gaussian smoothing leaves a linear ramp unchanged in the interior") {
  Image ramp(24, 24);
  for (Index i = 0; i < 24; ++i)
    for (Index j = 0; j < 24; ++j) ramp(i, j) = static_cast<double>(j);
  const Image s = gaussian_smooth(ramp, 1.0);
  const Index r = static_cast<Index>(std::ceil(4.0));
  for (Index i = r; i < 24 - r; ++i)
    for (Index j = r; j < 24 - r; ++j)
      CHECK(std::abs(s(i, j) - ramp(i, j)) < 1e-6);
}

TEST_CASE("hessian of a constant image is zero") {
  const HessianField h = hessian_at_scale(Image::Constant(20, 20, 0.5), 1.0);
  CHECK((h.hxx == 0.0).all());
  CHECK((h.hxy == 0.0).all());
  CHECK((h.hyy == 0.0).all());
  CHECK(h.border == 5);
}

TEST_CASE("hessian of x^2 recovers the scale-normalized second derivative") {
  // I(x,y) = x^2 in pixel units; smoothing preserves the second derivative
  const Index n = 48;
  Image img(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) img(i, j) = static_cast<double>(j * j);
  const double sigma = 2.0;
  const HessianField h = hessian_at_scale(img, sigma, 2.0);
  const Index b = h.border + 1;
  for (Index i = b; i < n - b; ++i)
    for (Index j = b; j < n - b; ++j) {
      CHECK(std::abs(h.hxx(i, j) - 2.0 * sigma * sigma) < 1e-3);
      CHECK(std::abs(h.hxy(i, j)) < 1e-6);
      CHECK(std::abs(h.hyy(i, j)) < 1e-6);
    }
}

TEST_CASE("hessian transposes with the image") {
  SeededRng rng(62);
  const Image img = testutil::random_image(rng, 20, 20);
  const Image imgT = img.transpose();
  const HessianField a = hessian_at_scale(img, 1.0);
  const HessianField b = hessian_at_scale(imgT, 1.0);
  // transposing swaps the separable pass order, so agreement is to fp
  // associativity, not bitwise
  CHECK(testutil::max_abs_diff(a.hxx, Image(b.hyy.transpose())) < 1e-12);
  CHECK(testutil::max_abs_diff(a.hyy, Image(b.hxx.transpose())) < 1e-12);
  CHECK(testutil::max_abs_diff(a.hxy, Image(b.hxy.transpose())) < 1e-12);
}

TEST_CASE("hessian rejects images smaller than the kernel support") {
  CHECK_THROWS_AS(hessian_at_scale(Image::Zero(7, 7), 1.0), ArgumentError);
}

TEST_CASE("2x2 symmetric eigenvalues, closed form") {
  auto [a0, b0] = eig2x2_symmetric(0, 0, 0);
  CHECK(a0 == 0.0);
  CHECK(b0 == 0.0);

  auto [a1, b1] = eig2x2_symmetric(2, 0, 1);
  CHECK(a1 == doctest::Approx(1.0));
  CHECK(b1 == doctest::Approx(2.0));

  auto [a2, b2] = eig2x2_symmetric(1, 1, 1);
  CHECK(a2 == doctest::Approx(0.0));
  CHECK(b2 == doctest::Approx(2.0));

  // ordering is by magnitude
  auto [a3, b3] = eig2x2_symmetric(-3, 0, 1);
  CHECK(a3 == doctest::Approx(1.0));
  CHECK(b3 == doctest::Approx(-3.0));
}

TEST_CASE("frangi vesselness closed form and polarity gate") {
  // lambda1 = 0, lambda2 = t > 0, c = t: V = 1 - exp(-1/2)
  const double t = 0.7;
  const double v = frangi_vesselness(0.0, t, 0.5, t, VesselPolarity::dark_vessels);
  CHECK(v == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.39347).epsilon(1e-4));

  // bright blob under dark polarity is gated off
  CHECK(frangi_vesselness(0.1, -2.0, 0.5, 1.0, VesselPolarity::dark_vessels) == 0.0);
  CHECK(frangi_vesselness(0.1, 2.0, 0.5, 1.0, VesselPolarity::bright_vessels) == 0.0);
  // zero lambda2 gives zero response
  CHECK(frangi_vesselness(0.0, 0.0, 0.5, 1.0, VesselPolarity::dark_vessels) == 0.0);
}

TEST_CASE("frangi response on an all-zero hessian is zero") {
  HessianField h;
  h.hxx = Image::Zero(16, 16);
  h.hxy = Image::Zero(16, 16);
  h.hyy = Image::Zero(16, 16);
  h.border = 2;
  ScaleSpaceConfig cfg;
  CHECK((frangi_response(h, cfg) == 0.0).all());
}

TEST_CASE("config validation") {
  ScaleSpaceConfig cfg;
  cfg.sigmas = {2.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.sigmas = {};
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.sigmas = {1.0};
  cfg.beta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg.beta = 0.5;
  cfg.c = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("prior of a constant image is zero; singleton sigma equals the response") {
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 2.0};
  const Image flat = Image::Constant(32, 32, 0.6);
  CHECK((integrated_geometric_prior(flat, cfg) == 0.0).all());

  SeededRng rng(63);
  const Image img = testutil::random_image(rng, 32, 32);
  ScaleSpaceConfig single;
  single.sigmas = {1.5};
  const Image prior = integrated_geometric_prior(img, single);
  const Image resp = frangi_response(hessian_at_scale(img, 1.5, single.gamma_norm), single);
  CHECK(testutil::max_abs_diff(prior, resp) == 0.0);
}

TEST_CASE("prior is in [0,1) and zero on the boundary ring") {
  SeededRng rng(64);
  const Image img = testutil::random_image(rng, 40, 40);
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 2.0};
  const Image prior = integrated_geometric_prior(img, cfg);
  CHECK((prior >= 0.0).all());
  CHECK((prior < 1.0).all());
  const Index b = static_cast<Index>(std::ceil(4.0)) + 1;  // smallest sigma's ring
  CHECK((prior.topRows(b) == 0.0).all());
  CHECK((prior.leftCols(b) == 0.0).all());
}

TEST_CASE("prior argmax follows a dark tube centerline") {
  const Index n = 64;
  const double center = 31.0;
  const Image img = dark_tube(n, n, center, 3.0);
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 1.5, 2.0, 3.0, 4.0};
  const Image prior = integrated_geometric_prior(img, cfg);
  const Index border = static_cast<Index>(std::ceil(4.0 * 4.0)) + 2;
  int hits = 0, rows = 0;
  for (Index i = border; i < n - border; ++i) {
    Index best_j = 0;
    double best = -1.0;
    for (Index j = 0; j < n; ++j)
      if (prior(i, j) > best) {
        best = prior(i, j);
        best_j = j;
      }
    ++rows;
    if (std::abs(static_cast<double>(best_j) - center) <= 1.0) ++hits;
  }
  CHECK(rows > 0);
  CHECK(hits == rows);
}

TEST_CASE("polarity flip on a negated image gives the identical prior") {
  const Image img = dark_tube(48, 48, 23.0, 2.5);
  const Image neg = -img;
  ScaleSpaceConfig dark;
  dark.sigmas = {1.0, 2.0, 3.0};
  ScaleSpaceConfig bright = dark;
  bright.polarity = VesselPolarity::bright_vessels;
  CHECK(testutil::max_abs_diff(integrated_geometric_prior(img, dark),
                               integrated_geometric_prior(neg, bright)) < 1e-6);
}

TEST_CASE("prior rotates with a 90-degree image rotation") {
  const Image img = dark_tube(48, 48, 21.0, 2.0);
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 2.0};
  const Image prior = integrated_geometric_prior(img, cfg);

  // rotate 90 degrees counterclockwise: (i,j) -> (n-1-j, i)
  const Index n = 48;
  Image rotated(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) rotated(n - 1 - j, i) = img(i, j);
  const Image prior_rot = integrated_geometric_prior(rotated, cfg);

  Image expected(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) expected(n - 1 - j, i) = prior(i, j);
  // the grid maps to itself so there is no resampling error; the residual is
  // separable-pass summation order only
  CHECK(testutil::max_abs_diff(prior_rot, expected) < 1e-12);
}

TEST_CASE("scale selection is nondecreasing in tube radius") {
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  const Index n = 112;
  double prev_sigma = 0.0;
  for (double radius : {2.0, 3.0, 4.0}) {
    const Image img = dark_tube(n, n, 55.0, radius);
    double best_resp = -1.0, best_sigma = 0.0;
    for (double sigma : cfg.sigmas) {
      ScaleSpaceConfig one = cfg;
      one.sigmas = {sigma};
      const Image resp = integrated_geometric_prior(img, one);
      // centerline response away from every sigma's border
      double acc = 0.0;
      int cnt = 0;
      for (Index i = 26; i < n - 26; ++i) {
        acc += resp(i, 55);
        ++cnt;
      }
      const double mean_resp = acc / cnt;
      if (mean_resp > best_resp) {
        best_resp = mean_resp;
        best_sigma = sigma;
      }
    }
    CHECK(best_sigma >= prev_sigma);
    prev_sigma = best_sigma;
  }
}

TEST_CASE("multi-threaded prior matches single-threaded bit for bit") {
  SeededRng rng(65);
  const Image img = testutil::random_image(rng, 48, 48);
  ScaleSpaceConfig cfg;
  cfg.sigmas = {1.0, 1.5, 2.0, 3.0};
  const Image a = integrated_geometric_prior(img, cfg, 1);
  const Image b = integrated_geometric_prior(img, cfg, 4);
  CHECK((a == b).all());
}
