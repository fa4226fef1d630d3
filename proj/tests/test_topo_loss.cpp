#include <doctest.h>

#include <cmath>

#include "cdsa/errors.hpp"
#include "cdsa/morphology.hpp"
#include "cdsa/topo_loss.hpp"
#include "test_util.hpp"

using namespace cdsa;

namespace {

Mask bar_mask(Index h, Index w, Index r0, Index r1, Index c0, Index c1) {
  Mask m = Mask::Constant(h, w, false);
  for (Index i = r0; i <= r1; ++i)
    for (Index j = c0; j <= c1; ++j) m(i, j) = true;
  return m;
}

// random soft map kept away from the exact-tie plateaus of binary images
Image soft_random(SeededRng& rng, Index h, Index w) {
  return testutil::random_image(rng, h, w, 0.05, 0.95);
}

}  // namespace

TEST_CASE("soft dice: frozen values") {
  // perfect overlap of a 100-pixel mask, smoothing keeps it exactly 0
  const Mask m = bar_mask(12, 12, 1, 10, 1, 10);  // 100 px
  REQUIRE(m.count() == 100);
  const Image mi = to_image(m);
  CHECK(soft_dice_loss(mi, mi) == 0.0);

  // pred = 0 against 50 true pixels: 1 - 1/51
  const Mask g50 = bar_mask(10, 10, 0, 4, 0, 9);  // 50 px
  REQUIRE(g50.count() == 50);
  CHECK(soft_dice_loss(Image::Zero(10, 10), to_image(g50)) ==
        doctest::Approx(1.0 - 1.0 / 51.0).epsilon(1e-12));

  // two disjoint 10-pixel masks: 1 - 1/21
  const Mask a = bar_mask(10, 10, 0, 0, 0, 9);
  const Mask b = bar_mask(10, 10, 5, 5, 0, 9);
  CHECK(soft_dice_loss(to_image(a), to_image(b)) ==
        doctest::Approx(1.0 - 1.0 / 21.0).epsilon(1e-12));

  CHECK_THROWS_AS(soft_dice_loss(Image::Zero(3, 3), Image::Zero(4, 3)), ArgumentError);
}

TEST_CASE("bce: frozen values and scalar oracle") {
  SeededRng rng(91);
  const Mask gt = testutil::random_mask(rng, 6, 6);
  CHECK(bce_loss(Image::Constant(6, 6, 0.5), gt) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // confidently correct prediction at the clamp bounds
  Image conf(6, 6);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 6; ++j) conf(i, j) = gt(i, j) ? 1.0 : 0.0;
  CHECK(bce_loss(conf, gt) < 1e-5);

  const Image pred = testutil::random_image(rng, 4, 4, 0.01, 0.99);
  const Mask g4 = testutil::random_mask(rng, 4, 4);
  double oracle = 0.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      const double p = std::min(1.0 - 1e-7, std::max(1e-7, pred(i, j)));
      oracle += g4(i, j) ? -std::log(p) : -std::log(1.0 - p);
    }
  oracle /= 16.0;
  CHECK(bce_loss(pred, g4) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("loss bounds: dice/clDice in [0,1], bce below the clamp ceiling") {
  SeededRng rng(92);
  SoftSkeletonConfig cfg{3};
  for (int t = 0; t < 5; ++t) {
    const Image pred = testutil::random_image(rng, 10, 10);
    const Image gt = testutil::random_image(rng, 10, 10);
    const Mask gm = testutil::random_mask(rng, 10, 10);
    const double d = soft_dice_loss(pred, gt);
    const double c = soft_cldice_loss(pred, gt, cfg);
    const double b = bce_loss(pred, gm);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    CHECK(b >= 0.0);
    CHECK(b <= -std::log(1e-7));  // ~16.12, the documented clamp ceiling
  }
}

TEST_CASE("soft skeleton: zero input, isolated pixel, value range") {
  SoftSkeletonConfig cfg{3};
  CHECK((soft_skeleton(Image::Zero(9, 9), cfg) == 0.0).all());

  Image point = Image::Zero(9, 9);
  point(4, 4) = 1.0;
  const Image s = soft_skeleton(point, cfg);
  CHECK(s(4, 4) == 1.0);
  CHECK(s.sum() == 1.0);

  SeededRng rng(93);
  const Image soft = testutil::random_image(rng, 12, 12);
  const Image sk = soft_skeleton(soft, cfg);
  CHECK((sk >= 0.0).all());
  CHECK((sk <= 1.0).all());
}

TEST_CASE("soft skeleton of a binary bar stays inside and near the hard skeleton") {
  const Mask bar = bar_mask(15, 40, 5, 9, 4, 35);
  SoftSkeletonConfig cfg{5};
  const Image s = soft_skeleton(to_image(bar), cfg);

  // support inside the input support
  for (Index i = 0; i < 15; ++i)
    for (Index j = 0; j < 40; ++j)
      if (s(i, j) > 0.0) CHECK(bar(i, j));

  const Mask hard = hard_skeleton(bar);
  const Image hard_dist = distance_transform(!hard);  // distance to the hard skeleton
  double worst = 0.0;
  for (Index i = 0; i < 15; ++i)
    for (Index j = 0; j < 40; ++j)
      if (s(i, j) > 0.5) worst = std::max(worst, hard_dist(i, j));
  CHECK(worst <= 1.0);
}

TEST_CASE("soft clDice: identical binary tubes give zero loss") {
  const Mask tube = bar_mask(15, 30, 6, 8, 3, 26);
  SoftSkeletonConfig cfg{4};
  CHECK(soft_cldice_loss(to_image(tube), to_image(tube), cfg) < 1e-6);
}

TEST_CASE("soft clDice: disjoint blobs give loss above 0.9") {
  const Mask a = bar_mask(40, 40, 2, 8, 2, 37);
  const Mask b = bar_mask(40, 40, 25, 31, 2, 37);
  SoftSkeletonConfig cfg{4};
  CHECK(soft_cldice_loss(to_image(a), to_image(b), cfg) > 0.9);
}

TEST_CASE("soft clDice: a broken thin vessel costs more than the intact one") {
  const Mask gt = bar_mask(13, 36, 5, 7, 2, 33);
  Mask gapped = gt;
  for (Index i = 5; i <= 7; ++i)
    for (Index j = 17; j <= 18; ++j) gapped(i, j) = false;  // 2-px gap
  SoftSkeletonConfig cfg{4};
  const double intact = soft_cldice_loss(to_image(gt), to_image(gt), cfg);
  const double broken = soft_cldice_loss(to_image(gapped), to_image(gt), cfg);
  CHECK(broken > intact);
}

TEST_CASE("topology sensitivity: breaking a thin tube outweighs shaving a thick interior") {
  // two-tube phantom; remove the same pixel count either as a thin-tube break
  // or as an off-centerline pocket in the thick tube
  const Index h = 30, w = 40;
  Mask gt = Mask::Constant(h, w, false);
  for (Index i = 3; i <= 11; ++i)
    for (Index j = 3; j <= 36; ++j) gt(i, j) = true;  // thick tube, 9 wide
  for (Index i = 19; i <= 21; ++i)
    for (Index j = 3; j <= 36; ++j) gt(i, j) = true;  // thin tube, 3 wide

  Mask broken = gt;
  for (Index i = 19; i <= 21; ++i)
    for (Index j = 18; j <= 20; ++j) broken(i, j) = false;  // 9 px, disconnects

  Mask shaved = gt;
  for (Index i = 4; i <= 6; ++i)
    for (Index j = 18; j <= 20; ++j) shaved(i, j) = false;  // 9 px, off the centerline

  SoftSkeletonConfig cfg{5};
  const Image gts = to_image(gt);
  const double dice_broken = soft_dice_loss(to_image(broken), gts);
  const double dice_shaved = soft_dice_loss(to_image(shaved), gts);
  CHECK(dice_broken == doctest::Approx(dice_shaved).epsilon(1e-12));  // same bulk

  const double cl_broken = soft_cldice_loss(to_image(broken), gts, cfg);
  const double cl_shaved = soft_cldice_loss(to_image(shaved), gts, cfg);
  CHECK(cl_broken > cl_shaved);
}

TEST_CASE("total loss: projections, zero weights, component sum, linearity") {
  SeededRng rng(94);
  const Image pred = soft_random(rng, 10, 10);
  const Image gt = soft_random(rng, 10, 10);
  const Mask gm = gt > 0.5;
  SoftSkeletonConfig cfg{2};

  CHECK(total_loss(pred, gt, gm, {1, 0, 0}, cfg) == soft_dice_loss(pred, gt));
  CHECK(total_loss(pred, gt, gm, {0, 0, 0}, cfg) == 0.0);

  const double sum = soft_dice_loss(pred, gt) + bce_loss(pred, gm) +
                     soft_cldice_loss(pred, gt, cfg);
  CHECK(std::abs(total_loss(pred, gt, gm, {1, 1, 1}, cfg) - sum) < 1e-12);

  const double base = total_loss(pred, gt, gm, {0.3, 1.1, 0.7}, cfg);
  const double scaled = total_loss(pred, gt, gm, {3.0 * 0.3, 3.0 * 1.1, 3.0 * 0.7}, cfg);
  CHECK(scaled == doctest::Approx(3.0 * base).epsilon(1e-12));

  CHECK_THROWS_AS(total_loss(pred, gt, gm, {-1, 0, 0}, cfg), ArgumentError);
}

TEST_CASE("gradcheck: pure BCE is accurate at every pixel") {
  SeededRng rng(95);
  const Image pred = soft_random(rng, 12, 12);
  const Image gt = testutil::random_image(rng, 12, 12);
  SoftSkeletonConfig cfg{2};
  CHECK(gradcheck_losses(pred, gt, {0, 1, 0}, cfg) < 1e-6);
}

TEST_CASE("gradcheck: pure dice") {
  SeededRng rng(96);
  const Image pred = soft_random(rng, 12, 12);
  const Image gt = soft_random(rng, 12, 12);
  SoftSkeletonConfig cfg{2};
  CHECK(gradcheck_losses(pred, gt, {1, 0, 0}, cfg) < 1e-5);
}

TEST_CASE("gradcheck: full objective on non-tied pixels, seed 7") {
  SeededRng rng(7);
  const Image pred = soft_random(rng, 16, 16);
  const Image gt = soft_random(rng, 16, 16);
  SoftSkeletonConfig cfg{2};
  CHECK(gradcheck_losses(pred, gt, {1, 1, 1}, cfg) < 1e-2);
}

TEST_CASE("gradcheck: five seeds of the full objective") {
  SoftSkeletonConfig cfg{2};
  for (std::uint64_t seed : {101u, 102u, 103u, 104u, 105u}) {
    SeededRng rng(seed);
    const Image pred = soft_random(rng, 12, 12);
    const Image gt = soft_random(rng, 12, 12);
    CHECK(gradcheck_losses(pred, gt, {1, 1, 1}, cfg) < 1e-2);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SoftSkeletonConfig{0}.validate(), ArgumentError);
  SoftSkeletonConfig ok{1};
  CHECK_NOTHROW(ok.validate());
}
