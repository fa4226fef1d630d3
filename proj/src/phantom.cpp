#include "cdsa/phantom.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "cdsa/errors.hpp"
#include "cdsa/morphology.hpp"
#include "cdsa/rng.hpp"

namespace cdsa {

void PhantomConfig::validate() const {
  if (root_width < 2) throw ArgumentError("phantom: root_width must be >= 2");
  if (!(width_decay > 0 && width_decay < 1))
    throw ArgumentError("phantom: width_decay must be in (0,1)");
  if (tree_depth < 1) throw ArgumentError("phantom: tree_depth must be >= 1");
  if (image_size < 32) throw ArgumentError("phantom: image_size must be >= 32");
}

namespace {

struct Segment {
  double y0, x0, y1, x1;
  int level;
};

// clipped DDA rasterization; 8-connected polyline
void rasterize(Mask& m, const Segment& s) {
  const double dy = s.y1 - s.y0, dx = s.x1 - s.x0;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dy), std::abs(dx)))));
  for (int t = 0; t <= steps; ++t) {
    const double f = static_cast<double>(t) / steps;
    const Index y = static_cast<Index>(std::lround(s.y0 + f * dy));
    const Index x = static_cast<Index>(std::lround(s.x0 + f * dx));
    if (y >= 0 && y < m.rows() && x >= 0 && x < m.cols()) m(y, x) = true;
  }
}

void grow(std::vector<Segment>& out, SeededRng& rng, double y, double x, double angle,
          double length, int level, int depth) {
  if (level >= depth) return;
  const double y1 = y + length * std::sin(angle);
  const double x1 = x + length * std::cos(angle);
  out.push_back({y, x, y1, x1, level});
  const double spread = 0.25 + 0.35 * rng.next_uniform();
  const double jitter_l = 0.70 + 0.15 * rng.next_uniform();
  const double jitter_r = 0.70 + 0.15 * rng.next_uniform();
  grow(out, rng, y1, x1, angle - spread, length * jitter_l, level + 1, depth);
  grow(out, rng, y1, x1, angle + spread, length * jitter_r, level + 1, depth);
}

Image make_background(const PhantomConfig& cfg, SeededRng& rng) {
  const Index n = cfg.image_size;
  Image bg(n, n);
  switch (cfg.background_style) {
    case BackgroundStyle::flat:
      bg.setConstant(0.7);
      break;
    case BackgroundStyle::gradient: {
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          bg(i, j) = 0.55 + 0.30 * static_cast<double>(j) / static_cast<double>(n - 1);
      break;
    }
    case BackgroundStyle::rib_bands: {
      // low-frequency diagonal bands, a stand-in for overlapping skeletal shadows
      const double theta = 0.3 + 0.2 * rng.next_uniform();
      const double period = static_cast<double>(n) / (3.0 + 2.0 * rng.next_uniform());
      const double cs = std::cos(theta), sn = std::sin(theta);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const double u = (cs * static_cast<double>(i) + sn * static_cast<double>(j)) / period;
          bg(i, j) = 0.70 + 0.12 * std::sin(2.0 * std::numbers::pi * u);
        }
      break;
    }
  }
  return bg;
}

}  // namespace

Phantom generate_phantom(const PhantomConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);
  const Index n = cfg.image_size;

  Phantom ph;
  ph.angiogram_bg = make_background(cfg, rng);

  std::vector<Segment> segments;
  const double start_y = 0.08 * static_cast<double>(n);
  const double start_x = 0.5 * static_cast<double>(n) +
                         (rng.next_uniform() - 0.5) * 0.1 * static_cast<double>(n);
  const double start_angle =
      0.5 * std::numbers::pi + (rng.next_uniform() - 0.5) * 0.3;  // roughly downward
  const double root_length = 0.30 * static_cast<double>(n);
  grow(segments, rng, start_y, start_x, start_angle, root_length, 0, cfg.tree_depth);

  ph.centerline = Mask::Constant(n, n, false);
  ph.vessel_mask = Mask::Constant(n, n, false);
  for (int level = 0; level < cfg.tree_depth; ++level) {
    Mask level_lines = Mask::Constant(n, n, false);
    bool any = false;
    for (const Segment& s : segments)
      if (s.level == level) {
        rasterize(level_lines, s);
        any = true;
      }
    if (!any) continue;
    ph.centerline = ph.centerline || level_lines;
    const double width = cfg.root_width * std::pow(cfg.width_decay, level);
    const double half = std::max(0.0, (width - 1.0) / 2.0);
    ph.vessel_mask = ph.vessel_mask || dilate(level_lines, half);
  }
  return ph;
}

}  // namespace cdsa
