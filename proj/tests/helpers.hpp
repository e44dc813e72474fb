#pragma once

#include "blochpert/domains.hpp"

namespace blochpert::testing {

inline Vec vxy(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline core::NumericConfig desk_cfg() {
  core::NumericConfig cfg;
  cfg.slab_ball_mult = 4.0;
  cfg.chain_depth_cap = 4;  // chain partial sums stay inside the mult-4 ball
  cfg.resonance_band = 8.0;
  return cfg;
}

/// First direction on a deterministic grid whose sphere point classifies as
/// non-resonant (slab-free) at the given width multiplier.
inline Vec nonres_direction(const lattice::Lattice& lat, const core::PaperParams& pp,
                            const core::NumericConfig& cfg, double width_mult = 1.0) {
  for (int i = 0; i < 400; ++i) {
    double th = 0.05 + i * 0.017;
    Vec x = vxy(pp.rho * std::cos(th), pp.rho * std::sin(th));
    if (domains::classify(x, lat, pp, cfg, width_mult).non_resonant()) return x / pp.rho;
  }
  throw numerical_error("nonres_direction: grid exhausted");
}

/// First lattice gamma near the rho-sphere with gamma + t non-resonant.
inline IVec nonres_gamma(const lattice::Lattice& lat, const core::PaperParams& pp,
                         const core::NumericConfig& cfg, const Vec& t, double band = 0.8) {
  const double rho = pp.rho;
  for (int k = 0; k < 4000; ++k) {
    double th = 0.05 + k * 0.013;
    Vec target = vxy(rho * std::cos(th), rho * std::sin(th));
    auto g = lat.gamma_coords(target - t, 0.6);
    if (!g) continue;
    Vec x = lat.gamma(*g) + t;
    if (std::abs(x.norm() - rho) > band) continue;
    if (domains::classify(x, lat, pp, cfg).non_resonant()) return *g;
  }
  throw numerical_error("nonres_gamma: grid exhausted");
}

}  // namespace blochpert::testing
