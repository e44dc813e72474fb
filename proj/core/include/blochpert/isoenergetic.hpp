#pragma once

#include "blochpert/bloch.hpp"

namespace blochpert::iso {

struct SimpleSetVerdict {
  Vec x;
  bool member = false;
  std::string failed_condition;  // populated whenever member is false

  static SimpleSetVerdict fail(const Vec& x, std::string why) {
    return {x, false, std::move(why)};
  }
  static SimpleSetVerdict ok(const Vec& x) { return {x, true, {}}; }
};

/// Known part F(x) = |x|^2 + F_{k1-1}(x) of the non-resonance eigenvalue.
double known_part_F(const Vec& x, const potential::FourierPotential& q,
                    const lattice::Lattice& lat, const core::PaperParams& pp,
                    const core::NumericConfig& cfg);

/// Simple-set membership: builds the competitor set K around F(gamma+t) and
/// checks both simplicity conditions (non-resonant competitors against their
/// known parts, resonant ones against the eigenvalues of their C matrix).
SimpleSetVerdict in_simple_set_B(const Vec& x, const Vec& t,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg);

/// Resonance-domain simple set membership (run under the q = 4*3^d(d+1)
/// exponent system): v(beta) in W(rho) plus the two gap conditions on
/// E(lambda_{j,beta}) = lambda_{j,beta} + E_{k2-1}.
SimpleSetVerdict in_simple_set_B_delta(const Vec& x, const Vec& t,
                                       const lattice::DeltaGeometry& geom,
                                       const potential::FourierPotential& q,
                                       const lattice::Lattice& lat,
                                       const core::PaperParams& pp6,
                                       const core::NumericConfig& cfg);

/// Root of F(s * direction) = rho^2 along a ray; the crossing must classify as
/// non-resonant at `width_mult` times the slab width (2 for the approximated
/// isoenergetic surface itself, 1 when only slab avoidance matters).
Vec surface_root_F(const Vec& direction, double rho, const potential::FourierPotential& q,
                   const lattice::Lattice& lat, const core::PaperParams& pp,
                   const core::NumericConfig& cfg, double width_mult = 2.0);

struct IsoPoint {
  Vec a, b;       // search segment {a + s b : s in [-1, 1]}
  Vec root;       // quasimomentum with Lambda(root) = rho^2
  double residual = 0;
  double nearest_other = 0;  // distance to the nearest other oracle eigenvalue
  int bisections = 0;
};

/// Bethe-Sommerfeld point: bisection of the matched oracle eigenvalue along a
/// short segment through the S_rho crossing (endpoints +- eps1/(7 rho)).
IsoPoint find_isoenergetic_point(const Vec& direction, double rho,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg);

struct PruneOutcome {
  long long total = 0;
  long long retained = 0;
  std::vector<std::string> removal_reasons;  // one entry per removed sample
  double retained_fraction() const { return total ? double(retained) / double(total) : 0.0; }
};

/// Marks S_rho samples removed by some P_b (near-coincidence of F(x) and
/// F(x+b)) or by the translated resonant set A(rho).
PruneOutcome prune_P_b_and_A(const std::vector<Vec>& samples,
                             const potential::FourierPotential& q, const lattice::Lattice& lat,
                             const core::PaperParams& pp, const core::NumericConfig& cfg);

struct McMeasure {
  BinomialCI ci;
  long long evaluated = 0;
  std::map<std::string, long long> rejection_counts;
};

/// Monte Carlo fraction of V_delta(rho^alpha_1) samples that lie in B_delta.
McMeasure mc_measure_B_delta(const lattice::DeltaGeometry& geom,
                             const potential::FourierPotential& q, const lattice::Lattice& lat,
                             const core::PaperParams& pp6, const core::NumericConfig& cfg,
                             long long n_samples, unsigned long long seed);

/// Uniform sample of the slab V_delta(rho^alpha_1) inside the shell.
Vec sample_V_delta(const lattice::DeltaGeometry& geom, double rho, double width,
                   std::mt19937_64& rng);

}  // namespace blochpert::iso
