#pragma once

#include "blochpert/domains.hpp"
#include "blochpert/potential.hpp"

namespace blochpert::nonres {

struct SkOptions {
  bool enforce_floors = true;   // reject denominators at or below rho^{alpha_1}/2
  double hard_floor = 1e-10;    // absolute guard against blowup even when relaxed
};

struct SkEval {
  double value = 0;            // the sum is real for real potentials
  double imag_defect = 0;      // |imaginary part| before discarding
  double min_denominator = std::numeric_limits<double>::max();
  long long chains = 0;        // closed chains accumulated
};

/// S_k(a, x): sum over chains gamma_1..gamma_k in supp(q) cap Gamma(rho^alpha)
/// with nonzero partial sums, of
///   q_{gamma_1}...q_{gamma_k} q_{-gamma_1-...-gamma_k}
///   / prod_j (a - |x - gamma_1 - ... - gamma_j|^2).
/// Throws when a denominator violates the floor, naming the offending chain.
SkEval S_k(double a, const Vec& x, int k, const potential::FourierPotential& q,
           const lattice::Lattice& lat, const core::PaperParams& pp, const SkOptions& opt = {});

/// Computable majorant (sum|q|)^{k+1} (2 / rho^{alpha_1})^k for |S_k|.
double s_k_majorant(int k, const potential::FourierPotential& q, const core::PaperParams& pp);

struct SeriesResult {
  Vec x;
  int order = 0;                  // k: F_0..F_{k-1} available
  std::vector<double> F;          // F[s], s = 0..order-1
  double predicted = 0;           // |x|^2 + F_{order-1}
  double min_denominator = std::numeric_limits<double>::max();
};

/// F_0 = 0, F_s = sum_{k<=s} S_k(|x|^2 + F_{s-1}, x).  The chain length is
/// additionally capped by cfg.chain_depth_cap; with f_series_tail_tol > 0 the
/// recursion stops early once increments fall below the tolerance (remaining
/// entries repeat the converged value).
SeriesResult F_series(const Vec& x, int k_max, const potential::FourierPotential& q,
                      const lattice::Lattice& lat, const core::PaperParams& pp,
                      const core::NumericConfig& cfg, const SkOptions& opt = {});

struct GradCheck {
  Vec grad;            // central differences of F_k
  double max_abs = 0;
  double h = 0;
};

/// Finite-difference gradient of F_k; every stencil point must classify as
/// non-resonant, otherwise throws.
GradCheck grad_F_check(const Vec& x, int k, const potential::FourierPotential& q,
                       const lattice::Lattice& lat, const core::PaperParams& pp,
                       const core::NumericConfig& cfg, double h);

}  // namespace blochpert::nonres
