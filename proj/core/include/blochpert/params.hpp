#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "blochpert/common.hpp"

namespace blochpert::core {

/// Exponent/parameter system shared by all modules.  Two exponent systems are
/// supported: the main one with q = 3^d + d + 2 used by the eigenvalue
/// asymptotics, and the alternative q = 4*3^d*(d+1) used by the resonance-domain
/// simple sets.  All derived exponents are exact rationals with denominator q.
struct PaperParams {
  int d = 2;        // dimension, >= 2
  long long s = 0;  // smoothness order of the potential
  long long p = 0;  // p = s - d
  long long q_exp = 0;
  // alpha = 1/q_exp, alpha_k = 3^k * alpha.
  long long k1 = 0;  // floor(d/(3 alpha)) + 2
  long long p1 = 0;  // floor(p/3) + 1
  double rho = 0;    // spectral scale
  double eps1 = 0;   // rho^(-d - 2 alpha)

  double alpha() const { return 1.0 / double(q_exp); }
  double alpha_k(int k) const { return std::pow(3.0, k) / double(q_exp); }
  double alpha1() const { return alpha_k(1); }
  double alpha2() const { return alpha_k(2); }

  double rho_pow(double expo) const { return std::pow(rho, expo); }

  /// Main exponent system, q = 3^d + d + 2.
  static PaperParams main_system(int d, long long s, double rho);
  /// Alternative exponent system, q = 4 * 3^d * (d+1), for the resonance simple sets.
  static PaperParams resonance_system(int d, long long s, double rho);

  /// Smallest smoothness the main system's asymptotics are stated for:
  /// s0 = (3d-1)(3^d+d+2)/2 + d 3^d/4 + d + 6, rounded up to an integer.
  static long long s0_main(int d);
  /// Smoothness floor of the resonance-domain system: 6*3^d*(d+1)^2 + d.
  static long long s0_resonance(int d);

  PaperParams with_rho(double new_rho) const {
    PaperParams r = *this;
    r.rho = new_rho;
    r.eps1 = std::pow(new_rho, -double(d) - 2.0 * r.alpha());
    return r;
  }
};

/// One violated inequality of the parameter system, reported symbolically.
struct InequalityViolation {
  int index = 0;  // 1..7
  std::string text;
};

/// Evaluates the seven defining inequalities on exact rationals and returns the
/// violated ones (empty on success).
std::vector<InequalityViolation> validate_params(const PaperParams& params);

/// Throwing variant used by constructors of dependent objects.
void require_valid(const PaperParams& params);

/// Global numeric configuration.  The c_i are the positive constants the
/// formulas leave unpinned; every test that is sensitive to one of them pins its
/// own value through this struct.
struct NumericConfig {
  std::array<double, 24> c;  // c[1]..c[23] used, default 1.0

  double oracle_cutoff_margin = 2.0;  // added to 1.5*rho + support radius
  double eig_tolerance = 1e-8;        // truncation-stability tolerance
  long long mc_samples = 10000;

  // Radius multiplier m of the lattice ball Gamma(m * rho^alpha) scanned when
  // classifying resonances.  Zero means "use p" (the literal choice); desk-scale
  // runs use a small multiplier, which leaves the asymptotics unchanged.
  double slab_ball_mult = 0.0;

  long long bk_cap = 200000;      // refuse B_k index sets larger than this
  int dense_cap = 2200;           // dense eigensolve above this order is refused
  int chain_depth_cap = 9;        // max chain length k in S_k / A_k sums
  int sprime_depth_cap = 6;       // max k in the S'_k sums of E_s
  double sprime_j_cap = 120.0;    // cap on |j delta| of intermediate Hill states
  double f_series_tail_tol = 0.0; // >0: stop the F_s recursion once increments fall below
  int hill_mode_margin = 16;      // extra Fourier modes beyond what indexing needs
  double resonance_band = 0.0;    // >0: restrict window checks of C to |h+t| in [rho-band, rho+band]
  int threads = 1;
  unsigned long long seed = 0x5eedULL;

  NumericConfig() { c.fill(1.0); }

  bool all_positive() const {
    for (int i = 1; i <= 23; ++i)
      if (!(c[i] > 0)) return false;
    return oracle_cutoff_margin > 0 && eig_tolerance > 0 && mc_samples > 0;
  }

  /// Effective radius of the classification ball Gamma(. * rho^alpha).
  double slab_ball_radius(const PaperParams& pp) const {
    double mult = slab_ball_mult > 0 ? slab_ball_mult : double(pp.p);
    return mult * pp.rho_pow(pp.alpha());
  }
};

}  // namespace blochpert::core
