#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "blochpert/eigensolver.hpp"
#include "blochpert/potential.hpp"

namespace blochpert::hill {

/// Eigenpair of T_v(Q): -|delta|^2 y'' + Q y = mu y with y(zeta + 2 pi) =
/// e^{2 pi i v} y(zeta).  phi_coeffs[m] is the coefficient of e^{i(m+v) zeta}.
struct HillEigenpair {
  long long j = 0;  // dominant-mode index (falls back to energy order when ambiguous)
  double v = 0;
  double mu = 0;
  std::map<int, cd> phi_coeffs;
  bool ambiguous = false;  // no Fourier mode carries >= 50% of the mass

  cd coeff(int m) const {
    auto it = phi_coeffs.find(m);
    return it == phi_coeffs.end() ? cd(0, 0) : it->second;
  }
};

struct HillSolveResult {
  double v = 0;
  double delta_norm = 0;
  int n_modes = 0;                    // modes m in [-n_modes, n_modes]
  std::vector<HillEigenpair> pairs;   // ascending in mu
  std::map<long long, int> by_j;      // dominant-mode index -> position in `pairs`
  bool any_ambiguous = false;

  const HillEigenpair* find_j(long long j) const {
    auto it = by_j.find(j);
    return it == by_j.end() ? nullptr : &pairs[it->second];
  }
  /// mu_j with the Eq.-(52) fallback |(j+v) delta|^2 when j is outside the table.
  double mu_or_free(long long j) const {
    if (auto* p = find_j(j)) return p->mu;
    return std::pow((double(j) + v) * delta_norm, 2);
  }
};

/// Diagonalizes the truncated T_v(Q) on modes m in [-n_modes, n_modes].
/// Requires n_modes >= 8 + support radius of Q.
HillSolveResult solve_Tv(const potential::DirectionalPotential& Q, double v, double delta_norm,
                         int n_modes);

/// Default truncation for requests up to |j| <= j_max (doubling-validated).
int default_modes(int j_max, const potential::DirectionalPotential& Q, int margin = 16);

/// Gap test for v in W(rho): all pairwise gaps of the computed mu_j(v) below the
/// energy window exceed 2/ln rho.  Throws when the truncation cannot certify the
/// window (demanding a larger n_modes).
bool in_W_rho(const potential::DirectionalPotential& Q, double v, double delta_norm, double rho,
              int j_window);

struct DecayFit {
  double slope = 0;     // log|coeff| vs log|m delta|
  double residual = 0;
  int points = 0;
};

/// Fitted decay exponent of |(phi_{j,v}, e^{i(m+v) zeta})| against |m delta|
/// over a range of m well above the mode index j.
DecayFit fourier_decay_check(const HillEigenpair& pair, double delta_norm, int m_lo, int m_hi);

/// Cache of Hill solves keyed by v rounded to 1e-12.  Fill is mutex-guarded;
/// reads of returned results are safe after the pointer is obtained.
class HillCache {
 public:
  HillCache(potential::DirectionalPotential Q, double delta_norm, int n_modes)
      : Q_(std::move(Q)), delta_norm_(delta_norm), n_modes_(n_modes) {}

  const HillSolveResult& at(double v) const;

  const potential::DirectionalPotential& Q() const { return Q_; }
  double delta_norm() const { return delta_norm_; }
  int n_modes() const { return n_modes_; }

 private:
  potential::DirectionalPotential Q_;
  double delta_norm_ = 1;
  int n_modes_ = 32;
  mutable std::mutex mu_;
  mutable std::map<long long, std::unique_ptr<HillSolveResult>> cache_;
};

}  // namespace blochpert::hill
