#pragma once

#include "blochpert/oracle.hpp"
#include "blochpert/resonance.hpp"

namespace blochpert::bloch {

/// Predicted eigenfunction expansion around a non-resonant gamma + t:
/// coefficient at gamma + gamma' is (sum_k A_k(gamma')) * b_center with b_center
/// the normalizing value at gamma' = 0.
struct BlochExpansion {
  Vec center;  // gamma + t
  int order = 0;
  std::map<IVec, cd> coefficients;  // gamma' -> predicted b(N, gamma + gamma')
  double b_center = 1.0;

  double coeff_mass() const {
    double s = 0;
    for (auto& [g, c] : coefficients) s += std::norm(c);
    return s;
  }
};

/// First-order correction coefficients q_{gamma_1} / (|x|^2 - |x + gamma_1|^2)
/// over supp(q) cap Gamma(rho^alpha); throws when a denominator collapses
/// (contradicting non-resonance).
std::map<IVec, cd> phi_1(const Vec& center, const potential::FourierPotential& q,
                         const lattice::Lattice& lat, const core::PaperParams& pp);

/// Chain coefficient A_k(gamma') with the shifted energy
/// P(x) = |x|^2 + F_{[p/3]}(x) in the denominators.
cd A_k_coeff(const Vec& center, const IVec& gamma_prime, int k,
             const potential::FourierPotential& q, const lattice::Lattice& lat,
             const core::PaperParams& pp, const core::NumericConfig& cfg);

BlochExpansion predict_expansion(const Vec& center, int order,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg);

struct EigenfunctionError {
  double l2_error = 0;    // || b_oracle - b_predicted ||_2 after phase alignment
  double tail_mass = 0;   // sum_{gamma' != gamma} |b_oracle|^2
};

/// Compares the oracle eigenvector (matched column n) against the predicted
/// expansion, after rotating the global phase so that b(N, gamma) is real
/// positive.
EigenfunctionError eigenfunction_error(const oracle::OracleSpectrum& spec, int n,
                                       const IVec& gamma, const BlochExpansion& expansion);

/// || Psi_N - Phi_{j,beta} || after phase alignment; the Theorem-8 check.
struct ResonanceFunctionError {
  double distance = 0;
  bool truncated = false;
};

ResonanceFunctionError resonance_eigenfunction_error(const oracle::OracleSpectrum& spec,
                                                     const lattice::DeltaGeometry& geom,
                                                     const hill::HillSolveResult& hs, int n,
                                                     long long j, const IVec& beta_coords);

}  // namespace blochpert::bloch
