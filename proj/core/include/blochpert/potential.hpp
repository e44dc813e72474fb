#pragma once

#include <map>

#include "blochpert/lattice.hpp"
#include "blochpert/params.hpp"

namespace blochpert::potential {

/// Finite Fourier representation of a real periodic potential:
/// q(x) = sum_gamma q_gamma e^{i(gamma,x)}, keyed by integer dual-basis
/// coordinates.  The zero coefficient is excluded (zero mean) and reality
/// demands q_{-gamma} = conj(q_gamma).
class FourierPotential {
 public:
  using CoeffMap = std::map<IVec, cd>;

  FourierPotential() = default;
  FourierPotential(CoeffMap coeffs, long long declared_s, bool enforce_reality = true);

  const CoeffMap& coeffs() const { return coeffs_; }
  long long declared_s() const { return declared_s_; }
  bool empty() const { return coeffs_.empty(); }

  cd coeff(const IVec& gamma) const {
    auto it = coeffs_.find(gamma);
    return it == coeffs_.end() ? cd(0, 0) : it->second;
  }

  /// Rigorous upper bound sum |q_gamma| for sup|q|.
  double sup_bound() const;

  /// Largest |gamma| over the support.
  double support_radius(const lattice::Lattice& lat) const;

  /// Worst reality defect max |q_{-gamma} - conj(q_gamma)|.
  double reality_defect() const;

  /// q = 2 cos((e_axis, x)) on the given lattice: coefficients 1 at +-e_axis.
  static FourierPotential cosine(int d, int axis, double amplitude = 1.0, long long s = 0);

  /// Sum of potentials (coefficient-wise).
  FourierPotential plus(const FourierPotential& other) const;

 private:
  CoeffMap coeffs_;
  long long declared_s_ = 0;
};

struct TruncationResult {
  FourierPotential truncated;
  double tail_mass = 0;  // sum of |q_gamma| over the removed coefficients
};

/// Restriction of the support to Gamma(rho^alpha) = {0 < |gamma| < rho^alpha},
/// with the removed l1 mass reported.
TruncationResult truncate(const FourierPotential& q, const lattice::Lattice& lat, double rho,
                          double alpha);

/// One-dimensional directional potential Q(zeta) = sum_n q_{n delta} e^{i n zeta}.
struct DirectionalPotential {
  std::map<int, cd> coeffs;  // n -> q_{n delta}

  cd coeff(int n) const {
    auto it = coeffs.find(n);
    return it == coeffs.end() ? cd(0, 0) : it->second;
  }
  double sup_bound() const {
    double s = 0;
    for (auto& [n, c] : coeffs) s += std::abs(c);
    return s;
  }
  int support_radius() const {
    int r = 0;
    for (auto& [n, c] : coeffs) r = std::max(r, std::abs(n));
    return r;
  }
  bool empty() const { return coeffs.empty(); }
};

/// Collects the coefficients of q supported on the line Z delta.
DirectionalPotential directional(const FourierPotential& q, const lattice::DeltaGeometry& geom);

/// q - q^delta as a FourierPotential (the transverse perturbation of section 3).
FourierPotential transverse_part(const FourierPotential& q, const lattice::DeltaGeometry& geom);

/// Plain-text record format: one line per coefficient,
///   m_1 ... m_d re im
/// with %.17g fields (bit-exact round trip).  '#' starts a comment.
void save(const FourierPotential& q, const std::string& path);
FourierPotential load(const std::string& path, int d, long long declared_s,
                      bool enforce_reality = true);

}  // namespace blochpert::potential
