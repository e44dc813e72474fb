#pragma once

#include <optional>

#include "blochpert/common.hpp"

namespace blochpert::lattice {

/// A full-rank lattice Omega together with its dual Gamma.
/// Rows of `basis` are the generators omega_i; rows of `dual` are the gamma_i,
/// paired so that (gamma_i, omega_j) = 2 pi delta_ij.
class Lattice {
 public:
  Lattice() = default;

  /// Builds the dual basis from the given generators.  Throws on a singular basis.
  static Lattice from_basis(const Mat& basis);

  /// d x d identity lattice scaled by 2 pi: Omega = 2 pi Z^d, Gamma = Z^d.
  static Lattice cubic(int d, double scale = 2.0 * M_PI);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const Mat& dual() const { return dual_; }

  /// Volume of the fundamental domain of Omega.
  double cell_volume() const { return std::abs(basis_.determinant()); }

  /// Copy rescaled so that the fundamental domain has measure 1; `scale` receives
  /// the factor applied to the generators (eigenvalues scale by scale^-2).
  Lattice normalized(double* scale = nullptr) const;

  Vec gamma(const IVec& coords) const;
  Vec omega(const IVec& coords) const;

  /// Integer coordinates of x w.r.t. the dual basis; nullopt if x is not in Gamma
  /// within `tol`.
  std::optional<IVec> gamma_coords(const Vec& x, double tol = 1e-9) const;

  /// Real coordinates of x w.r.t. the dual basis: x = sum c_i gamma_i.
  Vec dual_coords(const Vec& x) const;

  /// Splits x = gamma + t with gamma in Gamma and t in the half-open fundamental
  /// domain F* spanned by the dual basis.
  void split(const Vec& x, IVec& gamma_out, Vec& t_out) const;

  /// All gamma in Gamma with 0 < |gamma| < radius, by exhaustive integer scan.
  std::vector<IVec> points_in_ball(double radius) const;

  /// Worst pairing defect max_ij |(gamma_i, omega_j) - 2 pi delta_ij|.
  double pairing_defect() const;

 private:
  Mat basis_;  // rows: omega_i
  Mat dual_;   // rows: gamma_i
};

/// Geometry of the sublattices attached to a maximal dual vector delta:
/// Omega_delta = {h in Omega : (h,delta)=0}, its dual Gamma_delta inside the
/// hyperplane H_delta, and delta* in Omega with (delta*,delta) = 2 pi.
struct DeltaGeometry {
  Lattice lattice;
  IVec delta_coords;       // delta in the dual basis
  Vec delta;               // the vector itself
  double delta_norm2 = 0;  // |delta|^2
  Vec delta_star;          // in Omega, (delta*, delta) = 2 pi
  Mat omega_delta;         // rows: basis of Omega_delta ((d-1) x d)
  Mat gamma_delta;         // rows: basis of Gamma_delta ((d-1) x d)
  double d_delta = 0;      // diameter of the fundamental domain F_delta

  int dim() const { return lattice.dim(); }

  Vec beta(const IVec& coords) const;             // element of Gamma_delta
  Vec gamma_delta_coords(const Vec& u) const;     // real coords of u in the Gamma_delta basis
  std::optional<IVec> beta_coords(const Vec& u, double tol = 1e-9) const;

  /// Splits a vector u of H_delta into a + tau with a in Gamma_delta, tau in F_delta.
  void split_perp(const Vec& u, IVec& a_out, Vec& tau_out) const;
};

/// Decomposition t = a + tau + |delta|^-2 (t,delta) delta of a quasimomentum.
struct AxialDecomposition {
  IVec a;        // Gamma_delta coordinates
  Vec a_vec;
  Vec tau;       // in F_delta
  double axial;  // |delta|^-2 (t, delta)
};

/// Decomposition x = beta + tau + (j + v) delta with beta in Gamma_delta,
/// tau in F_delta, j integer, v in [0,1).
struct DeltaDecomposition {
  IVec beta_coords;
  Vec beta;
  Vec tau;
  long long j = 0;
  double v = 0;

  Vec reconstruct(const DeltaGeometry& g) const {
    return beta + tau + (double(j) + v) * g.delta;
  }
};

/// Verifies maximality of delta (gcd of dual coordinates is 1) and assembles the
/// sublattice geometry.  Throws config_error when delta is not maximal; the
/// message names a witness.
DeltaGeometry sublattice_geometry(const Lattice& lattice, const IVec& delta_coords);

AxialDecomposition decompose_t(const Vec& t, const DeltaGeometry& geom);

/// Requires x = gamma + t for some gamma in Gamma (throws otherwise).
DeltaDecomposition gamma_delta_decompose(const Vec& x, const DeltaGeometry& geom, const Vec& t);

/// v(beta, t): fractional part of |delta|^-2 (t,delta) - (2 pi)^-1 (beta - a, delta*).
double v_of_beta(const IVec& beta_coords, const Vec& t, const DeltaGeometry& geom);

/// Reduces a lattice direction to the maximal (primitive) delta on its line,
/// with a deterministic sign convention.
IVec primitive_direction(const IVec& coords);

}  // namespace blochpert::lattice
