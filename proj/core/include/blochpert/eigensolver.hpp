#pragma once

#include <Eigen/SparseCore>

#include "blochpert/common.hpp"

namespace blochpert::linalg {

using SpMat = Eigen::SparseMatrix<cd>;

struct DenseEigen {
  Vec eigenvalues;    // ascending
  CMat eigenvectors;  // columns
};

/// Full spectrum of a Hermitian matrix (Eigen self-adjoint solver).
DenseEigen dense_hermitian(const CMat& H);

/// Eigenvalues only (skips the eigenvector backtransform).
Vec dense_hermitian_values(const CMat& H);

struct WindowOptions {
  double residual_tol = 1e-10;  // on ||H v - lambda v||
  int max_krylov = 900;
  int check_every = 24;
  int min_krylov = 48;
  unsigned long long seed = 12345;
};

struct WindowResult {
  std::vector<double> eigenvalues;  // ascending, inside [sigma-w, sigma+w]
  CMat eigenvectors;                // columns aligned with eigenvalues
  std::vector<double> residuals;    // explicit ||H v - lambda v||
  bool converged = false;
  int krylov_dim = 0;
};

/// All eigenpairs of the Hermitian sparse H inside [sigma - half_width,
/// sigma + half_width], by shift-invert Lanczos with full reorthogonalization.
/// Exact degeneracies may collapse to a single vector; callers use generic
/// quasimomenta, which keeps the spectra simple.
WindowResult shift_invert_window(const SpMat& H, double sigma, double half_width,
                                 const WindowOptions& opt = {});

struct NearestEigen {
  double eigenvalue = 0;
  double residual = 0;
  bool converged = false;
};

/// Eigenvalue of H nearest to sigma, by shift-invert power iteration with
/// Rayleigh-quotient readout.  Cheap test for "is any eigenvalue within w of
/// sigma" when only the distance matters.
NearestEigen nearest_eigenvalue(const SpMat& H, double sigma, int max_iter = 80,
                                double tol = 1e-8, unsigned long long seed = 12345);

}  // namespace blochpert::linalg
