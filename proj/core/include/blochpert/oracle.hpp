#pragma once

#include <optional>
#include <unordered_map>

#include "blochpert/eigensolver.hpp"
#include "blochpert/hill.hpp"
#include "blochpert/potential.hpp"

namespace blochpert::oracle {

/// Spectrum of the truncated L_t(q) on the plane-wave basis
/// {e^{i(gamma+t,x)} : |gamma+t| <= cutoff}.  b(N, gamma) is the eigenvector
/// table; for windowed solves only the columns inside the window exist.
struct OracleSpectrum {
  lattice::Lattice lat;
  Vec t;
  double cutoff = 0;
  std::vector<IVec> basis_coords;
  std::vector<Vec> basis_vecs;  // gamma + t
  std::unordered_map<IVec, int, IVecHash> basis_index;
  Vec eigenvalues;  // ascending over the computed set
  CMat b_table;     // column N holds b(N, gamma) over the basis rows
  bool dense = true;
  std::optional<std::pair<double, double>> window;
  std::vector<double> residuals;  // windowed mode: ||H v - lambda v|| per column

  int size() const { return static_cast<int>(basis_coords.size()); }
  int computed() const { return static_cast<int>(eigenvalues.size()); }
  bool in_basis(const IVec& g) const { return basis_index.count(g) > 0; }
  int index_of(const IVec& g) const {
    auto it = basis_index.find(g);
    return it == basis_index.end() ? -1 : it->second;
  }
  cd b(int n, const IVec& g) const {
    int r = index_of(g);
    return r < 0 ? cd(0, 0) : b_table(r, n);
  }
};

/// Assembles and diagonalizes the truncated operator.  Dense full solve when the
/// basis is small enough; otherwise a shift-invert windowed solve (requires
/// `window`).
OracleSpectrum assemble_and_solve(const potential::FourierPotential& q,
                                  const lattice::Lattice& lat, const Vec& t, double cutoff,
                                  std::optional<std::pair<double, double>> window,
                                  const core::NumericConfig& cfg);

/// Hermitian matrix of the truncated operator in sparse form (both triangles).
linalg::SpMat assemble_sparse(const potential::FourierPotential& q,
                              const std::vector<Vec>& basis_vecs,
                              const std::vector<IVec>& basis_coords,
                              const std::unordered_map<IVec, int, IVecHash>& index,
                              const lattice::Lattice& lat);

/// Cutoff the acceptance suite uses: 1.5 rho + support radius + margin.
double default_cutoff(double rho, const potential::FourierPotential& q,
                      const lattice::Lattice& lat, const core::NumericConfig& cfg);

struct Match {
  int n = -1;              // column in the computed set
  double eigenvalue = 0;
  cd b{};                  // b(N, gamma)
  double runner_up = 0;    // second-largest |b| among the (6)-window candidates
};

/// Among computed N with |Lambda_N - |gamma+t|^2| < rho^{alpha_1}/2, the one
/// maximizing |b(N,gamma)|; nullopt when the floor |b| > c4 rho^{-c alpha} fails.
std::optional<Match> match_eigenvalue(const OracleSpectrum& spec, const IVec& gamma,
                                      const core::PaperParams& pp, double c4, double c_exponent);

struct BindingResidual {
  double residual = 0;
  bool interior = true;  // all gamma - gamma_1 inside the basis
};

/// | (Lambda_N - |gamma+t|^2) b(N,gamma) - sum_{gamma_1} q_{gamma_1} b(N, gamma-gamma_1) |.
BindingResidual binding_residual(const OracleSpectrum& spec, int n, const IVec& gamma,
                                 const potential::FourierPotential& q);

struct ResonanceB {
  cd value{};
  bool truncated = false;  // some Hill mode fell outside the oracle basis
};

/// b(N, j, beta) = (Psi_N, Phi_{j,beta}) for the computed column n, via Fourier
/// coefficients of the Hill eigenfunction Phi_{j,beta}(x) = e^{i(beta+tau,x)}
/// phi_{j,v}(zeta).
ResonanceB resonance_b(const OracleSpectrum& spec, const lattice::DeltaGeometry& geom,
                       const hill::HillSolveResult& hs, int n, long long j,
                       const IVec& beta_coords);

/// N maximizing |b(N,j,beta)| within |Lambda_N - lambda_{j,beta}| <= window.
std::optional<Match> match_resonance(const OracleSpectrum& spec,
                                     const lattice::DeltaGeometry& geom,
                                     const hill::HillSolveResult& hs, long long j,
                                     const IVec& beta_coords, double lambda_jb, double win);

/// Worst deviation of the b-table from unitarity (dense mode: rows and columns;
/// windowed mode: column norms only).
double unitarity_defect(const OracleSpectrum& spec);

}  // namespace blochpert::oracle
