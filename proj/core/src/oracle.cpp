#include "blochpert/oracle.hpp"

namespace blochpert::oracle {

double default_cutoff(double rho, const potential::FourierPotential& q,
                      const lattice::Lattice& lat, const core::NumericConfig& cfg) {
  return 1.5 * rho + q.support_radius(lat) + cfg.oracle_cutoff_margin;
}

namespace {

void enumerate_basis(const lattice::Lattice& lat, const Vec& t, double cutoff,
                     OracleSpectrum& spec) {
  const int d = lat.dim();
  std::vector<long long> bound(d);
  for (int i = 0; i < d; ++i)
    bound[i] =
        static_cast<long long>(std::floor((cutoff + t.norm()) * lat.basis().row(i).norm() /
                                          (2.0 * M_PI))) +
        2;
  IVec n(d, 0);
  std::function<void(int)> scan = [&](int level) {
    if (level == d) {
      Vec x = lat.gamma(n) + t;
      if (x.norm() <= cutoff) {
        spec.basis_index.emplace(n, static_cast<int>(spec.basis_coords.size()));
        spec.basis_coords.push_back(n);
        spec.basis_vecs.push_back(x);
      }
      return;
    }
    for (long long v = -bound[level]; v <= bound[level]; ++v) {
      n[level] = static_cast<int>(v);
      scan(level + 1);
    }
  };
  scan(0);
}

}  // namespace

linalg::SpMat assemble_sparse(const potential::FourierPotential& q,
                              const std::vector<Vec>& basis_vecs,
                              const std::vector<IVec>& basis_coords,
                              const std::unordered_map<IVec, int, IVecHash>& index,
                              const lattice::Lattice&) {
  const int n = static_cast<int>(basis_vecs.size());
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(n * (q.coeffs().size() + 1));
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, cd(basis_vecs[i].squaredNorm(), 0));
    for (auto& [g1, c] : q.coeffs()) {
      IVec other = ivec_sub(basis_coords[i], g1);
      auto it = index.find(other);
      if (it != index.end()) trip.emplace_back(i, it->second, c);
    }
  }
  linalg::SpMat H(n, n);
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  return H;
}

OracleSpectrum assemble_and_solve(const potential::FourierPotential& q,
                                  const lattice::Lattice& lat, const Vec& t, double cutoff,
                                  std::optional<std::pair<double, double>> window,
                                  const core::NumericConfig& cfg) {
  OracleSpectrum spec;
  spec.lat = lat;
  spec.t = t;
  spec.cutoff = cutoff;
  enumerate_basis(lat, t, cutoff, spec);
  const int n = spec.size();
  if (n == 0) throw config_error("oracle basis is empty (cutoff too small)");
  spec.window = window;

  bool use_dense = n <= cfg.dense_cap && (!window || n <= 600);
  if (!use_dense && !window)
    throw config_error("oracle basis of size " + std::to_string(n) +
                       " needs a window for the iterative solve (dense_cap = " +
                       std::to_string(cfg.dense_cap) + ")");

  if (use_dense) {
    CMat H = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      H(i, i) = cd(spec.basis_vecs[i].squaredNorm(), 0);
      for (auto& [g1, c] : q.coeffs()) {
        IVec other = ivec_sub(spec.basis_coords[i], g1);
        int jcol = spec.index_of(other);
        if (jcol >= 0) H(i, jcol) += c;
      }
    }
    double herm = (H - H.adjoint()).cwiseAbs().maxCoeff();
    if (herm != 0.0)
      throw numerical_error("oracle assembly is not exactly self-adjoint (defect " +
                            std::to_string(herm) + ")");
    auto es = linalg::dense_hermitian(H);
    spec.eigenvalues = es.eigenvalues;
    spec.b_table = es.eigenvectors;
    spec.dense = true;
    if (window) {
      // Restrict to the requested window but keep it a dense-quality table.
      std::vector<int> keep;
      for (int i = 0; i < n; ++i)
        if (spec.eigenvalues[i] >= window->first && spec.eigenvalues[i] <= window->second)
          keep.push_back(i);
      Vec ev(keep.size());
      CMat bt(n, keep.size());
      for (size_t i = 0; i < keep.size(); ++i) {
        ev[i] = spec.eigenvalues[keep[i]];
        bt.col(i) = spec.b_table.col(keep[i]);
      }
      spec.eigenvalues = ev;
      spec.b_table = bt;
      spec.dense = false;
    }
    return spec;
  }

  auto H = assemble_sparse(q, spec.basis_vecs, spec.basis_coords, spec.basis_index, lat);
  double sigma = 0.5 * (window->first + window->second);
  double half = 0.5 * (window->second - window->first);
  linalg::WindowOptions wopt;
  wopt.seed = cfg.seed ^ 0xabcdefULL;
  wopt.residual_tol = 1e-10;
  auto res = linalg::shift_invert_window(H, sigma, half, wopt);
  spec.dense = false;
  spec.eigenvalues = Eigen::Map<Vec>(res.eigenvalues.data(), res.eigenvalues.size());
  spec.b_table = res.eigenvectors;
  spec.residuals = res.residuals;
  return spec;
}

std::optional<Match> match_eigenvalue(const OracleSpectrum& spec, const IVec& gamma,
                                      const core::PaperParams& pp, double c4, double c_exponent) {
  int row = spec.index_of(gamma);
  if (row < 0) return std::nullopt;
  double target = spec.basis_vecs[row].squaredNorm();
  double win = 0.5 * pp.rho_pow(pp.alpha1());
  Match best;
  double best_abs = -1, second = 0;
  for (int nn = 0; nn < spec.computed(); ++nn) {
    if (std::abs(spec.eigenvalues[nn] - target) >= win) continue;
    double a = std::abs(spec.b_table(row, nn));
    if (a > best_abs) {
      second = std::max(second, best_abs);
      best_abs = a;
      best.n = nn;
      best.eigenvalue = spec.eigenvalues[nn];
      best.b = spec.b_table(row, nn);
    } else {
      second = std::max(second, a);
    }
  }
  if (best.n < 0) return std::nullopt;
  best.runner_up = second < 0 ? 0 : second;
  double floor = c4 * pp.rho_pow(-c_exponent * pp.alpha());
  if (best_abs <= floor) return std::nullopt;
  return best;
}

BindingResidual binding_residual(const OracleSpectrum& spec, int n, const IVec& gamma,
                                 const potential::FourierPotential& q) {
  int row = spec.index_of(gamma);
  if (row < 0) throw config_error("binding_residual: gamma not in basis");
  BindingResidual out;
  cd lhs = (spec.eigenvalues[n] - spec.basis_vecs[row].squaredNorm()) * spec.b_table(row, n);
  cd rhs(0, 0);
  for (auto& [g1, c] : q.coeffs()) {
    IVec other = ivec_sub(gamma, g1);
    int r = spec.index_of(other);
    if (r < 0) {
      out.interior = false;
      continue;
    }
    rhs += c * spec.b_table(r, n);
  }
  out.residual = std::abs(lhs - rhs);
  return out;
}

ResonanceB resonance_b(const OracleSpectrum& spec, const lattice::DeltaGeometry& geom,
                       const hill::HillSolveResult& hs, int n, long long j,
                       const IVec& beta_coords) {
  ResonanceB out;
  const auto* pair = hs.find_j(j);
  if (!pair) throw config_error("resonance_b: Hill index j not present in the solve");

  // gamma(beta, m) + t = beta + tau + (m + v) delta; successive m differ by delta.
  lattice::AxialDecomposition dt = lattice::decompose_t(spec.t, geom);
  Vec x0 = geom.beta(beta_coords) + dt.tau + pair->v * geom.delta;
  auto base = spec.lat.gamma_coords(x0 - spec.t, 1e-7);
  if (!base) throw numerical_error("resonance_b: beta/tau bookkeeping left the lattice");

  cd acc(0, 0);
  for (auto& [m, c] : pair->phi_coeffs) {
    IVec g = *base;
    for (size_t i = 0; i < g.size(); ++i) g[i] += m * geom.delta_coords[i];
    int row = spec.index_of(g);
    if (row < 0) {
      if (std::abs(c) > 1e-12) out.truncated = true;
      continue;
    }
    acc += std::conj(c) * spec.b_table(row, n);
  }
  out.value = acc;
  return out;
}

std::optional<Match> match_resonance(const OracleSpectrum& spec,
                                     const lattice::DeltaGeometry& geom,
                                     const hill::HillSolveResult& hs, long long j,
                                     const IVec& beta_coords, double lambda_jb, double win) {
  const auto* pair = hs.find_j(j);
  if (!pair) return std::nullopt;
  lattice::AxialDecomposition dt = lattice::decompose_t(spec.t, geom);
  Vec x0 = geom.beta(beta_coords) + dt.tau + pair->v * geom.delta;
  auto base = spec.lat.gamma_coords(x0 - spec.t, 1e-7);
  if (!base) return std::nullopt;

  // Precompute the basis rows of the Hill modes.
  std::vector<std::pair<int, cd>> rows;
  for (auto& [m, c] : pair->phi_coeffs) {
    IVec g = *base;
    for (size_t i = 0; i < g.size(); ++i) g[i] += m * geom.delta_coords[i];
    int row = spec.index_of(g);
    if (row >= 0) rows.emplace_back(row, std::conj(c));
  }
  Match best;
  double best_abs = -1, second = 0;
  for (int nn = 0; nn < spec.computed(); ++nn) {
    if (std::abs(spec.eigenvalues[nn] - lambda_jb) > win) continue;
    cd acc(0, 0);
    for (auto& [row, cc] : rows) acc += cc * spec.b_table(row, nn);
    double a = std::abs(acc);
    if (a > best_abs) {
      second = std::max(second, best_abs);
      best_abs = a;
      best.n = nn;
      best.eigenvalue = spec.eigenvalues[nn];
      best.b = acc;
    } else {
      second = std::max(second, a);
    }
  }
  if (best.n < 0) return std::nullopt;
  best.runner_up = std::max(0.0, second);
  return best;
}

double unitarity_defect(const OracleSpectrum& spec) {
  double w = 0;
  if (spec.dense) {
    CMat g = spec.b_table.adjoint() * spec.b_table;
    w = (g - CMat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    CMat g2 = spec.b_table * spec.b_table.adjoint();
    w = std::max(w, (g2 - CMat::Identity(g2.rows(), g2.cols())).cwiseAbs().maxCoeff());
  } else {
    for (int c = 0; c < spec.b_table.cols(); ++c)
      w = std::max(w, std::abs(spec.b_table.col(c).norm() - 1.0));
  }
  return w;
}

}  // namespace blochpert::oracle
