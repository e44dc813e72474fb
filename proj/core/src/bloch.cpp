#include "blochpert/bloch.hpp"

#include <set>

namespace blochpert::bloch {

namespace {

struct SupportEntry {
  IVec coords;
  Vec vec;
  cd coeff;
};

std::vector<SupportEntry> truncated_support(const potential::FourierPotential& q,
                                            const lattice::Lattice& lat,
                                            const core::PaperParams& pp) {
  std::vector<SupportEntry> sup;
  double radius = pp.rho_pow(pp.alpha());
  for (auto& [g, c] : q.coeffs()) {
    Vec v = lat.gamma(g);
    if (v.norm() < radius) sup.push_back({g, v, c});
  }
  return sup;
}

double shifted_energy(const Vec& x, const potential::FourierPotential& q,
                      const lattice::Lattice& lat, const core::PaperParams& pp,
                      const core::NumericConfig& cfg) {
  // P(x) = |x|^2 + F_{[p/3]}(x); the recursion converges long before [p/3] at
  // desk scale, so a tail tolerance is applied.
  core::NumericConfig c2 = cfg;
  if (c2.f_series_tail_tol <= 0) c2.f_series_tail_tol = 1e-13;
  int kmax = static_cast<int>(std::min<long long>(pp.p / 3 + 1, pp.p1));
  kmax = std::max(kmax, 1);
  return nonres::F_series(x, kmax, q, lat, pp, c2).predicted;
}

}  // namespace

std::map<IVec, cd> phi_1(const Vec& center, const potential::FourierPotential& q,
                         const lattice::Lattice& lat, const core::PaperParams& pp) {
  std::map<IVec, cd> out;
  const double x2 = center.squaredNorm();
  const double floor = pp.rho_pow(pp.alpha1());
  for (auto& e : truncated_support(q, lat, pp)) {
    double denom = x2 - (center + e.vec).squaredNorm();
    if (std::abs(denom) < floor)
      throw numerical_error("phi_1: denominator " + std::to_string(denom) +
                            " under the slab width at gamma_1 = " + ivec_str(e.coords) +
                            " (center is not non-resonant)");
    out[e.coords] = e.coeff / denom;
  }
  return out;
}

cd A_k_coeff(const Vec& center, const IVec& gamma_prime, int k,
             const potential::FourierPotential& q, const lattice::Lattice& lat,
             const core::PaperParams& pp, const core::NumericConfig& cfg) {
  if (k < 1) throw config_error("A_k_coeff: k must be >= 1");
  auto sup = truncated_support(q, lat, pp);
  const double P = shifted_energy(center, q, lat, pp, cfg);
  const double floor = 0.5 * pp.rho_pow(pp.alpha1());
  const int d = lat.dim();

  // Denominator at the j-th partial sum: P - |x + gamma' - sum_{i<=j} gamma_i|^2,
  // j = 0..k-1.
  Vec base = center + lat.gamma(gamma_prime);
  double d0 = P - base.squaredNorm();
  if (std::abs(d0) <= floor)
    throw numerical_error("A_k_coeff: leading denominator below floor at gamma' = " +
                          ivec_str(gamma_prime));
  if (k == 1) return q.coeff(gamma_prime) / d0;

  cd acc(0, 0);
  IVec partial(d, 0);
  Vec pvec = Vec::Zero(d);
  std::function<void(int, cd, double)> rec = [&](int depth, cd prod, double denom_prod) {
    for (auto& e : sup) {
      for (int i = 0; i < d; ++i) partial[i] += e.coords[i];
      pvec += e.vec;
      IVec rem = ivec_sub(gamma_prime, partial);
      if (!ivec_is_zero(rem)) {
        double denom = P - (base - pvec).squaredNorm();
        if (std::abs(denom) <= floor) {
          for (int i = 0; i < d; ++i) partial[i] -= e.coords[i];
          pvec -= e.vec;
          throw numerical_error("A_k_coeff: chain denominator below floor (gamma' = " +
                                ivec_str(gamma_prime) + ")");
        }
        cd nprod = prod * e.coeff;
        double ndenom = denom_prod * denom;
        if (depth + 1 == k - 1) {
          cd closing = q.coeff(rem);
          if (closing != cd(0, 0)) acc += nprod * closing / ndenom;
        } else {
          rec(depth + 1, nprod, ndenom);
        }
      }
      for (int i = 0; i < d; ++i) partial[i] -= e.coords[i];
      pvec -= e.vec;
    }
  };
  rec(0, cd(1, 0) / d0, 1.0);
  return acc;
}

BlochExpansion predict_expansion(const Vec& center, int order,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg) {
  if (order < 1) throw config_error("predict_expansion: order must be >= 1");
  BlochExpansion exp;
  exp.center = center;
  exp.order = order;

  // Reachable gamma' within order-1 support hops, restricted to
  // Gamma((order-1) rho^alpha).
  auto sup = truncated_support(q, lat, pp);
  std::set<IVec> reach;
  const int d = lat.dim();
  std::set<IVec> frontier{IVec(d, 0)};
  for (int k = 1; k < order; ++k) {
    std::set<IVec> next;
    for (auto& o : frontier)
      for (auto& e : sup) next.insert(ivec_add(o, e.coords));
    frontier = std::move(next);
    reach.insert(frontier.begin(), frontier.end());
  }
  reach.erase(IVec(d, 0));
  double rmax = (order - 1) * pp.rho_pow(pp.alpha());

  std::map<IVec, cd> sums;
  double mass = 0;  // sum_k sum_{gamma*} |A_k|^2, the normalization of the center
  for (auto& gp : reach) {
    if (lat.gamma(gp).norm() >= rmax) continue;
    cd total(0, 0);
    for (int k = 1; k < order; ++k) {
      cd a = A_k_coeff(center, gp, k, q, lat, pp, cfg);
      total += a;
      mass += std::norm(a);
    }
    if (total != cd(0, 0)) sums[gp] = total;
  }
  exp.b_center = 1.0 / std::sqrt(1.0 + mass);
  for (auto& [gp, v] : sums) exp.coefficients[gp] = v * exp.b_center;
  return exp;
}

EigenfunctionError eigenfunction_error(const oracle::OracleSpectrum& spec, int n,
                                       const IVec& gamma, const BlochExpansion& expansion) {
  int row = spec.index_of(gamma);
  if (row < 0) throw config_error("eigenfunction_error: gamma not in the oracle basis");
  cd bg = spec.b_table(row, n);
  if (std::abs(bg) < 1e-14)
    throw numerical_error("eigenfunction_error: vanishing b(N,gamma), phase alignment impossible");
  cd phase = bg / std::abs(bg);

  EigenfunctionError err;
  double sq = 0;
  for (int r = 0; r < spec.size(); ++r) {
    cd oracle_b = spec.b_table(r, n) / phase;
    cd pred(0, 0);
    if (r == row) {
      pred = cd(expansion.b_center, 0);
    } else {
      IVec diff = ivec_sub(spec.basis_coords[r], gamma);
      auto it = expansion.coefficients.find(diff);
      if (it != expansion.coefficients.end()) pred = it->second;
      err.tail_mass += std::norm(oracle_b);
    }
    sq += std::norm(oracle_b - pred);
  }
  err.l2_error = std::sqrt(sq);
  return err;
}

ResonanceFunctionError resonance_eigenfunction_error(const oracle::OracleSpectrum& spec,
                                                     const lattice::DeltaGeometry& geom,
                                                     const hill::HillSolveResult& hs, int n,
                                                     long long j, const IVec& beta_coords) {
  auto rb = oracle::resonance_b(spec, geom, hs, n, j, beta_coords);
  ResonanceFunctionError out;
  out.truncated = rb.truncated;
  // After aligning phases, ||Psi - Phi||^2 = 2 - 2 |<Psi, Phi>|.
  double ip = std::min(1.0, std::abs(rb.value));
  out.distance = std::sqrt(std::max(0.0, 2.0 - 2.0 * ip));
  return out;
}

}  // namespace blochpert::bloch
