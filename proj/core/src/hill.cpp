#include "blochpert/hill.hpp"

namespace blochpert::hill {

int default_modes(int j_max, const potential::DirectionalPotential& Q, int margin) {
  return 4 * std::max(1, j_max) + Q.support_radius() + margin;
}

HillSolveResult solve_Tv(const potential::DirectionalPotential& Q, double v, double delta_norm,
                         int n_modes) {
  if (n_modes < 8 + Q.support_radius())
    throw config_error("solve_Tv: n_modes must be >= 8 + support radius of Q");
  const int M = n_modes;
  const int n = 2 * M + 1;
  CMat H = CMat::Zero(n, n);
  auto idx = [M](int m) { return m + M; };
  for (int m = -M; m <= M; ++m) {
    double base = (double(m) + v) * delta_norm;
    H(idx(m), idx(m)) = base * base;
    for (auto& [l, c] : Q.coeffs) {
      int mp = m - l;
      if (mp >= -M && mp <= M) H(idx(m), idx(mp)) += c;
    }
  }
  // Reality-symmetric Q gives an exactly Hermitian H; symmetrize defensively is
  // not needed, the assembly above is already q_{(m-m') delta} in (m, m').
  auto es = linalg::dense_hermitian(H);

  HillSolveResult out;
  out.v = v;
  out.delta_norm = delta_norm;
  out.n_modes = M;
  out.pairs.resize(n);
  for (int i = 0; i < n; ++i) {
    HillEigenpair& p = out.pairs[i];
    p.v = v;
    p.mu = es.eigenvalues[i];
    CVec col = es.eigenvectors.col(i);
    // Deterministic phase: dominant coefficient real positive.
    int dom = 0;
    double best = 0;
    for (int r = 0; r < n; ++r) {
      double a = std::norm(col[r]);
      if (a > best) {
        best = a;
        dom = r;
      }
    }
    cd ph = col[dom] / std::abs(col[dom]);
    col /= ph;
    for (int r = 0; r < n; ++r)
      if (std::abs(col[r]) > 1e-300) p.phi_coeffs[r - M] = col[r];
    p.ambiguous = best < 0.5;
    p.j = dom - M;
  }
  // Dominant-mode indexing with fallback to energy order on collision/ambiguity.
  std::map<long long, int> byj;
  bool clean = true;
  for (int i = 0; i < n && clean; ++i) {
    if (out.pairs[i].ambiguous || !byj.emplace(out.pairs[i].j, i).second) clean = false;
  }
  if (!clean) {
    byj.clear();
    out.any_ambiguous = true;
    // Fallback: assign by nearest free index, keeping |mu_j - |(j+v)delta|^2| small.
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
      double mu = out.pairs[i].mu;
      int best_m = -M;
      double bestd = std::numeric_limits<double>::max();
      for (int m = -M; m <= M; ++m) {
        if (used[m + M]) continue;
        double dfree = std::abs(mu - std::pow((double(m) + v) * delta_norm, 2));
        if (dfree < bestd) {
          bestd = dfree;
          best_m = m;
        }
      }
      used[best_m + M] = true;
      out.pairs[i].j = best_m;
      byj[best_m] = i;
    }
  }
  out.by_j = std::move(byj);
  return out;
}

bool in_W_rho(const potential::DirectionalPotential& Q, double v, double delta_norm, double rho,
              int j_window) {
  if (rho <= 1.0) throw config_error("in_W_rho: rho must exceed 1");
  const double gap_needed = 2.0 / std::log(rho);
  const double supQ = Q.sup_bound();
  // Beyond the window, consecutive free gaps minus 2 sup|Q| must already clear
  // the threshold, otherwise the truncation cannot certify membership.
  double jw = double(j_window);
  double tail_gap = ((2 * jw - 1)) * delta_norm * delta_norm - 2 * supQ;
  if (tail_gap <= gap_needed)
    throw config_error("in_W_rho: window too small to certify the gap condition, raise j_window");

  int M = default_modes(j_window + 2, Q);
  auto res = solve_Tv(Q, v, delta_norm, M);
  // Collect eigenvalues below the certified energy ceiling.
  double ceiling = std::pow((jw + 1) * delta_norm, 2) - supQ;
  std::vector<double> mus;
  for (auto& p : res.pairs)
    if (p.mu <= ceiling) mus.push_back(p.mu);
  std::sort(mus.begin(), mus.end());
  for (size_t i = 1; i < mus.size(); ++i)
    if (mus[i] - mus[i - 1] <= gap_needed) return false;
  return true;
}

DecayFit fourier_decay_check(const HillEigenpair& pair, double delta_norm, int m_lo, int m_hi) {
  if (m_hi - m_lo < 3) throw config_error("fourier_decay_check: need at least 4 modes in range");
  std::vector<double> xs, ys;
  for (int m = m_lo; m <= m_hi; ++m) {
    for (int sgn : {1, -1}) {
      double a = std::abs(pair.coeff(sgn * m));
      if (a > 1e-280) {
        xs.push_back(std::log(std::abs(double(sgn * m)) * delta_norm));
        ys.push_back(std::log(a));
      }
    }
  }
  if (xs.size() < 4)
    throw numerical_error("fourier_decay_check: insufficient nonzero modes in [m_lo, m_hi]");
  auto fit = fit_line(xs, ys);
  return {fit.slope, fit.residual, fit.n};
}

const HillSolveResult& HillCache::at(double v) const {
  long long key = llround(frac01(v) * 1e12);
  if (key == 1000000000000LL) key = 0;
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    auto res = std::make_unique<HillSolveResult>(solve_Tv(Q_, frac01(v), delta_norm_, n_modes_));
    it = cache_.emplace(key, std::move(res)).first;
  }
  return *it->second;
}

}  // namespace blochpert::hill
