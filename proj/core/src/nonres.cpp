#include "blochpert/nonres.hpp"

#include <sstream>

namespace blochpert::nonres {

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

std::string chain_str(const std::vector<const SupportEntry*>& path) {
  std::string s;
  for (auto* e : path) s += ivec_str(e->coords);
  return s;
}

}  // namespace

double s_k_majorant(int k, const potential::FourierPotential& q, const core::PaperParams& pp) {
  double m = q.sup_bound();
  return std::pow(m, k + 1) * std::pow(2.0 / pp.rho_pow(pp.alpha1()), k);
}

SkEval S_k(double a, const Vec& x, int k, const potential::FourierPotential& q,
           const lattice::Lattice& lat, const core::PaperParams& pp, const SkOptions& opt) {
  if (k < 1) throw config_error("S_k: k must be >= 1");
  auto sup = truncated_support(q, lat, pp);
  SkEval ev;
  if (sup.empty()) return ev;

  const double floor = 0.5 * pp.rho_pow(pp.alpha1());
  const int d = lat.dim();
  cd acc(0, 0);

  IVec partial(d, 0);
  Vec pvec = Vec::Zero(d);
  std::vector<const SupportEntry*> path;
  path.reserve(k);

  std::function<void(int, cd, double)> rec = [&](int depth, cd prod, double denom_prod) {
    for (auto& e : sup) {
      for (int i = 0; i < d; ++i) partial[i] += e.coords[i];
      pvec += e.vec;
      path.push_back(&e);
      bool zero_partial = ivec_is_zero(partial);
      if (!zero_partial) {
        double denom = a - (x - pvec).squaredNorm();
        double ad = std::abs(denom);
        ev.min_denominator = std::min(ev.min_denominator, ad);
        if ((opt.enforce_floors && ad <= floor) || ad <= opt.hard_floor) {
          std::ostringstream os;
          os << "S_k denominator " << denom << " below floor " << floor << " on chain "
             << chain_str(path) << " at depth " << depth + 1
             << " (x likely misclassified as non-resonant)";
          throw numerical_error(os.str());
        }
        cd nprod = prod * e.coeff;
        double ndenom = denom_prod * denom;
        if (depth + 1 == k) {
          cd closing = q.coeff(ivec_neg(partial));
          if (closing != cd(0, 0)) {
            acc += nprod * closing / ndenom;
            ++ev.chains;
          }
        } else {
          rec(depth + 1, nprod, ndenom);
        }
      }
      path.pop_back();
      for (int i = 0; i < d; ++i) partial[i] -= e.coords[i];
      pvec -= e.vec;
    }
  };
  rec(0, cd(1, 0), 1.0);

  ev.imag_defect = std::abs(acc.imag());
  if (ev.imag_defect > 1e-10 * std::max(1.0, std::abs(acc.real())))
    throw numerical_error("S_k: imaginary defect " + std::to_string(ev.imag_defect) +
                          " exceeds tolerance (potential not reality-symmetric?)");
  ev.value = acc.real();
  return ev;
}

SeriesResult F_series(const Vec& x, int k_max, const potential::FourierPotential& q,
                      const lattice::Lattice& lat, const core::PaperParams& pp,
                      const core::NumericConfig& cfg, const SkOptions& opt) {
  if (k_max < 1) throw config_error("F_series: k_max must be >= 1");
  if (k_max > pp.p1)
    throw config_error("F_series: k_max exceeds p1 = " + std::to_string(pp.p1));
  SeriesResult res;
  res.x = x;
  res.order = k_max;
  res.F.assign(k_max, 0.0);
  const double x2 = x.squaredNorm();
  for (int s = 1; s < k_max; ++s) {
    double a = x2 + res.F[s - 1];
    double sum = 0;
    int depth = std::min(s, cfg.chain_depth_cap);
    for (int k = 1; k <= depth; ++k) {
      auto ev = S_k(a, x, k, q, lat, pp, opt);
      sum += ev.value;
      res.min_denominator = std::min(res.min_denominator, ev.min_denominator);
    }
    res.F[s] = sum;
    if (cfg.f_series_tail_tol > 0 && std::abs(res.F[s] - res.F[s - 1]) < cfg.f_series_tail_tol) {
      for (int r = s + 1; r < k_max; ++r) res.F[r] = res.F[s];
      break;
    }
  }
  res.predicted = x2 + res.F[k_max - 1];
  return res;
}

GradCheck grad_F_check(const Vec& x, int k, const potential::FourierPotential& q,
                       const lattice::Lattice& lat, const core::PaperParams& pp,
                       const core::NumericConfig& cfg, double h) {
  if (h <= 0) throw config_error("grad_F_check: step must be positive");
  const int d = lat.dim();
  auto fk = [&](const Vec& y) {
    auto lbl = domains::classify(y, lat, pp, cfg);
    if (!lbl.non_resonant())
      throw numerical_error("grad_F_check: stencil point leaves the non-resonance domain");
    return F_series(y, k + 1, q, lat, pp, cfg).F[k];
  };
  GradCheck out;
  out.h = h;
  out.grad = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = h;
    out.grad[i] = (fk(x + e) - fk(x - e)) / (2 * h);
    out.max_abs = std::max(out.max_abs, std::abs(out.grad[i]));
  }
  return out;
}

}  // namespace blochpert::nonres
