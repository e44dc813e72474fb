#include "blochpert/isoenergetic.hpp"

#include <atomic>
#include <mutex>

namespace blochpert::iso {

namespace {

// gamma with |gamma + t|^2 in [elo, ehi].
std::vector<IVec> energy_window_points(const lattice::Lattice& lat, const Vec& t, double elo,
                                       double ehi) {
  const int d = lat.dim();
  double rmax = std::sqrt(std::max(0.0, ehi));
  std::vector<long long> bound(d);
  for (int i = 0; i < d; ++i)
    bound[i] = static_cast<long long>(
                   std::floor((rmax + t.norm()) * lat.basis().row(i).norm() / (2.0 * M_PI))) +
               2;
  std::vector<IVec> out;
  IVec n(d, 0);
  std::function<void(int)> scan = [&](int level) {
    if (level == d) {
      double e = (lat.gamma(n) + t).squaredNorm();
      if (e >= elo && e <= ehi) out.push_back(n);
      return;
    }
    for (long long v = -bound[level]; v <= bound[level]; ++v) {
      n[level] = static_cast<int>(v);
      scan(level + 1);
    }
  };
  scan(0);
  return out;
}

bool in_B_annulus(const Vec& x, const core::PaperParams& pp) {
  double r = x.norm();
  double inner = 0.5 * pp.rho + pp.rho_pow(pp.alpha1() - 1.0);
  double outer = 1.5 * pp.rho - pp.rho_pow(pp.alpha1() - 1.0);
  return r > inner && r < outer;
}

}  // namespace

double known_part_F(const Vec& x, const potential::FourierPotential& q,
                    const lattice::Lattice& lat, const core::PaperParams& pp,
                    const core::NumericConfig& cfg) {
  core::NumericConfig c2 = cfg;
  if (c2.f_series_tail_tol <= 0) c2.f_series_tail_tol = 1e-13;
  int kmax = static_cast<int>(std::min<long long>(pp.k1, pp.p1));
  return nonres::F_series(x, kmax, q, lat, pp, c2).predicted;
}

SimpleSetVerdict in_simple_set_B(const Vec& x, const Vec& t,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg) {
  if (!in_B_annulus(x, pp))
    throw config_error("in_simple_set_B: x outside the working annulus");
  auto gcoords = lat.gamma_coords(x - t, 1e-7);
  if (!gcoords) throw config_error("in_simple_set_B: x - t is not a lattice vector");

  auto label = domains::classify(x, lat, pp, cfg);
  if (!label.non_resonant()) return SimpleSetVerdict::fail(x, "x not in the non-resonance domain");

  double F;
  try {
    F = known_part_F(x, q, lat, pp, cfg);
  } catch (const numerical_error& e) {
    return SimpleSetVerdict::fail(x, std::string("series floor at x: ") + e.what());
  }

  const double win = pp.rho_pow(pp.alpha1()) / 3.0;
  const double gap = 2.0 * pp.eps1;
  for (auto& gp : energy_window_points(lat, t, F - win, F + win)) {
    if (gp == *gcoords) continue;
    Vec y = lat.gamma(gp) + t;
    auto lbl = domains::classify(y, lat, pp, cfg);
    if (!lbl.shell_ok) continue;
    if (lbl.kind == domains::Kind::NonResonant) {
      double Fp;
      try {
        Fp = known_part_F(y, q, lat, pp, cfg);
      } catch (const numerical_error& e) {
        return SimpleSetVerdict::fail(
            x, "competitor " + ivec_str(gp) + " series floor: " + e.what());
      }
      if (std::abs(F - Fp) < gap)
        return SimpleSetVerdict::fail(x, "condition (non-resonant gap) fails at gamma' = " +
                                             ivec_str(gp) + ", margin " +
                                             std::to_string(std::abs(F - Fp)));
    } else {
      auto near = resonance::lambda_nearest(y, t, lbl.directions, q, lat, pp, cfg, F);
      if (std::abs(near.eigenvalue - F) < gap) {
        // Escalate: eigenvalues in the window that are just our own state's
        // image inside the competitor cluster do not break simplicity.
        auto scan = resonance::scan_C_window(y, t, lbl.directions, q, lat, pp, cfg, F, gap,
                                             *gcoords);
        if (!scan.reliable)
          return SimpleSetVerdict::fail(x, "resonant-gap scan unresolved at gamma' = " +
                                               ivec_str(gp));
        for (size_t i = 0; i < scan.values.size(); ++i)
          if (scan.self_mass[i] < 0.5)
            return SimpleSetVerdict::fail(x, "condition (resonant gap) fails at gamma' = " +
                                                 ivec_str(gp) + ", margin " +
                                                 std::to_string(std::abs(scan.values[i] - F)));
      }
    }
  }
  return SimpleSetVerdict::ok(x);
}

SimpleSetVerdict in_simple_set_B_delta(const Vec& x, const Vec& t,
                                       const lattice::DeltaGeometry& geom,
                                       const potential::FourierPotential& q,
                                       const lattice::Lattice& lat,
                                       const core::PaperParams& pp6,
                                       const core::NumericConfig& cfg) {
  if (!in_B_annulus(x, pp6)) return SimpleSetVerdict::fail(x, "outside the working annulus");
  // x in V_delta(rho^alpha_1) for this delta.
  if (!domains::in_resonance_slab(x, geom.delta, pp6.rho, pp6.alpha1()))
    return SimpleSetVerdict::fail(x, "not in the delta slab");
  auto label = domains::classify(x, lat, pp6, cfg);
  if (label.order >= 2) return SimpleSetVerdict::fail(x, "in E_2 (not single-resonance)");

  lattice::DeltaDecomposition dec;
  try {
    dec = lattice::gamma_delta_decompose(x, geom, t);
  } catch (const numerical_error& e) {
    return SimpleSetVerdict::fail(x, std::string("decomposition: ") + e.what());
  }

  auto Q = potential::directional(q, geom);
  double dn = std::sqrt(geom.delta_norm2);
  int jwin = static_cast<int>(std::abs(dec.j)) + 8;
  try {
    if (!hill::in_W_rho(Q, dec.v, dn, pp6.rho, jwin))
      return SimpleSetVerdict::fail(x, "v(beta) outside W(rho)");
  } catch (const config_error& e) {
    return SimpleSetVerdict::fail(x, std::string("W(rho) window: ") + e.what());
  }

  const long long k2 = (pp6.d * pp6.q_exp) / 9 + 2;  // [d/(9 alpha)] + 2
  double E;
  try {
    auto res = resonance::predict_single_res(x, t, geom, q, lat, pp6, cfg,
                                             static_cast<int>(k2));
    E = res.predicted;
  } catch (const numerical_error& e) {
    return SimpleSetVerdict::fail(x, std::string("E-series floor: ") + e.what());
  }

  auto gcoords = lat.gamma_coords(x - t, 1e-7);
  const double win = pp6.rho_pow(pp6.alpha1()) / 3.0;
  const double gap = 2.0 * pp6.eps1;
  for (auto& gp : energy_window_points(lat, t, E - win, E + win)) {
    if (gcoords && gp == *gcoords) continue;
    Vec y = lat.gamma(gp) + t;
    auto lbl = domains::classify(y, lat, pp6, cfg);
    if (!lbl.shell_ok) continue;
    if (lbl.kind == domains::Kind::NonResonant) {
      double Fp;
      try {
        Fp = known_part_F(y, q, lat, pp6, cfg);
      } catch (const numerical_error& e) {
        return SimpleSetVerdict::fail(x, "M1 competitor " + ivec_str(gp) +
                                             " series floor: " + e.what());
      }
      if (std::abs(E - Fp) < gap)
        return SimpleSetVerdict::fail(x, "condition (168) fails at gamma' = " + ivec_str(gp));
    } else {
      // M2: only competitors on a different Gamma_delta line count.
      lattice::DeltaDecomposition dy;
      try {
        dy = lattice::gamma_delta_decompose(y, geom, t);
      } catch (const numerical_error&) {
        continue;
      }
      if (dy.beta_coords == dec.beta_coords) continue;
      auto near = resonance::lambda_nearest(y, t, lbl.directions, q, lat, pp6, cfg, E);
      if (std::abs(near.eigenvalue - E) < gap) {
        auto scan = resonance::scan_C_window(y, t, lbl.directions, q, lat, pp6, cfg, E, gap,
                                             gcoords);
        if (!scan.reliable)
          return SimpleSetVerdict::fail(x, "resonant-gap scan unresolved at gamma' = " +
                                               ivec_str(gp));
        for (size_t i = 0; i < scan.values.size(); ++i)
          if (scan.self_mass[i] < 0.5)
            return SimpleSetVerdict::fail(x, "condition (169) fails at gamma' = " + ivec_str(gp));
      }
    }
  }
  return SimpleSetVerdict::ok(x);
}

Vec surface_root_F(const Vec& direction, double rho, const potential::FourierPotential& q,
                   const lattice::Lattice& lat, const core::PaperParams& pp,
                   const core::NumericConfig& cfg, double width_mult) {
  Vec u = direction.normalized();
  auto f = [&](double s) {
    try {
      return known_part_F(s * u, q, lat, pp, cfg) - rho * rho;
    } catch (const numerical_error& e) {
      throw numerical_error(std::string("surface_root_F: ray hits a resonance slab: ") +
                            e.what());
    }
  };
  // Localize the bracket around the predicted crossing s ~ rho - F/(2 rho);
  // a short segment keeps the series away from slabs the crossing avoids.
  double f0 = f(rho);
  double s_est = rho - f0 / (2.0 * rho);
  double w = std::max(0.02, 0.75 * std::abs(f0) / rho + 0.01);
  double lo = 0, hi = 0, flo = 0, fhi = 0;
  bool bracketed = false;
  for (int attempt = 0; attempt < 5 && !bracketed; ++attempt, w *= 2.0) {
    lo = s_est - w;
    hi = s_est + w;
    flo = f(lo);
    fhi = f(hi);
    bracketed = flo < 0 && fhi > 0;
  }
  if (!bracketed)
    throw numerical_error("surface_root_F: no sign change around the predicted crossing");
  for (int it = 0; it < 200 && hi - lo > 1e-13 * rho; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  Vec root = 0.5 * (lo + hi) * u;
  auto lbl = domains::classify(root, lat, pp, cfg, width_mult);
  if (!lbl.non_resonant())
    throw numerical_error("surface_root_F: crossing point classifies as resonant");
  return root;
}

namespace {

struct MatchedLambda {
  double lambda = 0;
  double nearest_other = std::numeric_limits<double>::max();
  bool ok = false;
};

MatchedLambda matched_lambda_at(const Vec& y, const potential::FourierPotential& q,
                                const lattice::Lattice& lat, const core::PaperParams& pp,
                                const core::NumericConfig& cfg, double window_center,
                                double window_half) {
  IVec gamma;
  Vec t;
  lat.split(y, gamma, t);
  double cutoff = oracle::default_cutoff(pp.rho, q, lat, cfg);
  auto spec = oracle::assemble_and_solve(
      q, lat, t, cutoff, std::make_pair(window_center - window_half, window_center + window_half),
      cfg);
  auto m = oracle::match_eigenvalue(spec, gamma, pp, cfg.c[4], 0.5 * (pp.d - 1) * pp.q_exp);
  MatchedLambda out;
  if (!m) return out;
  out.ok = true;
  out.lambda = m->eigenvalue;
  for (int i = 0; i < spec.computed(); ++i) {
    if (i == m->n) continue;
    out.nearest_other = std::min(out.nearest_other, std::abs(spec.eigenvalues[i] - m->eigenvalue));
  }
  return out;
}

}  // namespace

IsoPoint find_isoenergetic_point(const Vec& direction, double rho,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg) {
  IsoPoint pt;
  // The bisection needs the crossing clear of the resonance slabs proper;
  // simplicity of the matched eigenvalue is verified directly below.
  pt.a = surface_root_F(direction, rho, q, lat, pp, cfg, 1.0);
  double eps = pp.eps1 / (7.0 * rho);
  pt.b = eps * direction.normalized();

  const double target = rho * rho;
  double whalf = std::max(2.0 * pp.rho_pow(pp.alpha1()), 2.0 * q.sup_bound() + 1.0);

  auto lam = [&](double s) {
    auto m = matched_lambda_at(pt.a + s * pt.b, q, lat, pp, cfg, target, whalf);
    if (!m.ok)
      throw numerical_error("find_isoenergetic_point: eigenvalue match failed along the segment");
    return m;
  };
  auto mlo = lam(-1.0), mhi = lam(1.0);
  if (!(mlo.lambda < target && mhi.lambda > target))
    throw numerical_error(
        "find_isoenergetic_point: bracket fails (segment not simple); try another ray");

  double lo = -1.0, hi = 1.0;
  MatchedLambda mmid;
  double smid = 0;
  for (int it = 0; it < 60; ++it) {
    smid = 0.5 * (lo + hi);
    mmid = lam(smid);
    pt.bisections = it + 1;
    if (std::abs(mmid.lambda - target) < 1e-8 * target) break;
    (mmid.lambda < target ? lo : hi) = smid;
  }
  pt.root = pt.a + smid * pt.b;
  pt.residual = std::abs(mmid.lambda - target);
  pt.nearest_other = mmid.nearest_other;
  if (pt.residual >= 1e-8 * target)
    throw numerical_error("find_isoenergetic_point: bisection stalled, residual " +
                          std::to_string(pt.residual));
  return pt;
}

PruneOutcome prune_P_b_and_A(const std::vector<Vec>& samples,
                             const potential::FourierPotential& q, const lattice::Lattice& lat,
                             const core::PaperParams& pp, const core::NumericConfig& cfg) {
  PruneOutcome out;
  out.total = static_cast<long long>(samples.size());
  const double rho = pp.rho;
  const double eps3 = 3.0 * pp.eps1;

  // P_b prefilter: |F(x) - F(x+b)| < 3 eps1 forces | |x|^2 - |x+b|^2 | below
  // 3 eps1 + |F_{k1-1}(x)| + envelope; c[20] is that envelope constant.
  auto pball = lat.points_in_ball(2.0 * rho + 3.0);

  std::mutex mu;
  std::atomic<long long> retained{0};
  parallel_for(static_cast<int>(samples.size()), cfg.threads, [&](int si) {
    const Vec& x = samples[si];
    std::string reason;
    double Fx = 0;
    bool x_ok = true;
    try {
      Fx = known_part_F(x, q, lat, pp, cfg);
    } catch (const numerical_error&) {
      x_ok = false;
      reason = "sample left the non-resonance domain";
    }
    const double x2 = x.squaredNorm();
    if (x_ok) {
      double envelope = eps3 + std::abs(Fx - x2) + cfg.c[20];
      for (auto& bc : pball) {
        Vec b = lat.gamma(bc);
        Vec xb = x + b;
        if (std::abs(xb.squaredNorm() - x2) > envelope) continue;
        auto lbl = domains::classify(xb, lat, pp, cfg);
        if (!lbl.non_resonant()) continue;  // P_b needs x+b in U
        double Fxb;
        try {
          Fxb = known_part_F(xb, q, lat, pp, cfg);
        } catch (const numerical_error&) {
          continue;
        }
        if (std::abs(Fx - Fxb) < eps3) {
          reason = "P_b at b = " + ivec_str(bc);
          break;
        }
      }
    }
    if (reason.empty()) {
      // Tr(A(rho)): some translate x - gamma'' lies in a resonant set with a
      // C-eigenvalue within 3 eps1 of rho^2.
      double w = pp.rho_pow(pp.alpha1());
      std::vector<IVec> gs;
      {
        // gamma'' with | |x - gamma''|^2 - rho^2 | < rho^{alpha_1}
        const int d = lat.dim();
        std::vector<long long> bound(d);
        for (int i = 0; i < d; ++i)
          bound[i] = static_cast<long long>(std::floor(
                         (std::sqrt(rho * rho + w) + x.norm()) * lat.basis().row(i).norm() /
                         (2.0 * M_PI))) +
                     2;
        IVec n(d, 0);
        std::function<void(int)> scan = [&](int level) {
          if (level == d) {
            double e = (x - lat.gamma(n)).squaredNorm();
            if (std::abs(e - rho * rho) < w) gs.push_back(n);
            return;
          }
          for (long long v = -bound[level]; v <= bound[level]; ++v) {
            n[level] = static_cast<int>(v);
            scan(level + 1);
          }
        };
        scan(0);
      }
      for (auto& gp : gs) {
        Vec y = x - lat.gamma(gp);
        auto lbl = domains::classify(y, lat, pp, cfg);
        if (lbl.order < 1) continue;
        Vec ty;
        IVec gy;
        lat.split(y, gy, ty);
        auto near = resonance::lambda_nearest(y, ty, lbl.directions, q, lat, pp, cfg, rho * rho);
        if (std::abs(near.eigenvalue - rho * rho) >= eps3) continue;
        auto self = lat.gamma_coords(x - ty, 1e-7);
        auto scan = resonance::scan_C_window(y, ty, lbl.directions, q, lat, pp, cfg, rho * rho,
                                             eps3, self);
        bool removed = !scan.reliable;
        for (size_t i = 0; i < scan.values.size() && !removed; ++i)
          if (scan.self_mass[i] < 0.5) removed = true;
        if (removed) {
          reason = "Tr(A(rho)) via gamma'' = " + ivec_str(gp);
          break;
        }
      }
    }
    if (reason.empty()) {
      ++retained;
    } else {
      std::lock_guard<std::mutex> lock(mu);
      out.removal_reasons.push_back(std::move(reason));
    }
  });
  out.retained = retained.load();
  return out;
}

Vec sample_V_delta(const lattice::DeltaGeometry& geom, double rho, double width,
                   std::mt19937_64& rng) {
  const int d = geom.dim();
  double dn = std::sqrt(geom.delta_norm2);
  Vec dhat = geom.delta / dn;
  // Orthonormal basis of H_delta.
  Mat B = geom.gamma_delta;
  for (int i = 0; i < B.rows(); ++i) {
    for (int j = 0; j < i; ++j) B.row(i) -= B.row(i).dot(B.row(j)) * B.row(j);
    B.row(i).normalize();
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double s0 = -0.5 * dn, shalf = 0.5 * width / dn;
  for (;;) {
    double s = s0 + (2.0 * u01(rng) - 1.0) * shalf;
    Vec u = Vec::Zero(d);
    for (int i = 0; i < d - 1; ++i) u += (2.0 * u01(rng) - 1.0) * 1.5 * rho * B.row(i).transpose();
    Vec x = u + s * dhat;
    double r = x.norm();
    if (r > 0.5 * rho && r < 1.5 * rho) return x;
  }
}

McMeasure mc_measure_B_delta(const lattice::DeltaGeometry& geom,
                             const potential::FourierPotential& q, const lattice::Lattice& lat,
                             const core::PaperParams& pp6, const core::NumericConfig& cfg,
                             long long n_samples, unsigned long long seed) {
  McMeasure out;
  std::atomic<long long> members{0};
  std::mutex mu;
  const double width = pp6.rho_pow(pp6.alpha1());
  parallel_for(static_cast<int>(n_samples), cfg.threads, [&](int i) {
    std::mt19937_64 rng(seed + 0x2545F4914F6CDD1Dull * (i + 1));
    Vec x = sample_V_delta(geom, pp6.rho, width, rng);
    IVec g;
    Vec t;
    lat.split(x, g, t);
    SimpleSetVerdict v = SimpleSetVerdict::fail(x, "unset");
    try {
      v = in_simple_set_B_delta(x, t, geom, q, lat, pp6, cfg);
    } catch (const std::exception& e) {
      v = SimpleSetVerdict::fail(x, std::string("error: ") + e.what());
    }
    if (v.member) {
      ++members;
    } else {
      std::lock_guard<std::mutex> lock(mu);
      std::string key = v.failed_condition.substr(0, v.failed_condition.find(" at "));
      out.rejection_counts[key]++;
    }
  });
  out.evaluated = n_samples;
  out.ci = wilson_ci(members.load(), n_samples);
  return out;
}

}  // namespace blochpert::iso
