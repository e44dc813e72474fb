#include "blochpert/resonance.hpp"

#include <list>
#include <set>
#include <sstream>
#include <tuple>

namespace blochpert::resonance {

namespace {

CMat assemble_C(const domains::BkIndexSet& set, const potential::FourierPotential& q) {
  const int n = static_cast<int>(set.members.size());
  CMat C = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    C(i, i) = cd(set.members[i].squaredNorm(), 0);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      C(i, j) += q.coeff(ivec_sub(set.member_coords[i], set.member_coords[j]));
    }
  }
  return C;
}

}  // namespace

ResonanceMatrix build_C(const Vec& center, const Vec& t, const std::vector<IVec>& directions,
                        const potential::FourierPotential& q, const lattice::Lattice& lat,
                        const core::PaperParams& pp, const core::NumericConfig& cfg) {
  ResonanceMatrix rm;
  rm.index = domains::build_Bk(center, t, directions, lat, pp, cfg);
  if (rm.index.count() > cfg.dense_cap)
    throw numerical_error("build_C: b_k = " + std::to_string(rm.index.count()) +
                          " exceeds the dense cap " + std::to_string(cfg.dense_cap) +
                          " (use lambda_nearest or lower rho)");
  rm.matrix = assemble_C(rm.index, q);
  double herm = (rm.matrix - rm.matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm != 0.0)
    throw numerical_error("build_C: assembly not exactly self-adjoint (reality defect " +
                          std::to_string(herm) + " in the potential?)");
  rm.eigenvalues = linalg::dense_hermitian_values(rm.matrix);
  return rm;
}

namespace {

linalg::SpMat banded_sparse_C(const domains::BkIndexSet& set,
                              const potential::FourierPotential& q,
                              const core::PaperParams& pp, const core::NumericConfig& cfg,
                              std::vector<int>& keep) {
  keep.clear();
  keep.reserve(set.members.size());
  if (cfg.resonance_band > 0) {
    double lo = pp.rho - cfg.resonance_band, hi = pp.rho + cfg.resonance_band;
    for (size_t i = 0; i < set.members.size(); ++i) {
      double r = set.members[i].norm();
      if (r >= lo && r <= hi) keep.push_back(static_cast<int>(i));
    }
  } else {
    for (size_t i = 0; i < set.members.size(); ++i) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) throw numerical_error("banded_sparse_C: empty (banded) index set");
  std::unordered_map<IVec, int, IVecHash> pos;
  for (size_t i = 0; i < keep.size(); ++i) pos.emplace(set.member_coords[keep[i]], i);
  std::vector<Eigen::Triplet<cd>> trip;
  for (size_t i = 0; i < keep.size(); ++i) {
    trip.emplace_back(i, i, cd(set.members[keep[i]].squaredNorm(), 0));
    for (auto& [g1, c] : q.coeffs()) {
      IVec other = ivec_sub(set.member_coords[keep[i]], g1);
      auto it = pos.find(other);
      if (it != pos.end() && it->second != static_cast<int>(i))
        trip.emplace_back(i, it->second, c);
    }
  }
  linalg::SpMat C(keep.size(), keep.size());
  C.setFromTriplets(trip.begin(), trip.end());
  C.makeCompressed();
  return C;
}

}  // namespace

WindowScan scan_C_window(const Vec& center, const Vec& t, const std::vector<IVec>& directions,
                         const potential::FourierPotential& q, const lattice::Lattice& lat,
                         const core::PaperParams& pp, const core::NumericConfig& cfg,
                         double sigma, double half_width,
                         const std::optional<IVec>& self_coords) {
  auto set = domains::build_Bk(center, t, directions, lat, pp, cfg);
  std::vector<int> keep;
  auto C = banded_sparse_C(set, q, pp, cfg, keep);
  int self_row = -1;
  if (self_coords) {
    for (size_t i = 0; i < keep.size(); ++i)
      if (set.member_coords[keep[i]] == *self_coords) {
        self_row = static_cast<int>(i);
        break;
      }
  }
  WindowScan out;
  linalg::WindowOptions opt;
  opt.seed = cfg.seed ^ 0x51de0ULL;
  opt.residual_tol = std::max(1e-9, 1e-4 * half_width);
  opt.max_krylov = 360;
  try {
    auto res = linalg::shift_invert_window(C, sigma, half_width, opt);
    for (size_t i = 0; i < res.eigenvalues.size(); ++i) {
      out.values.push_back(res.eigenvalues[i]);
      out.self_mass.push_back(self_row >= 0 ? std::norm(res.eigenvectors(self_row, i)) : 0.0);
    }
  } catch (const numerical_error&) {
    // Retry once with a nudged shift (sigma may sit on an eigenvalue), then
    // give up and mark the scan unreliable.
    try {
      auto res = linalg::shift_invert_window(C, sigma + 0.37 * half_width, 1.4 * half_width, opt);
      for (size_t i = 0; i < res.eigenvalues.size(); ++i) {
        if (std::abs(res.eigenvalues[i] - sigma) > half_width) continue;
        out.values.push_back(res.eigenvalues[i]);
        out.self_mass.push_back(self_row >= 0 ? std::norm(res.eigenvectors(self_row, i)) : 0.0);
      }
    } catch (const numerical_error&) {
      out.reliable = false;
    }
  }
  return out;
}

ResonanceMatrix predict_resonant(const Vec& center, const Vec& t,
                                 const std::vector<IVec>& directions,
                                 const potential::FourierPotential& q,
                                 const lattice::Lattice& lat, const core::PaperParams& pp,
                                 const core::NumericConfig& cfg) {
  return build_C(center, t, directions, q, lat, pp, cfg);
}

linalg::NearestEigen lambda_nearest(const Vec& center, const Vec& t,
                                    const std::vector<IVec>& directions,
                                    const potential::FourierPotential& q,
                                    const lattice::Lattice& lat, const core::PaperParams& pp,
                                    const core::NumericConfig& cfg, double sigma) {
  auto set = domains::build_Bk(center, t, directions, lat, pp, cfg);
  std::vector<int> keep;
  keep.reserve(set.members.size());
  if (cfg.resonance_band > 0) {
    double lo = pp.rho - cfg.resonance_band, hi = pp.rho + cfg.resonance_band;
    for (size_t i = 0; i < set.members.size(); ++i) {
      double r = set.members[i].norm();
      if (r >= lo && r <= hi) keep.push_back(static_cast<int>(i));
    }
  } else {
    for (size_t i = 0; i < set.members.size(); ++i) keep.push_back(static_cast<int>(i));
  }
  if (keep.empty()) throw numerical_error("lambda_nearest: empty (banded) index set");

  std::unordered_map<IVec, int, IVecHash> pos;
  for (size_t i = 0; i < keep.size(); ++i) pos.emplace(set.member_coords[keep[i]], i);
  std::vector<Eigen::Triplet<cd>> trip;
  for (size_t i = 0; i < keep.size(); ++i) {
    trip.emplace_back(i, i, cd(set.members[keep[i]].squaredNorm(), 0));
    for (auto& [g1, c] : q.coeffs()) {
      IVec other = ivec_sub(set.member_coords[keep[i]], g1);
      auto it = pos.find(other);
      if (it != pos.end() && it->second != static_cast<int>(i))
        trip.emplace_back(i, it->second, c);
    }
  }
  linalg::SpMat C(keep.size(), keep.size());
  C.setFromTriplets(trip.begin(), trip.end());
  C.makeCompressed();
  return linalg::nearest_eigenvalue(C, sigma, 120, 1e-8, cfg.seed ^ 0x51ce);
}

// ----------------------------------------------------------------------------

SingleResContext make_single_res_context(const Vec& x, const Vec& t,
                                         const lattice::DeltaGeometry& geom,
                                         const potential::FourierPotential& q,
                                         const lattice::Lattice& lat,
                                         const core::PaperParams& pp,
                                         const core::NumericConfig& cfg) {
  SingleResContext ctx;
  ctx.geom = geom;
  ctx.lat = lat;
  ctx.x = x;
  ctx.t = t;
  ctx.pp = pp;
  ctx.cfg = cfg;
  ctx.center = lattice::gamma_delta_decompose(x, geom, t);
  ctx.Q = potential::directional(q, geom);
  double dn = std::sqrt(geom.delta_norm2);
  ctx.r1 = pp.rho_pow(pp.alpha1()) / (2.0 * dn) + 2.0 * dn;

  // Transverse support restricted to Gamma(rho^alpha), decomposed per (48).
  double rad = pp.rho_pow(pp.alpha());
  for (auto& [g, c] : q.coeffs()) {
    Vec gv = lat.gamma(g);
    if (gv.norm() >= rad) continue;
    double axial = gv.dot(geom.delta) / geom.delta_norm2;
    Vec perp = gv - axial * geom.delta;
    if (perp.norm() < 1e-12) continue;  // directional part, belongs to Q
    auto bc = geom.beta_coords(perp, 1e-7);
    if (!bc) throw numerical_error("transverse decomposition left Gamma_delta");
    double n1_real = axial + geom.beta(*bc).dot(geom.delta_star) / (2.0 * M_PI);
    auto [n1, defect] = nearest_int(n1_real);
    if (defect > 1e-6)
      throw numerical_error("transverse decomposition: n1 not integral (defect " +
                            std::to_string(defect) + ")");
    ctx.transverse.push_back({g, c, *bc, n1});
  }

  // Hill cache sized for the chain window.
  int jr = static_cast<int>(std::ceil(cfg.sprime_j_cap > 0
                                          ? std::min(cfg.sprime_j_cap, 12.0 * ctx.r1) / dn
                                          : 12.0 * ctx.r1 / dn));
  int jmax = static_cast<int>(std::abs(ctx.center.j)) + jr + 2;
  int n_modes = hill::default_modes(jmax, ctx.Q, cfg.hill_mode_margin);
  ctx.hill = std::make_shared<hill::HillCache>(ctx.Q, dn, n_modes);

  const auto& hs = ctx.hill->at(ctx.center.v);
  ctx.lambda_jb = (ctx.center.beta + ctx.center.tau).squaredNorm() + hs.mu_or_free(ctx.center.j);
  return ctx;
}

namespace {

double v_of_offset(const SingleResContext& ctx, const IVec& beta_coords) {
  return lattice::v_of_beta(beta_coords, ctx.t, ctx.geom);
}

// Integer Fourier shift of the coupling between v_from and v_to for a
// transverse entry; throws if the delta* pairing breaks.
long long phase_shift(const SingleResContext& ctx, const SingleResContext::TransverseEntry& e,
                      double v_from, double v_to) {
  double bs = ctx.geom.beta(e.beta1).dot(ctx.geom.delta_star) / (2.0 * M_PI);
  double n_real = double(e.n1) - bs + v_from - v_to;
  auto [n, defect] = nearest_int(n_real);
  if (defect > 1e-6)
    throw numerical_error("coupling phase shift not integral (defect " + std::to_string(defect) +
                          "); delta* pairing broken");
  return n;
}

}  // namespace

cd coupling_a(const SingleResContext& ctx, long long n1, const IVec& beta1, long long j,
              const IVec& beta, long long j_to, const IVec& beta_to) {
  double v_from = v_of_offset(ctx, beta);
  double v_to = v_of_offset(ctx, beta_to);
  SingleResContext::TransverseEntry fake{{}, cd(1, 0), beta1, n1};
  long long n = phase_shift(ctx, fake, v_from, v_to);
  const auto& from = ctx.hill->at(v_from);
  const auto& to = ctx.hill->at(v_to);
  const auto* pf = from.find_j(j);
  const auto* pt = to.find_j(j_to);
  if (!pf || !pt) throw numerical_error("coupling_a: Hill index out of the solved window");
  cd acc(0, 0);
  for (auto& [m, c] : pf->phi_coeffs) acc += c * std::conj(pt->coeff(static_cast<int>(m + n)));
  return acc;
}

cd A_coeff(const SingleResContext& ctx, long long jp, const IVec& betap, long long j1,
           const IVec& beta1) {
  cd acc(0, 0);
  IVec beta_to = ivec_add(betap, beta1);
  for (auto& e : ctx.transverse) {
    if (e.beta1 != beta1) continue;
    acc += e.coeff * coupling_a(ctx, e.n1, e.beta1, jp, betap, jp + j1, beta_to);
  }
  return acc;
}

CouplingTable coupling_table(const SingleResContext& ctx, long long jp, const IVec& betap,
                             double r) {
  CouplingTable table;
  double dn = std::sqrt(ctx.geom.delta_norm2);
  long long jwin = static_cast<long long>(std::floor(9.0 * r / dn));
  std::set<IVec> steps;
  for (auto& e : ctx.transverse) steps.insert(e.beta1);
  for (auto& b1 : steps) {
    for (long long j1 = -jwin; j1 <= jwin; ++j1) {
      cd a = A_coeff(ctx, jp, betap, j1, b1);
      if (std::abs(a) > 0) {
        table.entries[{j1, b1}] = a;
        table.l1 += std::abs(a);
      }
    }
  }
  return table;
}

// ----------------------------------------------------------------------------

SPrimeEngine::SPrimeEngine(SingleResContext ctx) : ctx_(std::move(ctx)) {
  const auto& geom = ctx_.geom;
  const double dn = std::sqrt(geom.delta_norm2);
  const int K = std::min<long long>(2 * ctx_.pp.p1, ctx_.cfg.sprime_depth_cap);

  // Reachable Gamma_delta offsets within K steps.
  std::set<IVec> step_set;
  for (auto& e : ctx_.transverse) step_set.insert(e.beta1);
  std::set<IVec> reach;
  IVec zero(geom.dim() - 1, 0);
  reach.insert(zero);
  std::set<IVec> frontier = reach;
  for (int k = 0; k < K; ++k) {
    std::set<IVec> next;
    for (auto& o : frontier)
      for (auto& s : step_set) next.insert(ivec_add(o, s));
    frontier = std::move(next);
    reach.insert(frontier.begin(), frontier.end());
  }
  offsets_.assign(reach.begin(), reach.end());
  for (size_t i = 0; i < offsets_.size(); ++i) offset_index_.emplace(offsets_[i], i);

  double jcap = ctx_.cfg.sprime_j_cap > 0 ? std::min(ctx_.cfg.sprime_j_cap, 12.0 * ctx_.r1)
                                          : 12.0 * ctx_.r1;
  jr_ = static_cast<int>(std::ceil(jcap / dn));
  j_lo_ = ctx_.center.j - jr_;
  jspan_ = 2 * jr_ + 1;

  // State table: lambda_{j', beta+offset}.
  lambdas_.assign(offsets_.size() * jspan_, 0.0);
  for (size_t oi = 0; oi < offsets_.size(); ++oi) {
    IVec bc = ivec_add(ctx_.center.beta_coords, offsets_[oi]);
    Vec bv = geom.beta(bc) + ctx_.center.tau;
    double perp2 = bv.squaredNorm();
    const auto& hs = ctx_.hill->at(v_of_offset(ctx_, bc));
    for (int r = 0; r < jspan_; ++r)
      lambdas_[oi * jspan_ + r] = perp2 + hs.mu_or_free(j_lo_ + r);
  }
  state0_ = static_cast<int>(offset_index_.at(zero)) * jspan_ + static_cast<int>(ctx_.center.j - j_lo_);

  // Blocks: for each (from offset, step beta1), the matrix
  // [to j][from j] = A(j_from, beta_from, j_to, beta_from + beta1).
  const int modes = ctx_.hill->n_modes();
  const int nm = 2 * modes + 1;
  auto phi_matrix = [&](const hill::HillSolveResult& hs) {
    CMat M = CMat::Zero(nm, jspan_);
    for (int r = 0; r < jspan_; ++r) {
      long long j = j_lo_ + r;
      if (const auto* p = hs.find_j(j)) {
        for (auto& [m, c] : p->phi_coeffs) M(m + modes, r) = c;
      } else if (std::llabs(j) <= modes) {
        M(static_cast<int>(j) + modes, r) = 1.0;  // free-mode fallback
      }
    }
    return M;
  };

  std::map<long long, CMat> phis;  // keyed by rounded v
  auto phi_for = [&](double v) -> const CMat& {
    long long key = llround(frac01(v) * 1e12);
    auto it = phis.find(key);
    if (it == phis.end()) it = phis.emplace(key, phi_matrix(ctx_.hill->at(v))).first;
    return it->second;
  };

  std::map<std::tuple<long long, long long, IVec>, const CMat*> block_cache;
  std::list<CMat> block_store;
  for (size_t oi = 0; oi < offsets_.size(); ++oi) {
    IVec from_bc = ivec_add(ctx_.center.beta_coords, offsets_[oi]);
    double v_from = v_of_offset(ctx_, from_bc);
    for (auto& s : step_set) {
      IVec to_off = ivec_add(offsets_[oi], s);
      auto oit = offset_index_.find(to_off);
      if (oit == offset_index_.end()) continue;
      IVec to_bc = ivec_add(ctx_.center.beta_coords, to_off);
      double v_to = v_of_offset(ctx_, to_bc);
      long long kf = llround(frac01(v_from) * 1e12), kt = llround(frac01(v_to) * 1e12);
      std::tuple<long long, long long, IVec> key{kf, kt, s};
      auto bit = block_cache.find(key);
      if (bit == block_cache.end()) {
        // Mode-space operator G = sum over entries with this beta1 of c * Shift_n.
        CMat G = CMat::Zero(nm, nm);
        for (auto& e : ctx_.transverse) {
          if (e.beta1 != s) continue;
          long long n = phase_shift(ctx_, e, v_from, v_to);
          // (Shift_n u)_{m'} = u_{m' - n}: entry (m', m) with m' = m + n.
          for (int m = -modes; m <= modes; ++m) {
            long long mp = m + n;
            if (mp >= -modes && mp <= modes)
              G(static_cast<int>(mp) + modes, m + modes) += e.coeff;
          }
        }
        CMat block = phi_for(v_to).adjoint() * (G * phi_for(v_from));
        block_store.push_back(std::move(block));
        bit = block_cache.emplace(key, &block_store.back()).first;
      }
      steps_.push_back({static_cast<int>(oi), static_cast<int>(oit->second), *bit->second});
    }
  }
}

void SPrimeEngine::run_chain(double a, int k_max, std::vector<double>& s_values) {
  min_denom_cross_ = std::numeric_limits<double>::max();
  min_denom_line_ = std::numeric_limits<double>::max();
  const double dn = std::sqrt(ctx_.geom.delta_norm2);
  const double floor_cross = 0.5 * ctx_.pp.rho_pow(ctx_.pp.alpha2());
  const double floor_line = 1.0 / std::log(ctx_.pp.rho);
  // The cross-line floor is only certified for |j' delta| below this window;
  // outside it the couplings decay fast and only genuine blowups are fatal.
  const double jwin_cross = 0.5 * ctx_.pp.rho_pow(0.5 * ctx_.pp.alpha2()) / dn;
  const double hard_floor = 1e-8;
  const int zero_offset = offset_index_.at(IVec(ctx_.geom.dim() - 1, 0));
  const long long n_states = static_cast<long long>(lambdas_.size());

  s_values.assign(k_max, 0.0);
  std::vector<cd> cur(n_states, cd(0, 0)), nxt;
  cur[state0_] = cd(1, 0);

  double r_i = ctx_.r1;
  for (int step = 1; step <= k_max; ++step) {
    nxt.assign(n_states, cd(0, 0));
    long long jwin = static_cast<long long>(std::floor(9.0 * r_i / dn));
    for (auto& st : steps_) {
      const long long base_from = st.from_offset * (long long)jspan_;
      const long long base_to = st.to_offset * (long long)jspan_;
      for (int rf = 0; rf < jspan_; ++rf) {
        cd amp = cur[base_from + rf];
        if (amp == cd(0, 0)) continue;
        int lo = static_cast<int>(std::max<long long>(0, rf - jwin));
        int hi = static_cast<int>(std::min<long long>(jspan_ - 1, rf + jwin));
        for (int rt = lo; rt <= hi; ++rt) nxt[base_to + rt] += st.block(rt, rf) * amp;
      }
    }
    // Divide by (a - lambda), enforce the denominator floors, drop the origin.
    for (long long sidx = 0; sidx < n_states; ++sidx) {
      if (nxt[sidx] == cd(0, 0)) continue;
      if (sidx == state0_) {
        nxt[sidx] = cd(0, 0);  // chains avoid (j, beta) in the interior
        continue;
      }
      double denom = a - lambdas_[sidx];
      bool on_line = (sidx / jspan_) == zero_offset;
      long long jp = j_lo_ + static_cast<long long>(sidx % jspan_);
      bool in_cross_window = std::abs(double(jp) - double(ctx_.center.j)) * dn <= jwin_cross;
      double floor = on_line ? floor_line : (in_cross_window ? floor_cross : hard_floor);
      (on_line ? min_denom_line_ : min_denom_cross_) =
          std::min(on_line ? min_denom_line_ : min_denom_cross_, std::abs(denom));
      if (std::abs(denom) <= floor) {
        std::ostringstream os;
        os << "S'_k denominator " << denom << " below the " << (on_line ? "ln-rho" : "rho^alpha2/2")
           << " floor " << floor << " at state offset " << sidx
           << " (v outside W(rho) or x misclassified?)";
        throw numerical_error(os.str());
      }
      nxt[sidx] /= denom;
    }
    // Close the chain: S'_step = sum_sigma A(sigma -> sigma_0) nxt_sigma.
    // The closing hop carries no Q(rho^alpha, 9r) window of its own.
    cd close(0, 0);
    const int rt0 = static_cast<int>(state0_ - zero_offset * (long long)jspan_);
    for (auto& st : steps_) {
      if (st.to_offset != zero_offset) continue;
      const long long base_from = st.from_offset * (long long)jspan_;
      for (int rf = 0; rf < jspan_; ++rf) {
        cd amp = nxt[base_from + rf];
        if (amp == cd(0, 0)) continue;
        close += st.block(rt0, rf) * amp;
      }
    }
    if (std::abs(close.imag()) > 1e-9 * std::max(1.0, std::abs(close.real())))
      throw numerical_error("S'_k: imaginary defect " + std::to_string(close.imag()));
    s_values[step - 1] = close.real();
    cur.swap(nxt);
    r_i *= 10.0;
  }
}

double SPrimeEngine::S_prime_k(double a, int k) {
  if (k < 1) throw config_error("S_prime_k: k must be >= 1");
  if (std::abs(a - ctx_.lambda_jb) >= 1.0 / std::log(ctx_.pp.rho))
    throw config_error("S_prime_k: |a - lambda_{j,beta}| must stay below 1/ln(rho)");
  std::vector<double> s;
  run_chain(a, k, s);
  return s[k - 1];
}

SingleResResult SPrimeEngine::E_series(int k_max) {
  if (k_max < 1) throw config_error("E_series: k_max must be >= 1");
  SingleResResult res;
  res.lambda_jb = ctx_.lambda_jb;
  res.E.assign(k_max, 0.0);
  const int K = static_cast<int>(std::min<long long>(2 * ctx_.pp.p1, ctx_.cfg.sprime_depth_cap));
  std::vector<double> s;
  for (int stage = 1; stage < k_max; ++stage) {
    double a = res.lambda_jb + res.E[stage - 1];
    run_chain(a, K, s);
    double sum = 0;
    for (double v : s) sum += v;
    res.E[stage] = sum;
    res.min_denom_cross = std::min(res.min_denom_cross, min_denom_cross_);
    res.min_denom_line = std::min(res.min_denom_line, min_denom_line_);
  }
  res.predicted = res.lambda_jb + res.E[k_max - 1];
  return res;
}

SingleResResult predict_single_res(const Vec& x, const Vec& t,
                                   const lattice::DeltaGeometry& geom,
                                   const potential::FourierPotential& q,
                                   const lattice::Lattice& lat, const core::PaperParams& pp,
                                   const core::NumericConfig& cfg, int k_max) {
  SPrimeEngine engine(make_single_res_context(x, t, geom, q, lat, pp, cfg));
  return engine.E_series(k_max);
}

GradECheck grad_E_check(const Vec& x, const Vec& t, const lattice::DeltaGeometry& geom,
                        const potential::FourierPotential& q, const lattice::Lattice& lat,
                        const core::PaperParams& pp, const core::NumericConfig& cfg, int k,
                        double h) {
  if (h <= 0) throw config_error("grad_E_check: step must be positive");
  // Orthonormal basis of H_delta from the Gamma_delta generators.
  Mat B = geom.gamma_delta;
  for (int i = 0; i < B.rows(); ++i) {
    for (int j = 0; j < i; ++j) B.row(i) -= B.row(i).dot(B.row(j)) * B.row(j);
    B.row(i).normalize();
  }
  auto ek = [&](const Vec& shift) {
    return predict_single_res(x + shift, t + shift, geom, q, lat, pp, cfg, k + 1).E[k];
  };
  GradECheck out;
  out.h = h;
  out.grad = Vec::Zero(B.rows());
  for (int i = 0; i < B.rows(); ++i) {
    Vec e = h * B.row(i).transpose();
    out.grad[i] = (ek(e) - ek(-e)) / (2 * h);
    out.max_abs = std::max(out.max_abs, std::abs(out.grad[i]));
  }
  return out;
}

}  // namespace blochpert::resonance
