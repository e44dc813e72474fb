#include "blochpert/experiment.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

namespace blochpert::experiment {

using json = nlohmann::json;

core::PaperParams ExperimentSpec::params(double rho_value) const {
  long long s = smoothness;
  if (s <= 0)
    s = section6 ? core::PaperParams::s0_resonance(dimension)
                 : core::PaperParams::s0_main(dimension);
  return section6 ? core::PaperParams::resonance_system(dimension, s, rho_value)
                  : core::PaperParams::main_system(dimension, s, rho_value);
}

namespace {

Vec to_vec(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

void apply_numeric(core::NumericConfig& cfg, const json& j) {
  if (j.contains("oracle_cutoff_margin")) cfg.oracle_cutoff_margin = j["oracle_cutoff_margin"];
  if (j.contains("eig_tolerance")) cfg.eig_tolerance = j["eig_tolerance"];
  if (j.contains("mc_samples")) cfg.mc_samples = j["mc_samples"];
  if (j.contains("slab_ball_mult")) cfg.slab_ball_mult = j["slab_ball_mult"];
  if (j.contains("bk_cap")) cfg.bk_cap = j["bk_cap"];
  if (j.contains("dense_cap")) cfg.dense_cap = j["dense_cap"];
  if (j.contains("chain_depth_cap")) cfg.chain_depth_cap = j["chain_depth_cap"];
  if (j.contains("sprime_depth_cap")) cfg.sprime_depth_cap = j["sprime_depth_cap"];
  if (j.contains("sprime_j_cap")) cfg.sprime_j_cap = j["sprime_j_cap"];
  if (j.contains("f_series_tail_tol")) cfg.f_series_tail_tol = j["f_series_tail_tol"];
  if (j.contains("hill_mode_margin")) cfg.hill_mode_margin = j["hill_mode_margin"];
  if (j.contains("resonance_band")) cfg.resonance_band = j["resonance_band"];
}

}  // namespace

ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error(path + ": " + e.what());
  }
  ExperimentSpec spec;
  try {
    spec.dimension = j.value("dimension", 2);
    spec.smoothness = j.value("smoothness", 0LL);
    spec.section6 = j.value("section6", false);
    spec.mode = j.value("mode", "spectrum");
    spec.out_path = j.value("out", "");
    spec.seed = j.value("seed", 1ULL);
    spec.threads = j.value("threads", 1);
    if (j.contains("rho"))
      for (auto& r : j["rho"]) spec.rho.push_back(r.get<double>());
    if (spec.rho.empty()) spec.rho.push_back(10.0);

    if (!j.contains("lattice") || !j["lattice"].contains("basis"))
      throw config_error("config needs lattice.basis");
    auto rows = j["lattice"]["basis"];
    if (static_cast<int>(rows.size()) != spec.dimension)
      throw config_error("lattice.basis needs " + std::to_string(spec.dimension) + " rows");
    Mat basis(spec.dimension, spec.dimension);
    for (int r = 0; r < spec.dimension; ++r) {
      if (static_cast<int>(rows[r].size()) != spec.dimension)
        throw config_error("lattice.basis row " + std::to_string(r + 1) + " has wrong length");
      for (int c = 0; c < spec.dimension; ++c) basis(r, c) = rows[r][c].get<double>();
    }
    spec.lat = lattice::Lattice::from_basis(basis);
    spec.normalize_basis = j["lattice"].value("normalize", false);
    if (spec.normalize_basis) spec.lat = spec.lat.normalized(&spec.basis_scale);

    if (j.contains("potential")) {
      auto& pj = j["potential"];
      if (pj.contains("file")) {
        spec.q = potential::load(pj["file"].get<std::string>(), spec.dimension,
                                 spec.smoothness, pj.value("enforce_reality", true));
      } else if (pj.contains("cosines")) {
        potential::FourierPotential q;
        for (auto& cj : pj["cosines"]) {
          q = q.plus(potential::FourierPotential::cosine(spec.dimension, cj.value("axis", 0),
                                                         cj.value("amplitude", 1.0)));
        }
        spec.q = q;
      }
    }
    if (j.contains("t")) spec.t = to_vec(j["t"]);
    if (spec.t.size() == 0) spec.t = Vec::Zero(spec.dimension);
    if (j.contains("points"))
      for (auto& p : j["points"]) spec.input_points.push_back(to_vec(p));
    spec.n_points = j.value("n_points", 16);
    if (j.contains("delta"))
      for (auto& c : j["delta"]) spec.delta.push_back(c.get<int>());
    if (j.contains("v_list"))
      for (auto& v : j["v_list"]) spec.v_list.push_back(v.get<double>());
    spec.j_range = j.value("j_range", 6);
    if (j.contains("constants"))
      for (int i = 1; i <= 23; ++i) {
        std::string key = "c" + std::to_string(i);
        if (j["constants"].contains(key)) spec.cfg.c[i] = j["constants"][key].get<double>();
      }
    if (j.contains("numeric")) apply_numeric(spec.cfg, j["numeric"]);
    if (j.contains("acceptance")) {
      auto& aj = j["acceptance"];
      spec.accept.mc_samples = aj.value("mc_samples", spec.accept.mc_samples);
      spec.accept.bdelta_samples = aj.value("bdelta_samples", spec.accept.bdelta_samples);
      spec.accept.prune_rays = aj.value("prune_rays", spec.accept.prune_rays);
      spec.accept.points_per_rho = aj.value("points_per_rho", spec.accept.points_per_rho);
      spec.accept.smoothness = aj.value("smoothness", 0LL);
      spec.accept.smoothness6 = aj.value("smoothness6", 0LL);
    }
  } catch (const json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
  if (!spec.cfg.all_positive()) throw config_error("numeric configuration must be positive");
  return spec;
}

namespace {

struct Csv {
  std::ofstream file;
  std::ostream* os;
  explicit Csv(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      os = &fallback;
    } else {
      file.open(path);
      if (!file) throw config_error("cannot open output file: " + path);
      os = &file;
    }
    os->precision(12);
  }
  template <class T>
  Csv& operator<<(const T& v) {
    *os << v;
    return *this;
  }
};

void emit_point(Csv& csv, const Vec& x) {
  for (int i = 0; i < x.size(); ++i) csv << x[i] << ",";
}

std::vector<Vec> mode_points(const ExperimentSpec& spec, double rho) {
  if (!spec.input_points.empty()) return spec.input_points;
  std::vector<Vec> pts;
  std::mt19937_64 rng(spec.seed + static_cast<unsigned long long>(rho * 1000));
  for (int i = 0; i < spec.n_points; ++i)
    pts.push_back(domains::sphere_sample(spec.dimension, rho, rng));
  return pts;
}

int run_spectrum(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,n,lambda\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    double cutoff = oracle::default_cutoff(rho, spec.q, spec.lat, spec.cfg);
    std::optional<std::pair<double, double>> window;
    // Dense below the cap, else a window around rho^2.
    if (M_PI * std::pow(cutoff, spec.dimension) > spec.cfg.dense_cap)
      window = std::make_pair(rho * rho - 4 * pp.rho_pow(pp.alpha1()),
                              rho * rho + 4 * pp.rho_pow(pp.alpha1()));
    auto s = oracle::assemble_and_solve(spec.q, spec.lat, spec.t, cutoff, window, spec.cfg);
    for (int i = 0; i < s.computed(); ++i)
      csv << rho << "," << i << "," << s.eigenvalues[i] << "\n";
  }
  return 0;
}

int run_classify(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,x...,kind,order,shell_ok,delta,error\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    for (auto& x : mode_points(spec, rho)) {
      csv << rho << ",";
      emit_point(csv, x);
      try {
        auto lbl = domains::classify(x, spec.lat, pp, spec.cfg);
        const char* kind = lbl.kind == domains::Kind::NonResonant  ? "nonresonant"
                           : lbl.kind == domains::Kind::SingleResonant ? "single"
                                                                       : "resonant";
        csv << kind << "," << lbl.order << "," << (lbl.shell_ok ? 1 : 0) << ","
            << (lbl.delta.empty() ? "-" : ivec_str(lbl.delta)) << ",\n";
      } catch (const std::exception& e) {
        csv << ",,,," << e.what() << "\n";
      }
    }
  }
  return 0;
}

int run_hill(ExperimentSpec& spec, Csv& csv) {
  if (spec.delta.empty()) spec.delta = IVec(spec.dimension, 0), spec.delta[0] = 1;
  auto geom = lattice::sublattice_geometry(spec.lat, spec.delta);
  auto Q = potential::directional(spec.q, geom);
  std::vector<double> vs = spec.v_list;
  if (vs.empty()) vs = {0.0, 0.25, 0.5};
  csv << "v,j,mu,ambiguous\n";
  int n_modes = hill::default_modes(spec.j_range, Q, spec.cfg.hill_mode_margin);
  for (double v : vs) {
    auto hs = hill::solve_Tv(Q, frac01(v), std::sqrt(geom.delta_norm2), n_modes);
    for (long long jj = -spec.j_range; jj <= spec.j_range; ++jj) {
      if (const auto* p = hs.find_j(jj))
        csv << frac01(v) << "," << jj << "," << p->mu << "," << (p->ambiguous ? 1 : 0) << "\n";
    }
  }
  return 0;
}

int run_predict_nonres(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,x...,order,predicted,min_denominator,error\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    for (auto& x : mode_points(spec, rho)) {
      csv << rho << ",";
      emit_point(csv, x);
      try {
        int order = std::min<long long>(3, pp.p1);
        auto res = nonres::F_series(x, order, spec.q, spec.lat, pp, spec.cfg);
        csv << res.order << "," << res.predicted << "," << res.min_denominator << ",\n";
      } catch (const std::exception& e) {
        csv << ",,," << e.what() << "\n";
      }
    }
  }
  return 0;
}

int run_predict_res(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,x...,order,b_k,lambda_nearest_rho2,error\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    for (auto& x : mode_points(spec, rho)) {
      csv << rho << ",";
      emit_point(csv, x);
      try {
        auto lbl = domains::classify(x, spec.lat, pp, spec.cfg);
        if (lbl.order < 1) {
          csv << "0,,,not resonant\n";
          continue;
        }
        IVec g;
        Vec t;
        spec.lat.split(x, g, t);
        auto set = domains::build_Bk(x, t, lbl.directions, spec.lat, pp, spec.cfg);
        auto near = resonance::lambda_nearest(x, t, lbl.directions, spec.q, spec.lat, pp,
                                              spec.cfg, rho * rho);
        csv << lbl.order << "," << set.count() << "," << near.eigenvalue << ",\n";
      } catch (const std::exception& e) {
        csv << ",,," << e.what() << "\n";
      }
    }
  }
  return 0;
}

int run_predict_singleres(ExperimentSpec& spec, Csv& csv) {
  if (spec.delta.empty()) spec.delta = IVec(spec.dimension, 0), spec.delta[0] = 1;
  auto geom = lattice::sublattice_geometry(spec.lat, spec.delta);
  csv << "rho,x...,j,v,lambda_jb,E1,predicted,min_denom_cross,error\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    for (auto& x : mode_points(spec, rho)) {
      csv << rho << ",";
      emit_point(csv, x);
      try {
        IVec g;
        Vec t;
        spec.lat.split(x, g, t);
        auto dec = lattice::gamma_delta_decompose(x, geom, t);
        auto res = resonance::predict_single_res(x, t, geom, spec.q, spec.lat, pp, spec.cfg, 2);
        csv << dec.j << "," << dec.v << "," << res.lambda_jb << "," << res.E[1] << ","
            << res.predicted << "," << res.min_denom_cross << ",\n";
      } catch (const std::exception& e) {
        csv << ",,,,,," << e.what() << "\n";
      }
    }
  }
  return 0;
}

int run_bloch(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,gamma...,err_order1,err_order2,tail,error\n";
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    double cutoff = oracle::default_cutoff(rho, spec.q, spec.lat, spec.cfg);
    auto window = std::make_pair(rho * rho - 3 * pp.rho_pow(pp.alpha1()) - 8,
                                 rho * rho + 3 * pp.rho_pow(pp.alpha1()) + 8);
    auto s = oracle::assemble_and_solve(spec.q, spec.lat, spec.t, cutoff, window, spec.cfg);
    int emitted = 0;
    for (auto& g : s.basis_coords) {
      if (emitted >= spec.n_points) break;
      Vec x = spec.lat.gamma(g) + spec.t;
      if (std::abs(x.norm() - rho) > 0.3) continue;
      if (!domains::classify(x, spec.lat, pp, spec.cfg).non_resonant()) continue;
      auto m = oracle::match_eigenvalue(s, g, pp, spec.cfg.c[4],
                                        0.5 * (pp.d - 1) * pp.q_exp);
      if (!m) continue;
      csv << rho << ",";
      for (int c : g) csv << c << ",";
      try {
        auto e1 = bloch::eigenfunction_error(
            s, m->n, g, bloch::predict_expansion(x, 1, spec.q, spec.lat, pp, spec.cfg));
        auto e2 = bloch::eigenfunction_error(
            s, m->n, g, bloch::predict_expansion(x, 2, spec.q, spec.lat, pp, spec.cfg));
        csv << e1.l2_error << "," << e2.l2_error << "," << e1.tail_mass << ",\n";
        ++emitted;
      } catch (const std::exception& e) {
        csv << ",,," << e.what() << "\n";
      }
    }
  }
  return 0;
}

int run_isoenergetic(ExperimentSpec& spec, Csv& csv) {
  csv << "rho,kind,value...\n";
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0, 2 * M_PI);
  for (double rho : spec.rho) {
    auto pp = spec.params(rho);
    std::vector<Vec> samples;
    int attempts = 0;
    while (static_cast<int>(samples.size()) < spec.n_points && attempts < 40 * spec.n_points) {
      ++attempts;
      double th = u(rng);
      Vec dir(2);
      dir << std::cos(th), std::sin(th);
      try {
        Vec x = iso::surface_root_F(dir, rho, spec.q, spec.lat, pp, spec.cfg);
        samples.push_back(x);
        csv << rho << ",root,";
        emit_point(csv, x);
        csv << "\n";
      } catch (const numerical_error&) {
      }
    }
    auto pruned = iso::prune_P_b_and_A(samples, spec.q, spec.lat, pp, spec.cfg);
    csv << rho << ",retained_fraction," << pruned.retained_fraction() << ",\n";
  }
  return 0;
}

}  // namespace

int run(ExperimentSpec& spec, std::ostream& log) {
  spec.cfg.seed = spec.seed;
  spec.cfg.threads = spec.threads;
  if (spec.mode == "verify-all") {
    acceptance::Options opt = spec.accept;
    opt.cfg = spec.cfg;
    opt.seed = spec.seed;
    opt.threads = spec.threads;
    std::ofstream out;
    std::ostream* os = &log;
    if (!spec.out_path.empty()) {
      out.open(spec.out_path);
      if (!out) throw config_error("cannot open output file: " + spec.out_path);
      os = &out;
    }
    auto sum = acceptance::run_all(opt, *os);
    return sum.all_pass() ? 0 : 1;
  }

  Csv csv(spec.out_path, log);
  if (spec.mode == "spectrum") return run_spectrum(spec, csv);
  if (spec.mode == "classify") return run_classify(spec, csv);
  if (spec.mode == "hill") return run_hill(spec, csv);
  if (spec.mode == "predict-nonres") return run_predict_nonres(spec, csv);
  if (spec.mode == "predict-res") return run_predict_res(spec, csv);
  if (spec.mode == "predict-singleres") return run_predict_singleres(spec, csv);
  if (spec.mode == "bloch") return run_bloch(spec, csv);
  if (spec.mode == "isoenergetic") return run_isoenergetic(spec, csv);
  throw config_error("unknown mode: " + spec.mode);
}

}  // namespace blochpert::experiment
