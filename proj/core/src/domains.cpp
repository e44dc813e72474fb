#include "blochpert/domains.hpp"

#include <atomic>

namespace blochpert::domains {

namespace {
constexpr double kShellTol = 1e-12;
}

bool in_shell(const Vec& x, double rho) {
  double r = x.norm();
  return r > 0.5 * rho - kShellTol && r < 1.5 * rho + kShellTol;
}

bool in_resonance_slab(const Vec& x, const Vec& b, double rho, double exponent) {
  if (!in_shell(x, rho)) return false;
  double defect = std::abs(x.squaredNorm() - (x + b).squaredNorm());
  return defect < std::pow(rho, exponent);
}

int integer_rank(const std::vector<IVec>& vecs) {
  if (vecs.empty()) return 0;
  // Fraction-free Gaussian elimination over long long.
  std::vector<std::vector<long long>> m;
  for (auto& v : vecs) m.emplace_back(v.begin(), v.end());
  const int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    for (int r = rank; r < rows; ++r)
      if (m[r][c] != 0 && (piv < 0 || std::abs(m[r][c]) < std::abs(m[piv][c]))) piv = r;
    if (piv < 0) continue;
    std::swap(m[rank], m[piv]);
    for (int r = rank + 1; r < rows; ++r) {
      while (m[r][c] != 0) {
        long long f = m[r][c] / m[rank][c];
        if (f != 0)
          for (int k = c; k < cols; ++k) m[r][k] -= f * m[rank][k];
        if (m[r][c] != 0) std::swap(m[r], m[rank]);  // euclidean step
      }
    }
    ++rank;
  }
  return rank;
}

namespace {

// Greedy selection of `k` independent vectors from `hits`, sorted by
// (norm, lexicographic coords).  Returns empty if the rank is below k.
std::vector<IVec> greedy_witness(std::vector<std::pair<double, IVec>> hits, int k) {
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<IVec> chosen;
  for (auto& [norm, coords] : hits) {
    auto trial = chosen;
    trial.push_back(coords);
    if (integer_rank(trial) == static_cast<int>(trial.size())) {
      chosen = std::move(trial);
      if (static_cast<int>(chosen.size()) == k) return chosen;
    }
  }
  return {};
}

}  // namespace

DomainLabel classify(const Vec& x, const lattice::Lattice& lat, const core::PaperParams& pp,
                     const core::NumericConfig& cfg, double width_mult) {
  DomainLabel label;
  label.shell_ok = in_shell(x, pp.rho);
  if (!label.shell_ok) return label;

  const double x2 = x.squaredNorm();
  auto ball = lat.points_in_ball(cfg.slab_ball_radius(pp));
  std::vector<std::pair<double, Vec>> ball_vecs;
  ball_vecs.reserve(ball.size());
  for (auto& b : ball) {
    Vec v = lat.gamma(b);
    ball_vecs.emplace_back(v.norm(), std::move(v));
  }

  int max_order = 0;
  std::vector<IVec> witness;
  for (int k = 1; k <= pp.d; ++k) {
    double width = width_mult * pp.rho_pow(pp.alpha_k(k));
    std::vector<std::pair<double, IVec>> hits;
    for (size_t i = 0; i < ball.size(); ++i) {
      double defect = std::abs(x2 - (x + ball_vecs[i].second).squaredNorm());
      if (defect < width) hits.emplace_back(ball_vecs[i].first, ball[i]);
    }
    if (integer_rank([&] {
          std::vector<IVec> vs;
          for (auto& h : hits) vs.push_back(h.second);
          return vs;
        }()) < k)
      break;
    auto w = greedy_witness(std::move(hits), k);
    if (w.empty()) break;
    max_order = k;
    witness = std::move(w);
  }

  if (max_order == 0) {
    label.kind = Kind::NonResonant;
    return label;
  }
  label.order = max_order;
  label.directions = witness;
  if (max_order == 1) {
    label.kind = Kind::SingleResonant;
    label.delta = lattice::primitive_direction(witness[0]);
  } else {
    label.kind = Kind::Resonant;
  }
  return label;
}

BkIndexSet build_Bk(const Vec& center, const Vec& t, const std::vector<IVec>& directions,
                    const lattice::Lattice& lat, const core::PaperParams& pp,
                    const core::NumericConfig& cfg) {
  const int k = static_cast<int>(directions.size());
  if (k == 0) throw config_error("build_Bk: need at least one direction");
  if (integer_rank(directions) < k)
    throw config_error("build_Bk: directions are linearly dependent");
  auto gcoords = lat.gamma_coords(center - t, 1e-7);
  if (!gcoords) throw numerical_error("build_Bk: center - t is not a lattice vector");

  const int d = lat.dim();
  Mat D(k, d);
  for (int i = 0; i < k; ++i) D.row(i) = lat.gamma(directions[i]).transpose();

  const double rb = 0.5 * pp.rho_pow(0.5 * pp.alpha_k(k + 1));
  // Integer combinations n with |n_1 gamma_1 + ... + n_k gamma_k| < rb.
  // n = (D D^T)^{-1} D b, so |n_i| <= rb * ||row_i of that map||.
  Mat pinv = (D * D.transpose()).inverse() * D;  // k x d
  std::vector<long long> bound(k);
  for (int i = 0; i < k; ++i)
    bound[i] = static_cast<long long>(std::floor(rb * pinv.row(i).norm())) + 1;

  std::vector<IVec> bs;  // in Gamma coordinates
  IVec n(k, 0);
  std::function<void(int)> scan = [&](int level) {
    if (level == k) {
      Vec b = Vec::Zero(d);
      for (int i = 0; i < k; ++i) b += double(n[i]) * D.row(i).transpose();
      if (b.norm() < rb) {
        IVec coords(d, 0);
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < d; ++j) coords[j] += n[i] * directions[i][j];
        bs.push_back(coords);
      }
      return;
    }
    for (long long v = -bound[level]; v <= bound[level]; ++v) {
      n[level] = static_cast<int>(v);
      scan(level + 1);
    }
  };
  scan(0);

  auto as = lat.points_in_ball(double(pp.p1) * pp.rho_pow(pp.alpha()));
  as.push_back(IVec(d, 0));

  BkIndexSet set;
  set.center = center;
  set.t = t;
  set.directions = directions;
  std::unordered_map<IVec, int, IVecHash> seen;
  for (auto& b : bs) {
    for (auto& a : as) {
      IVec h = ivec_add(*gcoords, ivec_add(b, a));
      if (seen.emplace(h, static_cast<int>(set.member_coords.size())).second) {
        set.member_coords.push_back(h);
        set.members.push_back(lat.gamma(h) + t);
        if (h == *gcoords) set.center_index = static_cast<int>(set.member_coords.size()) - 1;
        if (static_cast<long long>(set.member_coords.size()) > cfg.bk_cap)
          throw numerical_error("build_Bk: index set exceeds bk_cap = " +
                                std::to_string(cfg.bk_cap) +
                                " (lower rho or raise the cap)");
      }
    }
  }
  return set;
}

bool in_E_k(const Vec& x, int k, const lattice::Lattice& lat, const core::PaperParams& pp,
            const core::NumericConfig& cfg, double width_exponent) {
  if (!in_shell(x, pp.rho)) return false;
  const double x2 = x.squaredNorm();
  const double width = pp.rho_pow(width_exponent);
  auto ball = lat.points_in_ball(cfg.slab_ball_radius(pp));
  std::vector<IVec> hits;
  for (auto& b : ball)
    if (std::abs(x2 - (x + lat.gamma(b)).squaredNorm()) < width) hits.push_back(b);
  return integer_rank(hits) >= k;
}

bool in_K_rho(const Vec& x, double rho, const core::PaperParams& pp) {
  return std::abs(x.squaredNorm() - rho * rho) < std::pow(rho, pp.alpha1());
}

Vec sphere_sample(int d, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec x(d);
  for (;;) {
    for (int i = 0; i < d; ++i) x[i] = g(rng);
    double n = x.norm();
    if (n > 1e-12) return rho / n * x;
  }
}

McFraction mc_nonresonance_fraction(const lattice::Lattice& lat, const core::PaperParams& pp,
                                    const core::NumericConfig& cfg, long long n_samples,
                                    unsigned long long seed) {
  if (n_samples < 1) throw config_error("mc_nonresonance_fraction: need samples");
  const int d = lat.dim();
  auto ball = lat.points_in_ball(cfg.slab_ball_radius(pp));
  std::vector<Vec> bvecs;
  bvecs.reserve(ball.size());
  for (auto& b : ball) bvecs.push_back(lat.gamma(b));
  const double width = pp.rho_pow(pp.alpha1());
  const double rho = pp.rho;

  const long long batch = 4096;
  const int nbatches = static_cast<int>((n_samples + batch - 1) / batch);
  std::atomic<long long> in_u{0};
  parallel_for(nbatches, cfg.threads, [&](int bi) {
    std::mt19937_64 rng(seed + 0x9e3779b9ull * (bi + 1));
    long long local = 0;
    long long count = std::min(batch, n_samples - bi * batch);
    Vec x(d);
    for (long long s = 0; s < count; ++s) {
      x = sphere_sample(d, rho, rng);
      double x2 = x.squaredNorm();
      bool resonant = false;
      for (auto& b : bvecs) {
        if (std::abs(x2 - (x + b).squaredNorm()) < width) {
          resonant = true;
          break;
        }
      }
      if (!resonant) ++local;
    }
    in_u += local;
  });

  McFraction out;
  out.samples = n_samples;
  out.ci = wilson_ci(in_u.load(), n_samples);
  return out;
}

}  // namespace blochpert::domains
