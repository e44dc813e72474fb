#include <doctest.h>

#include <set>

#include "blochpert/domains.hpp"

using namespace blochpert;

namespace {
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

core::NumericConfig desk_cfg() {
  core::NumericConfig cfg;
  cfg.slab_ball_mult = 4.0;
  return cfg;
}
}  // namespace

TEST_CASE("resonance slab predicate") {
  auto pp = core::PaperParams::main_system(2, 45, 100.0);
  Vec x = vec2(0, 100);  // orthogonal to b
  Vec b = vec2(1, 0);
  CHECK(domains::in_resonance_slab(x, b, 100.0, pp.alpha1()));
  Vec y = vec2(100, 0);  // parallel: defect 201
  CHECK(!domains::in_resonance_slab(y, b, 100.0, pp.alpha1()));
  CHECK(!domains::in_resonance_slab(vec2(0, 10), b, 100.0, pp.alpha1()));  // outside shell
}

TEST_CASE("slab agreement with the direct formula on random points") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 40.0);
  auto cfg = desk_cfg();
  std::mt19937_64 rng(3);
  auto ball = lat.points_in_ball(cfg.slab_ball_radius(pp));
  double w = pp.rho_pow(pp.alpha1());
  for (int it = 0; it < 200; ++it) {
    Vec x = domains::sphere_sample(2, 40.0, rng);
    for (auto& b : ball) {
      Vec bv = lat.gamma(b);
      bool direct = std::abs(x.squaredNorm() - (x + bv).squaredNorm()) < w;
      CHECK(domains::in_resonance_slab(x, bv, 40.0, pp.alpha1()) == direct);
    }
  }
}

TEST_CASE("classification of generic and slab points") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  double rho = 50;
  auto pp = core::PaperParams::main_system(2, 45, rho);

  // Near the e1 diffraction plane: x1 close to -1/2.
  Vec xs = vec2(0.3, rho);
  auto lbl = domains::classify(xs, lat, pp, cfg);
  CHECK(lbl.single_resonant());
  CHECK(lbl.order == 1);
  CHECK(lbl.delta == IVec{1, 0});

  // A point deep in two independent slabs.
  Vec xd = vec2(-0.4, -0.45);
  xd += vec2(0, rho);  // (−0.4, rho−0.45): e1 and e2 slab defects are both small
  auto lbl2 = domains::classify(xd, lat, pp, cfg);
  CHECK(lbl2.order >= 1);

  // Exhaustive scan agreement for the non-resonant claim.
  Vec xg = vec2(rho * std::cos(1.0), rho * std::sin(1.0));
  auto lblg = domains::classify(xg, lat, pp, cfg);
  bool any_slab = false;
  for (auto& b : lat.points_in_ball(cfg.slab_ball_radius(pp)))
    any_slab |= std::abs(xg.squaredNorm() - (xg + lat.gamma(b)).squaredNorm()) <
                pp.rho_pow(pp.alpha1());
  CHECK(lblg.non_resonant() == !any_slab);
}

TEST_CASE("V_{k delta} nests into the maximal-direction slab pair") {
  // x near the k-th plane of the delta line lies in the slab of the primitive
  // direction with matching sign, once rho^{alpha_1} > |k| |delta|^2.
  auto lat = lattice::Lattice::cubic(2);
  double rho = 150;
  auto pp = core::PaperParams::main_system(2, 45, rho);
  std::mt19937_64 rng(5);
  Vec delta = vec2(1, 0);
  for (int k : {-3, -2, 2, 3}) {
    int found = 0;
    for (int it = 0; it < 60000 && found < 50; ++it) {
      Vec x = domains::sphere_sample(2, rho, rng);
      if (domains::in_resonance_slab(x, double(k) * delta, rho, pp.alpha1())) {
        ++found;
        Vec primitive = (k > 0 ? 1.0 : -1.0) * delta;
        CHECK(domains::in_resonance_slab(x, primitive, rho, pp.alpha1()));
      }
    }
    CHECK(found > 0);
  }
}

TEST_CASE("B_k index sets") {
  auto cfg = desk_cfg();
  SUBCASE("three members when only b = 0, +-delta fit") {
    auto lat = lattice::Lattice::from_basis(M_PI * Mat::Identity(2, 2));  // dual 2 Z^2
    auto pp = core::PaperParams::main_system(2, 4, 60.0);                 // p1 = 1
    Vec t = vec2(0.1, 0.2);
    Vec center = lat.gamma(IVec{0, 15}) + t;
    auto set = domains::build_Bk(center, t, {IVec{1, 0}}, lat, pp, cfg);
    CHECK(set.count() == 3);
    CHECK(set.center_index >= 0);
  }
  SUBCASE("count matches an independent double loop at rho = 50") {
    auto lat = lattice::Lattice::cubic(2);
    auto pp = core::PaperParams::main_system(2, 45, 50.0);
    Vec t = vec2(0.12, 0.27);
    Vec center = lat.gamma(IVec{0, 50}) + t;
    auto set = domains::build_Bk(center, t, {IVec{1, 0}}, lat, pp, cfg);
    // Brute force: members gamma + n delta + a over generous integer boxes.
    std::set<IVec> expect;
    double rb = 0.5 * pp.rho_pow(0.5 * pp.alpha_k(2));
    double ra = double(pp.p1) * pp.rho_pow(pp.alpha());
    for (int n = -10; n <= 10; ++n) {
      if (std::abs(n) >= rb) continue;
      for (int a1 = -30; a1 <= 30; ++a1)
        for (int a2 = -30; a2 <= 30; ++a2) {
          if (std::hypot(a1, a2) >= ra) continue;
          expect.insert(IVec{n + a1, 50 + a2});
        }
    }
    CHECK(set.count() == static_cast<long long>(expect.size()));
  }
  SUBCASE("dependent directions are rejected") {
    auto lat = lattice::Lattice::cubic(2);
    auto pp = core::PaperParams::main_system(2, 45, 20.0);
    Vec t = vec2(0.1, 0.2);
    CHECK_THROWS_AS(
        domains::build_Bk(lat.gamma(IVec{0, 20}) + t, t, {IVec{1, 0}, IVec{2, 0}}, lat, pp, cfg),
        config_error);
  }
}

TEST_CASE("K_rho membership") {
  auto pp = core::PaperParams::main_system(2, 45, 30.0);
  CHECK(domains::in_K_rho(vec2(30, 0), 30, pp));
  CHECK(!domains::in_K_rho(vec2(60, 0), 30, pp));
  double w = pp.rho_pow(pp.alpha1());
  Vec boundary = vec2(std::sqrt(900.0 + w + 1e-9), 0);
  CHECK(!domains::in_K_rho(boundary, 30, pp));  // strict inequality
}

TEST_CASE("E_{k+1} nests inside E_k at matching width") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 25.0);
  auto cfg = desk_cfg();
  std::mt19937_64 rng(17);
  int hits = 0;
  for (int it = 0; it < 3000; ++it) {
    Vec x = domains::sphere_sample(2, 25.0, rng);
    if (domains::in_E_k(x, 2, lat, pp, cfg, pp.alpha2())) {
      ++hits;
      CHECK(domains::in_E_k(x, 1, lat, pp, cfg, pp.alpha2()));
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("order-d resonances vanish from the sphere at large rho") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  cfg.slab_ball_mult = 1.0;  // the literal-width ball; wide balls need larger rho
  auto pp = core::PaperParams::main_system(2, 45, 220.0);
  std::mt19937_64 rng(23);
  int order_d = 0;
  for (int it = 0; it < 4000; ++it) {
    Vec x = domains::sphere_sample(2, pp.rho, rng);
    auto lbl = domains::classify(x, lat, pp, cfg);
    if (lbl.order >= pp.d) ++order_d;
  }
  CHECK(order_d == 0);
}

TEST_CASE("Monte Carlo non-resonance fraction") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  SUBCASE("vanishing slabs give fraction one") {
    auto pp = core::PaperParams::main_system(2, 45, 20.0);
    core::NumericConfig tiny = cfg;
    tiny.slab_ball_mult = 1e-6;  // empty classification ball
    auto mc = domains::mc_nonresonance_fraction(lat, pp, tiny, 2000, 5);
    CHECK(mc.ci.fraction == doctest::Approx(1.0));
  }
  SUBCASE("deficit shrinks from rho 20 to rho 80") {
    auto a = domains::mc_nonresonance_fraction(lat, core::PaperParams::main_system(2, 45, 20.0),
                                               cfg, 20000, 5);
    auto b = domains::mc_nonresonance_fraction(lat, core::PaperParams::main_system(2, 45, 80.0),
                                               cfg, 20000, 5);
    CHECK(1.0 - a.ci.fraction > 1.0 - b.ci.fraction);
  }
  SUBCASE("deterministic under the same seed and thread count changes") {
    auto pp = core::PaperParams::main_system(2, 45, 20.0);
    auto a = domains::mc_nonresonance_fraction(lat, pp, cfg, 8192, 9);
    core::NumericConfig cf4 = cfg;
    cf4.threads = 4;
    auto b = domains::mc_nonresonance_fraction(lat, pp, cf4, 8192, 9);
    CHECK(a.ci.successes == b.ci.successes);
  }
}
