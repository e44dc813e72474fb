#include <doctest.h>

#include "blochpert/nonres.hpp"
#include "helpers.hpp"

using namespace blochpert;

using testing::desk_cfg;
using testing::vxy;

namespace {
Vec vec2(double a, double b) { return vxy(a, b); }
}  // namespace

TEST_CASE("S_1 closed form for 2 cos x1") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  Vec x = vec2(10.0, 9.3);
  auto ev = nonres::S_k(x.squaredNorm(), x, 1, q, lat, pp);
  CHECK(ev.value == doctest::Approx(2.0 / 399.0).epsilon(1e-12));
  CHECK(ev.chains == 2);
  CHECK(ev.imag_defect < 1e-14);
  CHECK(ev.min_denominator == doctest::Approx(19.0));

  // S_2 vanishes: -(gamma_1 + gamma_2) never lands back on the support.
  auto ev2 = nonres::S_k(x.squaredNorm(), x, 2, q, lat, pp);
  CHECK(ev2.value == 0.0);
  CHECK(ev2.chains == 0);
}

TEST_CASE("zero potential gives zero series") {
  auto lat = lattice::Lattice::cubic(2);
  potential::FourierPotential q0;
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  auto cfg = desk_cfg();
  Vec x = vec2(10.0, 9.3);
  CHECK(nonres::S_k(x.squaredNorm(), x, 1, q0, lat, pp).value == 0.0);
  auto fs = nonres::F_series(x, 4, q0, lat, pp, cfg);
  for (double f : fs.F) CHECK(f == 0.0);
  CHECK(fs.predicted == doctest::Approx(x.squaredNorm()));
}

TEST_CASE("F recursion by hand for the two-term potential") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  auto cfg = desk_cfg();
  Vec x = vec2(10.0, 9.3);
  auto fs = nonres::F_series(x, 3, q, lat, pp, cfg);
  double f1 = 2.0 / 399.0;
  CHECK(fs.F[0] == 0.0);
  CHECK(fs.F[1] == doctest::Approx(f1).epsilon(1e-12));
  // F_2 = S_1(|x|^2 + F_1) + S_2(...) with S_2 = 0.
  double a = x.squaredNorm() + f1;
  double s1_shift = 1.0 / (a - (x - vec2(1, 0)).squaredNorm()) +
                    1.0 / (a - (x + vec2(1, 0)).squaredNorm());
  CHECK(fs.F[2] == doctest::Approx(s1_shift).epsilon(1e-12));
}

TEST_CASE("prefix stability of the recursion") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0).plus(
      potential::FourierPotential::cosine(2, 1));
  auto pp = core::PaperParams::main_system(2, 45, 30.0);
  auto cfg = desk_cfg();
  Vec x = vec2(17.1, 24.7);
  auto f3 = nonres::F_series(x, 3, q, lat, pp, cfg);
  auto f4 = nonres::F_series(x, 4, q, lat, pp, cfg);
  for (int s = 0; s < 3; ++s) CHECK(f3.F[s] == f4.F[s]);
}

TEST_CASE("majorant bounds S_k when it contracts") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto pp = core::PaperParams::main_system(2, 45, 1e6);  // rho^{alpha_1} ~ 24
  Vec x = vec2(1e6 * std::cos(0.9), 1e6 * std::sin(0.9));
  for (int k = 1; k <= 3; ++k) {
    auto ev = nonres::S_k(x.squaredNorm(), x, k, q, lat, pp);
    CHECK(std::abs(ev.value) <= nonres::s_k_majorant(k, q, pp) + 1e-15);
  }
}

TEST_CASE("denominator floor violation names the chain") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  Vec x = vec2(0.1, 20.0);  // inside the e1 slab
  CHECK_THROWS_WITH_AS(nonres::S_k(x.squaredNorm(), x, 1, q, lat, pp),
                       doctest::Contains("below floor"), numerical_error);
  nonres::SkOptions relaxed;
  relaxed.enforce_floors = false;
  CHECK_NOTHROW(nonres::S_k(x.squaredNorm(), x, 1, q, lat, pp, relaxed));
}

TEST_CASE("finite-difference gradient matches the closed form") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto pp = core::PaperParams::main_system(2, 45, 25.0);
  auto cfg = desk_cfg();
  Vec x = 25.0 * testing::nonres_direction(lat, pp, cfg);
  REQUIRE(domains::classify(x, lat, pp, cfg).non_resonant());
  auto g = nonres::grad_F_check(x, 1, q, lat, pp, cfg, 1e-3);
  double x1 = x[0];
  double exact = -16.0 * x1 / std::pow(4 * x1 * x1 - 1, 2);
  CHECK(g.grad[0] == doctest::Approx(exact).epsilon(1e-6));
  CHECK(std::abs(g.grad[1]) < 1e-9);
}

TEST_CASE("F_1 decays along a fixed direction") {
  // For the single-cosine potential the two chain terms nearly cancel:
  // F_1 = 2/(4 x_1^2 - 1) ~ rho^{-2} along a fixed ray.
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto cfg = desk_cfg();
  std::vector<double> rhos{20, 40, 80}, vals;
  for (double rho : rhos) {
    auto pp = core::PaperParams::main_system(2, 45, rho);
    Vec x = vec2(rho * std::cos(0.8), rho * std::sin(0.8));
    vals.push_back(std::abs(nonres::S_k(x.squaredNorm(), x, 1, q, lat, pp).value));
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rhos.size(); ++i) {
    lx.push_back(std::log(rhos[i]));
    ly.push_back(std::log(vals[i]));
  }
  auto fit = fit_line(lx, ly);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(0.05));
}
