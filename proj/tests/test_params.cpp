#include <doctest.h>

#include "blochpert/params.hpp"

using namespace blochpert;
using core::PaperParams;

TEST_CASE("main exponent system, d = 2") {
  auto pp = PaperParams::main_system(2, PaperParams::s0_main(2), 30.0);
  CHECK(pp.q_exp == 13);
  CHECK(pp.alpha() == doctest::Approx(1.0 / 13));
  CHECK(pp.alpha_k(1) == doctest::Approx(3.0 / 13));
  CHECK(pp.k1 == 10);
  CHECK(pp.p == 43);
  CHECK(pp.p1 == 15);
  CHECK(core::validate_params(pp).empty());
  CHECK(pp.eps1 == doctest::Approx(std::pow(30.0, -2.0 - 2.0 / 13)));
}

TEST_CASE("s0 presets") {
  CHECK(PaperParams::s0_main(2) == 45);
  CHECK(PaperParams::s0_main(3) == 158);
  CHECK(PaperParams::s0_resonance(2) == 6 * 9 * 9 + 2);
}

TEST_CASE("degenerate smoothness violates the k1 inequality") {
  auto pp = PaperParams::main_system(2, 2, 10.0);  // p = 0
  auto v = core::validate_params(pp);
  REQUIRE(!v.empty());
  bool has3 = false;
  for (auto& iv : v) has3 |= iv.index == 3;
  CHECK(has3);
}

TEST_CASE("d = 3 with ample smoothness validates") {
  auto pp = PaperParams::main_system(3, 200, 25.0);
  CHECK(core::validate_params(pp).empty());
}

TEST_CASE("resonance-domain system validates at its preset smoothness") {
  auto pp = PaperParams::resonance_system(2, PaperParams::s0_resonance(2), 20.0);
  CHECK(pp.q_exp == 108);
  CHECK(core::validate_params(pp).empty());
}

TEST_CASE("alpha_k strictly increasing, eps1 decreasing in rho") {
  auto pp = PaperParams::main_system(2, 45, 10.0);
  for (int k = 1; k < 6; ++k) CHECK(pp.alpha_k(k + 1) > pp.alpha_k(k));
  CHECK(pp.alpha_k(1) == doctest::Approx(3 * pp.alpha()));
  double prev = pp.eps1;
  for (double rho : {20.0, 40.0, 80.0}) {
    auto p2 = pp.with_rho(rho);
    CHECK(p2.eps1 < prev);
    prev = p2.eps1;
  }
}

TEST_CASE("numeric config positivity") {
  core::NumericConfig cfg;
  CHECK(cfg.all_positive());
  cfg.c[7] = -1;
  CHECK(!cfg.all_positive());
}
