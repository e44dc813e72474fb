#include <doctest.h>

#include "blochpert/bloch.hpp"
#include "helpers.hpp"

using namespace blochpert;

using testing::desk_cfg;
using testing::vxy;

namespace {
Vec vec2(double a, double b) { return vxy(a, b); }
}  // namespace

TEST_CASE("phi_1 closed form and the empty case") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  Vec x = vec2(10.0, 9.3);

  potential::FourierPotential q0;
  CHECK(bloch::phi_1(x, q0, lat, pp).empty());

  auto q = potential::FourierPotential::cosine(2, 0);
  auto p1 = bloch::phi_1(x, q, lat, pp);
  REQUIRE(p1.size() == 2);
  CHECK(p1.at(IVec{1, 0}).real() == doctest::Approx(-1.0 / 21).epsilon(1e-12));
  CHECK(p1.at(IVec{-1, 0}).real() == doctest::Approx(1.0 / 19).epsilon(1e-12));
}

TEST_CASE("phi_1 rejects slab centers") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  auto q = potential::FourierPotential::cosine(2, 0);
  CHECK_THROWS_AS(bloch::phi_1(vec2(0.1, 20.0), q, lat, pp), numerical_error);
}

TEST_CASE("A_1 matches phi_1 up to the shifted-energy correction") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 30.0);
  auto cfg = desk_cfg();
  auto q = potential::FourierPotential::cosine(2, 0).plus(
      potential::FourierPotential::cosine(2, 1));
  Vec x = 30.0 * testing::nonres_direction(lat, pp, cfg);
  auto p1 = bloch::phi_1(x, q, lat, pp);
  // |A_1 - phi_1| = |phi_1| |F| / |P - |x+gamma'|^2|, F = O(rho^{-alpha_1}).
  double fmag =
      std::abs(nonres::F_series(x, 3, q, lat, pp, cfg).predicted - x.squaredNorm());
  double floor = pp.rho_pow(pp.alpha1());
  for (auto& [g, c] : p1) {
    cd a1 = bloch::A_k_coeff(x, g, 1, q, lat, pp, cfg);
    CHECK(std::abs(a1 - c) <= 1.5 * std::abs(c) * fmag / (floor - fmag));
  }
}

TEST_CASE("sparse chains close only on reachable frequencies") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 30.0);
  auto cfg = desk_cfg();
  auto q = potential::FourierPotential::cosine(2, 0);  // support on +-e1 only
  Vec x = 30.0 * testing::nonres_direction(lat, pp, cfg);
  CHECK(bloch::A_k_coeff(x, IVec{0, 1}, 2, q, lat, pp, cfg) == cd(0, 0));
  CHECK(bloch::A_k_coeff(x, IVec{2, 0}, 2, q, lat, pp, cfg) != cd(0, 0));
}

TEST_CASE("second-order expansion of the single-cosine potential") {
  auto lat = lattice::Lattice::cubic(2);
  auto pp = core::PaperParams::main_system(2, 45, 20.0);
  auto cfg = desk_cfg();
  auto q = potential::FourierPotential::cosine(2, 0);
  Vec x = vec2(10.0, 9.3);
  auto exp2 = bloch::predict_expansion(x, 2, q, lat, pp, cfg);
  double ref = 1.0 / std::sqrt(1.0 + 1.0 / (19.0 * 19.0) + 1.0 / (21.0 * 21.0));
  CHECK(exp2.b_center == doctest::Approx(ref).epsilon(1e-4));
  // Exact normalization at order 2.
  CHECK(exp2.b_center * exp2.b_center + exp2.coeff_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exp2.coeff_mass() <= 1.0 + 1e-8);

  auto exp1 = bloch::predict_expansion(x, 1, q, lat, pp, cfg);
  CHECK(exp1.b_center == 1.0);
  CHECK(exp1.coefficients.empty());
}

TEST_CASE("eigenfunction error against the oracle") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  auto pp = core::PaperParams::main_system(2, 45, 9.0);
  Vec t = vec2(0.13, 0.29);
  SUBCASE("free case is exact") {
    potential::FourierPotential q0;
    auto spec = oracle::assemble_and_solve(q0, lat, t, 16.0, std::nullopt, cfg);
    IVec g{6, 3};
    auto m = oracle::match_eigenvalue(spec, g, pp, 0.5, 6.5);
    REQUIRE(m);
    auto exp = bloch::predict_expansion(lat.gamma(g) + t, 1, q0, lat, pp, cfg);
    auto err = bloch::eigenfunction_error(spec, m->n, g, exp);
    CHECK(err.l2_error < 1e-10);
    CHECK(err.tail_mass < 1e-20);
  }
  SUBCASE("first-order correction shrinks the error, phase alignment is idempotent") {
    auto q = potential::FourierPotential::cosine(2, 0).plus(
        potential::FourierPotential::cosine(2, 1));
    auto spec = oracle::assemble_and_solve(q, lat, t, 16.0, std::nullopt, cfg);
    IVec g = testing::nonres_gamma(lat, pp, cfg, t);
    Vec x = lat.gamma(g) + t;
    REQUIRE(domains::classify(x, lat, pp, cfg).non_resonant());
    auto m = oracle::match_eigenvalue(spec, g, pp, 0.5, 6.5);
    REQUIRE(m);
    auto e1 = bloch::eigenfunction_error(spec, m->n, g,
                                         bloch::predict_expansion(x, 1, q, lat, pp, cfg));
    auto e2 = bloch::eigenfunction_error(spec, m->n, g,
                                         bloch::predict_expansion(x, 2, q, lat, pp, cfg));
    CHECK(e2.l2_error < e1.l2_error);
    // err^2 ~ tail mass for the center-only prediction.
    CHECK(e1.l2_error * e1.l2_error == doctest::Approx(e1.tail_mass).epsilon(0.05));

    // Rotating the oracle column by a global phase changes nothing.
    auto rotated = spec;
    rotated.b_table.col(m->n) *= std::polar(1.0, 0.9431);
    auto e1r = bloch::eigenfunction_error(rotated, m->n, g,
                                          bloch::predict_expansion(x, 1, q, lat, pp, cfg));
    CHECK(e1r.l2_error == doctest::Approx(e1.l2_error).epsilon(1e-12));
  }
}

TEST_CASE("resonance eigenfunction distance vanishes in the tensor case") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);  // q - q^delta = 0
  auto cfg = desk_cfg();
  Vec t = vec2(0.21, 0.37);
  auto spec = oracle::assemble_and_solve(q, lat, t, 9.0, std::nullopt, cfg);
  auto geom = lattice::sublattice_geometry(lat, IVec{1, 0});
  auto Q = potential::directional(q, geom);
  double v = lattice::v_of_beta(IVec{3}, t, geom);
  auto hs = hill::solve_Tv(Q, v, 1.0, 24);
  auto dt = lattice::decompose_t(t, geom);
  double lam = (geom.beta(IVec{3}) + dt.tau).squaredNorm() + hs.find_j(1)->mu;
  auto m = oracle::match_resonance(spec, geom, hs, 1, IVec{3}, lam, 2.5 * q.sup_bound());
  REQUIRE(m);
  auto fe = bloch::resonance_eigenfunction_error(spec, geom, hs, m->n, 1, IVec{3});
  CHECK(fe.distance < 1e-6);
}
