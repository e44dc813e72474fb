#include <doctest.h>

#include "blochpert/domains.hpp"

#include "blochpert/oracle.hpp"
#include "helpers.hpp"

using namespace blochpert;

using testing::desk_cfg;
using testing::vxy;

namespace {
Vec vec2(double a, double b) { return vxy(a, b); }
}  // namespace

TEST_CASE("free spectrum is the sorted free energies with a permutation table") {
  auto lat = lattice::Lattice::cubic(2);
  potential::FourierPotential q0;
  auto cfg = desk_cfg();
  Vec t = vec2(0.13, 0.29);
  auto spec = oracle::assemble_and_solve(q0, lat, t, 8.0, std::nullopt, cfg);
  std::vector<double> free;
  for (auto& v : spec.basis_vecs) free.push_back(v.squaredNorm());
  std::sort(free.begin(), free.end());
  for (int i = 0; i < spec.computed(); ++i)
    CHECK(spec.eigenvalues[i] == doctest::Approx(free[i]).epsilon(1e-12));
  // Each eigenvector is a coordinate vector.
  for (int n = 0; n < spec.computed(); ++n) {
    double mx = 0;
    for (int r = 0; r < spec.size(); ++r) mx = std::max(mx, std::abs(spec.b_table(r, n)));
    CHECK(mx == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(oracle::unitarity_defect(spec) < 1e-10);
}

TEST_CASE("one-dimensional reduction agrees with the Hill solver") {
  auto lat = lattice::Lattice::cubic(1);
  potential::FourierPotential::CoeffMap m;
  m[IVec{1}] = m[IVec{-1}] = cd(1, 0);
  potential::FourierPotential q(std::move(m), 0);
  auto cfg = desk_cfg();
  double v = 0.31;
  Vec t(1);
  t << v;
  auto spec = oracle::assemble_and_solve(q, lat, t, 20.0 + v, std::nullopt, cfg);

  potential::DirectionalPotential Q;
  Q.coeffs[1] = Q.coeffs[-1] = cd(1, 0);
  auto hs = hill::solve_Tv(Q, v, 1.0, 20);
  REQUIRE(spec.computed() == static_cast<int>(hs.pairs.size()));
  for (int i = 0; i < 12; ++i)
    CHECK(spec.eigenvalues[i] == doctest::Approx(hs.pairs[i].mu).epsilon(1e-10));
}

TEST_CASE("two-dimensional tensor case matches Lemma-2(b) energies") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);
  auto cfg = desk_cfg();
  Vec t = vec2(0.21, 0.37);
  auto spec = oracle::assemble_and_solve(q, lat, t, 9.0, std::nullopt, cfg);

  auto geom = lattice::sublattice_geometry(lat, IVec{1, 0});
  auto Q = potential::directional(q, geom);
  auto dt = lattice::decompose_t(t, geom);
  std::vector<double> tensor;
  for (int k = -10; k <= 10; ++k) {
    IVec bc{k};
    double perp2 = (geom.beta(bc) + dt.tau).squaredNorm();
    if (perp2 > 90) continue;
    double v = lattice::v_of_beta(bc, t, geom);
    auto hs = hill::solve_Tv(Q, v, 1.0, 24);
    for (auto& p : hs.pairs) tensor.push_back(perp2 + p.mu);
  }
  std::sort(tensor.begin(), tensor.end());
  // Compare the lowest 50 eigenvalues pairwise.
  for (int i = 0; i < 50; ++i)
    CHECK(spec.eigenvalues[i] ==
          doctest::Approx(tensor[i]).epsilon(1e-8));
}

TEST_CASE("eigenvalue matching") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  auto pp = core::PaperParams::main_system(2, 45, 9.0);
  Vec t = vec2(0.13, 0.29);
  SUBCASE("free case matches exactly with unit mass") {
    potential::FourierPotential q0;
    auto spec = oracle::assemble_and_solve(q0, lat, t, 16.0, std::nullopt, cfg);
    IVec g{6, 3};
    auto m = oracle::match_eigenvalue(spec, g, pp, 0.5, 6.5);
    REQUIRE(m);
    CHECK(std::abs(m->b) == doctest::Approx(1.0));
    CHECK(m->eigenvalue == doctest::Approx((lat.gamma(g) + t).squaredNorm()));
  }
  SUBCASE("small potential keeps a dominant unique match") {
    auto q = potential::FourierPotential::cosine(2, 0).plus(
        potential::FourierPotential::cosine(2, 1));
    auto spec = oracle::assemble_and_solve(q, lat, t, 16.0, std::nullopt, cfg);
    IVec g = testing::nonres_gamma(lat, pp, cfg, t);
    REQUIRE(domains::classify(lat.gamma(g) + t, lat, pp, cfg).non_resonant());
    auto m = oracle::match_eigenvalue(spec, g, pp, 0.5, 6.5);
    REQUIRE(m);
    CHECK(std::norm(m->b) > 0.5);
    CHECK(m->runner_up < std::abs(m->b));
  }
}

TEST_CASE("binding residual is an exact identity on interior rows") {
  auto lat = lattice::Lattice::cubic(2);
  auto cfg = desk_cfg();
  Vec t = vec2(0.13, 0.29);
  SUBCASE("zero potential gives exactly zero") {
    potential::FourierPotential q0;
    auto spec = oracle::assemble_and_solve(q0, lat, t, 8.0, std::nullopt, cfg);
    auto r = oracle::binding_residual(spec, 3, spec.basis_coords[5], q0);
    CHECK(r.residual == 0.0);
  }
  SUBCASE("trigonometric polynomial stays below 1e-9 inside") {
    auto q = potential::FourierPotential::cosine(2, 0).plus(
        potential::FourierPotential::cosine(2, 1));
    auto spec = oracle::assemble_and_solve(q, lat, t, 9.0, std::nullopt, cfg);
    double worst_interior = 0, worst_boundary = 0;
    for (int n = 0; n < spec.computed(); n += 7) {
      for (int r = 0; r < spec.size(); ++r) {
        auto res = oracle::binding_residual(spec, n, spec.basis_coords[r], q);
        (res.interior ? worst_interior : worst_boundary) =
            std::max(res.interior ? worst_interior : worst_boundary, res.residual);
      }
    }
    CHECK(worst_interior < 1e-9);
    // Boundary rows are controlled by the boundary mass, not exactness.
    CHECK(worst_boundary < q.sup_bound());
  }
}

TEST_CASE("resonance_b reduces to plane-wave bookkeeping in the tensor case") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0);  // q = q^delta
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
  CHECK(std::abs(m->b) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m->eigenvalue == doctest::Approx(lam).epsilon(1e-9));
  // Mismatched (j, beta) carries no overlap with that eigenvector.
  auto rb = oracle::resonance_b(spec, geom, hs, m->n, 2, IVec{3});
  CHECK(std::abs(rb.value) < 1e-8);
}

TEST_CASE("eigenvalue count near rho^2 grows like rho^{d-1}") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0).plus(
      potential::FourierPotential::cosine(2, 1));
  auto cfg = desk_cfg();
  Vec t = vec2(0.13, 0.29);
  std::vector<double> rhos{10, 20, 40}, counts;
  for (double rho : rhos) {
    double cutoff = oracle::default_cutoff(rho, q, lat, cfg);
    auto window = std::make_pair(rho * rho - rho, rho * rho + rho);
    auto spec = oracle::assemble_and_solve(q, lat, t, cutoff, window, cfg);
    counts.push_back(double(spec.computed()));
  }
  std::vector<double> lx, ly;
  for (size_t i = 0; i < rhos.size(); ++i) {
    lx.push_back(std::log(rhos[i]));
    ly.push_back(std::log(counts[i]));
  }
  CHECK(std::abs(fit_line(lx, ly).slope - 1.0) < 0.3);
}

TEST_CASE("windowed truncation is stable under cutoff growth") {
  auto lat = lattice::Lattice::cubic(2);
  auto q = potential::FourierPotential::cosine(2, 0).plus(
      potential::FourierPotential::cosine(2, 1));
  auto cfg = desk_cfg();
  Vec t = vec2(0.13, 0.29);
  double rho = 12;
  auto win = std::make_pair(rho * rho - 5, rho * rho + 5);
  auto a = oracle::assemble_and_solve(q, lat, t, oracle::default_cutoff(rho, q, lat, cfg), win,
                                      cfg);
  auto b = oracle::assemble_and_solve(q, lat, t, 1.25 * oracle::default_cutoff(rho, q, lat, cfg),
                                      win, cfg);
  for (int i = 0; i < a.computed(); ++i) {
    if (a.eigenvalues[i] < win.first + 1 || a.eigenvalues[i] > win.second - 1) continue;
    double best = 1e18;
    for (int j = 0; j < b.computed(); ++j)
      best = std::min(best, std::abs(a.eigenvalues[i] - b.eigenvalues[j]));
    CHECK(best < cfg.eig_tolerance);
  }
}
