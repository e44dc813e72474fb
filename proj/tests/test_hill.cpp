#include <doctest.h>

#include "blochpert/hill.hpp"

using namespace blochpert;

namespace {
potential::DirectionalPotential two_cos() {
  potential::DirectionalPotential Q;
  Q.coeffs[1] = Q.coeffs[-1] = cd(1, 0);
  return Q;
}
}  // namespace

TEST_CASE("free Hill operator is exact") {
  potential::DirectionalPotential Q;
  auto hs = hill::solve_Tv(Q, 0.3, 1.0, 12);
  for (auto& p : hs.pairs) {
    CHECK(p.mu == doctest::Approx(std::pow(double(p.j) + 0.3, 2)).epsilon(1e-12));
    CHECK(std::abs(p.coeff(static_cast<int>(p.j))) == doctest::Approx(1.0));
    CHECK(!p.ambiguous);
  }
}

TEST_CASE("doubling the truncation leaves eigenvalues fixed") {
  auto Q = two_cos();
  auto a = hill::solve_Tv(Q, 0.0, 1.0, 24);
  auto b = hill::solve_Tv(Q, 0.0, 1.0, 48);
  for (long long j = -6; j <= 6; ++j) {
    auto* pa = a.find_j(j);
    auto* pb = b.find_j(j);
    REQUIRE(pa);
    REQUIRE(pb);
    CHECK(pa->mu == doctest::Approx(pb->mu).epsilon(1e-10));
  }
}

TEST_CASE("spectra at v and 1 - v agree as sets") {
  auto Q = two_cos();
  auto a = hill::solve_Tv(Q, 0.3, 1.0, 30);
  auto b = hill::solve_Tv(Q, 0.7, 1.0, 30);
  for (int i = 0; i < 20; ++i) CHECK(a.pairs[i].mu == doctest::Approx(b.pairs[i].mu).epsilon(1e-10));
}

TEST_CASE("eigenvector orthonormality and the Eq.(52) bound") {
  auto Q = two_cos();
  auto hs = hill::solve_Tv(Q, 0.37, 1.0, 24);
  double supQ = Q.sup_bound();
  for (auto& p : hs.pairs) {
    double norm = 0;
    for (auto& [m, c] : p.phi_coeffs) norm += std::norm(c);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(p.mu - std::pow((double(p.j) + p.v) * 1.0, 2)) <= supQ + 1e-9);
  }
  // Orthogonality of neighbouring eigenvectors.
  auto dot = [&](const hill::HillEigenpair& x, const hill::HillEigenpair& y) {
    cd s(0, 0);
    for (auto& [m, c] : x.phi_coeffs) s += c * std::conj(y.coeff(m));
    return std::abs(s);
  };
  for (size_t i = 1; i < 12; ++i) CHECK(dot(hs.pairs[i - 1], hs.pairs[i]) < 1e-10);
}

TEST_CASE("W(rho) membership") {
  potential::DirectionalPotential Q;  // free case
  CHECK(!hill::in_W_rho(Q, 0.0, 1.0, 100.0, 6));   // mu_j(0) = mu_{-j}(0)
  CHECK(hill::in_W_rho(Q, 0.25, 1.0, 100.0, 6));   // min gap 0.5 > 2/ln(100)

  // Direct gap scan agreement with 2 cos zeta.
  auto Q2 = two_cos();
  double rho = 40;
  for (double v : {0.1, 0.2, 0.25, 0.33, 0.45}) {
    auto hs = hill::solve_Tv(Q2, v, 1.0, hill::default_modes(8, Q2));
    double ceiling = std::pow(7.0, 2) - Q2.sup_bound();
    std::vector<double> mus;
    for (auto& p : hs.pairs)
      if (p.mu <= ceiling) mus.push_back(p.mu);
    std::sort(mus.begin(), mus.end());
    double mingap = 1e9;
    for (size_t i = 1; i < mus.size(); ++i) mingap = std::min(mingap, mus[i] - mus[i - 1]);
    CHECK(hill::in_W_rho(Q2, v, 1.0, rho, 6) == (mingap > 2.0 / std::log(rho)));
  }
  CHECK_THROWS_AS(hill::in_W_rho(two_cos(), 0.25, 1.0, 1.5, 2), config_error);
}

TEST_CASE("Fourier decay of eigenfunctions is super-polynomial") {
  auto Q = two_cos();
  auto hs = hill::solve_Tv(Q, 0.3, 1.0, 48);
  auto* p0 = hs.find_j(0);
  REQUIRE(p0);
  auto fit = hill::fourier_decay_check(*p0, 1.0, 10, 30);
  CHECK(fit.slope <= -3.0);
  // Coefficients decrease monotonically beyond the resonance window.
  double prev = std::abs(p0->coeff(8));
  for (int m = 9; m <= 30; ++m) {
    double cur = std::abs(p0->coeff(m));
    CHECK(cur <= prev * 1.001);
    prev = cur;
  }
}

TEST_CASE("band monotonicity in v on (0, 1/2)") {
  auto Q = two_cos();
  std::vector<double> vs{0.05, 0.15, 0.25, 0.35, 0.45};
  std::vector<std::vector<double>> mus;
  for (double v : vs) {
    auto hs = hill::solve_Tv(Q, v, 1.0, 32);
    std::vector<double> m;
    for (int i = 0; i < 6; ++i) m.push_back(hs.pairs[i].mu);
    mus.push_back(m);
  }
  // mu_{2j-1} increases on (0, 1/2): band index 0, 2, 4 using 0-based sorted order.
  for (int band : {0, 2, 4})
    for (size_t i = 1; i < vs.size(); ++i) CHECK(mus[i][band] > mus[i - 1][band]);
}

TEST_CASE("cache rounds v consistently") {
  hill::HillCache cache(two_cos(), 1.0, 24);
  const auto& a = cache.at(0.25);
  const auto& b = cache.at(0.25 + 4e-13);
  CHECK(&a == &b);
}
