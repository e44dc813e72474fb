#include "blochpert/params.hpp"

#include <boost/rational.hpp>
#include <sstream>

namespace blochpert::core {

namespace {

using Rat = boost::rational<long long>;

long long pow3(int k) {
  long long r = 1;
  for (int i = 0; i < k; ++i) r *= 3;
  return r;
}

std::string rat_str(const Rat& r) {
  std::ostringstream os;
  os << r.numerator();
  if (r.denominator() != 1) os << "/" << r.denominator();
  return os.str();
}

}  // namespace

long long PaperParams::s0_main(int d) {
  // (3d-1)(3^d+d+2)/2 + d 3^d/4 + d + 6 on rationals, then ceil.
  Rat s0 = Rat(3 * d - 1, 2) * Rat(pow3(d) + d + 2) + Rat(d * pow3(d), 4) + Rat(d + 6);
  long long num = s0.numerator(), den = s0.denominator();
  return (num + den - 1) / den;
}

long long PaperParams::s0_resonance(int d) { return 6 * pow3(d) * (d + 1) * (d + 1) + d; }

static PaperParams make(int d, long long s, double rho, long long q) {
  if (d < 2) throw config_error("PaperParams: dimension must be >= 2");
  if (rho <= 0) throw config_error("PaperParams: rho must be positive");
  PaperParams pp;
  pp.d = d;
  pp.s = s;
  pp.p = s - d;
  pp.q_exp = q;
  pp.k1 = (d * q) / 3 + 2;         // floor(d/(3 alpha)) + 2 with alpha = 1/q
  pp.p1 = pp.p / 3 + 1;            // floor(p/3) + 1
  pp.rho = rho;
  pp.eps1 = std::pow(rho, -double(d) - 2.0 / double(q));
  return pp;
}

PaperParams PaperParams::main_system(int d, long long s, double rho) {
  return make(d, s, rho, pow3(d) + d + 2);
}

PaperParams PaperParams::resonance_system(int d, long long s, double rho) {
  return make(d, s, rho, 4 * pow3(d) * (d + 1));
}

std::vector<InequalityViolation> validate_params(const PaperParams& pp) {
  std::vector<InequalityViolation> out;
  const int d = pp.d;
  const Rat alpha(1, pp.q_exp);
  auto alpha_k = [&](int k) { return Rat(pow3(k), pp.q_exp); };
  const Rat p(pp.p), k1(pp.k1), p1(pp.p1), q(pp.q_exp);

  auto fail = [&](int idx, const std::string& text) { out.push_back({idx, text}); };

  // 1: alpha_1 + d alpha < 1 - alpha
  if (!(alpha_k(1) + Rat(d) * alpha < Rat(1) - alpha))
    fail(1, "alpha_1 + d*alpha < 1 - alpha fails: " + rat_str(alpha_k(1) + Rat(d) * alpha) +
               " !< " + rat_str(Rat(1) - alpha));
  // 2: d alpha < alpha_d / 2
  if (!(Rat(d) * alpha < alpha_k(d) / 2))
    fail(2, "d*alpha < alpha_d/2 fails: " + rat_str(Rat(d) * alpha) + " !< " + rat_str(alpha_k(d) / 2));
  // 3: k1 <= (p - q(d-1)/2) / 3
  if (!(k1 <= (p - q * Rat(d - 1, 2)) / 3))
    fail(3, "k1 <= (p - q(d-1)/2)/3 fails: " + rat_str(k1) + " !<= " + rat_str((p - q * Rat(d - 1, 2)) / 3));
  // 4: p1 alpha_1 >= p alpha
  if (!(p1 * alpha_k(1) >= p * alpha))
    fail(4, "p1*alpha_1 >= p*alpha fails: " + rat_str(p1 * alpha_k(1)) + " !>= " + rat_str(p * alpha));
  // 5: 3 k1 alpha > d + 2 alpha
  if (!(Rat(3) * k1 * alpha > Rat(d) + Rat(2) * alpha))
    fail(5, "3*k1*alpha > d + 2*alpha fails: " + rat_str(Rat(3) * k1 * alpha) + " !> " +
               rat_str(Rat(d) + Rat(2) * alpha));
  // 6: alpha_k + (k-1) alpha < 1 for k = 1..d
  for (int k = 1; k <= d; ++k) {
    if (!(alpha_k(k) + Rat(k - 1) * alpha < Rat(1))) {
      fail(6, "alpha_k + (k-1)*alpha < 1 fails at k=" + std::to_string(k) + ": " +
                 rat_str(alpha_k(k) + Rat(k - 1) * alpha));
      break;
    }
  }
  // 7: alpha_{k+1} > 2(alpha_k + (k-1) alpha) for k = 1..d
  for (int k = 1; k <= d; ++k) {
    if (!(alpha_k(k + 1) > Rat(2) * (alpha_k(k) + Rat(k - 1) * alpha))) {
      fail(7, "alpha_{k+1} > 2(alpha_k + (k-1)alpha) fails at k=" + std::to_string(k));
      break;
    }
  }
  return out;
}

void require_valid(const PaperParams& pp) {
  auto v = validate_params(pp);
  if (!v.empty()) {
    std::string msg = "parameter system invalid:";
    for (auto& iv : v) msg += " [" + std::to_string(iv.index) + "] " + iv.text + ";";
    throw config_error(msg);
  }
}

}  // namespace blochpert::core
