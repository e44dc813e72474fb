#include "blochpert/potential.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blochpert::potential {

FourierPotential::FourierPotential(CoeffMap coeffs, long long declared_s, bool enforce_reality)
    : coeffs_(std::move(coeffs)), declared_s_(declared_s) {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (ivec_is_zero(it->first))
      throw config_error("potential has a zero-frequency coefficient (mean must vanish)");
    if (std::abs(it->second) == 0.0)
      it = coeffs_.erase(it);
    else
      ++it;
  }
  if (enforce_reality) {
    for (auto& [g, c] : coeffs_) {
      auto it = coeffs_.find(ivec_neg(g));
      if (it == coeffs_.end() || std::abs(it->second - std::conj(c)) > 1e-12)
        throw config_error("potential violates q_{-gamma} = conj(q_gamma) at gamma = " +
                           ivec_str(g));
    }
  }
}

double FourierPotential::sup_bound() const {
  double s = 0;
  for (auto& [g, c] : coeffs_) s += std::abs(c);
  return s;
}

double FourierPotential::support_radius(const lattice::Lattice& lat) const {
  double r = 0;
  for (auto& [g, c] : coeffs_) r = std::max(r, lat.gamma(g).norm());
  return r;
}

double FourierPotential::reality_defect() const {
  double w = 0;
  for (auto& [g, c] : coeffs_) {
    auto it = coeffs_.find(ivec_neg(g));
    cd other = it == coeffs_.end() ? cd(0, 0) : it->second;
    w = std::max(w, std::abs(other - std::conj(c)));
  }
  return w;
}

FourierPotential FourierPotential::cosine(int d, int axis, double amplitude, long long s) {
  CoeffMap m;
  IVec plus(d, 0), minus(d, 0);
  plus[axis] = 1;
  minus[axis] = -1;
  m[plus] = cd(amplitude, 0);
  m[minus] = cd(amplitude, 0);
  return FourierPotential(std::move(m), s);
}

FourierPotential FourierPotential::plus(const FourierPotential& other) const {
  CoeffMap m = coeffs_;
  for (auto& [g, c] : other.coeffs_) m[g] += c;
  return FourierPotential(std::move(m), std::max(declared_s_, other.declared_s_));
}

TruncationResult truncate(const FourierPotential& q, const lattice::Lattice& lat, double rho,
                          double alpha) {
  if (rho < 1) throw config_error("truncate: rho must be >= 1");
  double radius = std::pow(rho, alpha);
  TruncationResult res;
  FourierPotential::CoeffMap kept;
  for (auto& [g, c] : q.coeffs()) {
    if (lat.gamma(g).norm() < radius)
      kept[g] = c;
    else
      res.tail_mass += std::abs(c);
  }
  res.truncated = FourierPotential(std::move(kept), q.declared_s(), /*enforce_reality=*/false);
  return res;
}

DirectionalPotential directional(const FourierPotential& q, const lattice::DeltaGeometry& geom) {
  DirectionalPotential out;
  for (auto& [g, c] : q.coeffs()) {
    // gamma = n * delta exactly iff the integer coordinates are a multiple.
    const IVec& dc = geom.delta_coords;
    long long n = 0;
    bool collinear = true;
    for (size_t i = 0; i < dc.size() && collinear; ++i) {
      if (dc[i] != 0) {
        if (g[i] % dc[i] != 0) {
          collinear = false;
          break;
        }
        long long cand = g[i] / dc[i];
        if (n == 0)
          n = cand;
        else if (cand != n)
          collinear = false;
      } else if (g[i] != 0) {
        collinear = false;
      }
    }
    if (collinear && n != 0) {
      // All coordinates must agree with n * delta.
      for (size_t i = 0; i < dc.size(); ++i)
        if (g[i] != n * dc[i]) {
          collinear = false;
          break;
        }
    }
    if (collinear && n != 0) out.coeffs[static_cast<int>(n)] += c;
  }
  return out;
}

FourierPotential transverse_part(const FourierPotential& q, const lattice::DeltaGeometry& geom) {
  FourierPotential::CoeffMap m;
  DirectionalPotential dir = directional(q, geom);
  for (auto& [g, c] : q.coeffs()) {
    bool on_line = false;
    for (auto& [n, cc] : dir.coeffs) {
      bool match = true;
      for (size_t i = 0; i < g.size(); ++i)
        if (g[i] != n * geom.delta_coords[i]) {
          match = false;
          break;
        }
      if (match) {
        on_line = true;
        break;
      }
    }
    if (!on_line) m[g] = c;
  }
  return FourierPotential(std::move(m), q.declared_s(), /*enforce_reality=*/false);
}

void save(const FourierPotential& q, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw config_error("cannot open potential file for writing: " + path);
  std::fprintf(f, "# blochpert potential: m_1 .. m_d re im\n");
  for (auto& [g, c] : q.coeffs()) {
    for (int x : g) std::fprintf(f, "%d ", x);
    std::fprintf(f, "%.17g %.17g\n", c.real(), c.imag());
  }
  std::fclose(f);
}

FourierPotential load(const std::string& path, int d, long long declared_s, bool enforce_reality) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open potential file: " + path);
  FourierPotential::CoeffMap m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    IVec g(d);
    double re, im;
    if (!(is >> g[0])) continue;  // blank line
    for (int i = 1; i < d; ++i)
      if (!(is >> g[i]))
        throw config_error(path + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(d) + " integer coordinates");
    if (!(is >> re >> im))
      throw config_error(path + ":" + std::to_string(lineno) + ": expected re im");
    m[g] += cd(re, im);
  }
  return FourierPotential(std::move(m), declared_s, enforce_reality);
}

}  // namespace blochpert::potential
