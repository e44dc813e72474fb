#pragma once

#include "blochpert/lattice.hpp"
#include "blochpert/params.hpp"

namespace blochpert::domains {

enum class Kind { NonResonant, Resonant, SingleResonant };

struct DomainLabel {
  Kind kind = Kind::NonResonant;
  int order = 0;                  // k with x in E_k \ E_{k+1}; 0 when non-resonant
  std::vector<IVec> directions;   // witness directions, linearly independent
  IVec delta;                     // maximal direction of the line, single-resonance only
  bool shell_ok = false;          // x in R(3 rho/2) \ R(rho/2)

  bool non_resonant() const { return kind == Kind::NonResonant && shell_ok; }
  bool single_resonant() const { return kind == Kind::SingleResonant; }
};

/// rho/2 < |x| < 3 rho/2 with closed boundaries at tolerance 1e-12.
bool in_shell(const Vec& x, double rho);

/// | |x|^2 - |x+b|^2 | < rho^exponent together with the shell condition.
bool in_resonance_slab(const Vec& x, const Vec& b, double rho, double exponent);

/// Resonance classification of x: scans b in Gamma(m rho^alpha) (m from the
/// config), finds the largest k with k independent directions whose
/// rho^{alpha_k}-slabs all contain x.  Witnesses are chosen greedily by
/// smallest |gamma|, lexicographic tie-break.
DomainLabel classify(const Vec& x, const lattice::Lattice& lat, const core::PaperParams& pp,
                     const core::NumericConfig& cfg, double width_mult = 1.0);

/// Membership of x in E_k at slab width `width_mult` * rho^{alpha_k}.
bool in_E_k(const Vec& x, int k, const lattice::Lattice& lat, const core::PaperParams& pp,
            const core::NumericConfig& cfg, double width_exponent);

/// The B_k(gamma+t, p1) index set of the resonance matrix.
struct BkIndexSet {
  Vec center;                     // gamma + t
  Vec t;
  std::vector<IVec> directions;
  std::vector<IVec> member_coords;  // h_i in Gamma
  std::vector<Vec> members;         // h_i + t
  long long count() const { return static_cast<long long>(members.size()); }
  int center_index = -1;            // position of gamma + t itself
};

BkIndexSet build_Bk(const Vec& center, const Vec& t, const std::vector<IVec>& directions,
                    const lattice::Lattice& lat, const core::PaperParams& pp,
                    const core::NumericConfig& cfg);

/// | |x|^2 - rho^2 | < rho^{alpha_1} (strict).
bool in_K_rho(const Vec& x, double rho, const core::PaperParams& pp);

struct McFraction {
  BinomialCI ci;
  long long samples = 0;
};

/// Fraction of uniform samples on the sphere |x| = rho that lie in the
/// non-resonance domain U, with a Wilson confidence interval.
McFraction mc_nonresonance_fraction(const lattice::Lattice& lat, const core::PaperParams& pp,
                                    const core::NumericConfig& cfg, long long n_samples,
                                    unsigned long long seed);

/// Uniform point on the sphere of radius rho (normalized Gaussian direction).
Vec sphere_sample(int d, double rho, std::mt19937_64& rng);

/// Exact integer rank of a set of lattice coordinate vectors.
int integer_rank(const std::vector<IVec>& vecs);

}  // namespace blochpert::domains
