#pragma once

#include <iosfwd>

#include "blochpert/isoenergetic.hpp"

namespace blochpert::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Options {
  core::NumericConfig cfg;
  long long smoothness = 0;   // 0: use the d=2 default of the main system
  long long smoothness6 = 0;  // 0: use the resonance-system default
  long long mc_samples = 100000;
  int bdelta_samples = 40;
  int prune_rays = 110;
  int points_per_rho = 12;
  unsigned long long seed = 1;
  int threads = 1;
};

struct Summary {
  std::vector<CriterionResult> results;
  bool all_pass() const {
    for (auto& r : results)
      if (!r.pass) return false;
    return !results.empty();
  }
};

/// Runs the full verification suite on the bundled d=2 setup
/// (2 pi Z^2 lattice, q = 2 cos x_1 + 2 cos x_2), one pass/fail line per
/// criterion on `log`.
Summary run_all(const Options& opt, std::ostream& log);

}  // namespace blochpert::acceptance
