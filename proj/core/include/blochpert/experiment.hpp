#pragma once

#include <iosfwd>

#include "blochpert/acceptance.hpp"

namespace blochpert::experiment {

/// A batch run: config-driven mode dispatch over all modules, emitting CSV.
struct ExperimentSpec {
  int dimension = 2;
  long long smoothness = 0;  // 0: preset s0 of the chosen system
  bool section6 = false;     // resonance exponent system q = 4*3^d(d+1)
  lattice::Lattice lat;
  bool normalize_basis = false;
  double basis_scale = 1.0;  // recorded normalization factor
  potential::FourierPotential q;
  std::vector<double> rho;
  std::string mode;  // spectrum | classify | predict-nonres | predict-res |
                     // predict-singleres | bloch | isoenergetic | hill | verify-all
  std::string out_path;
  unsigned long long seed = 1;
  int threads = 1;
  core::NumericConfig cfg;
  Vec t;
  std::vector<Vec> input_points;
  int n_points = 16;
  IVec delta;
  std::vector<double> v_list;
  int j_range = 6;
  acceptance::Options accept;

  core::PaperParams params(double rho_value) const;
};

/// Parses the JSON config file.  Throws config_error with a line-anchored
/// message on malformed input.
ExperimentSpec load_config(const std::string& path);

/// Runs the experiment; returns the process exit code
/// (0 ok, 1 acceptance failure, 2 config error, 3 numerical failure).
int run(ExperimentSpec& spec, std::ostream& log);

}  // namespace blochpert::experiment
