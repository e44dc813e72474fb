#include <cstdlib>
#include <iostream>
#include <thread>

#include "blochpert/acceptance.hpp"

// Runs the full verification suite and exits nonzero on any failed criterion.
int main(int argc, char** argv) {
  blochpert::acceptance::Options opt;
  opt.threads = static_cast<int>(std::min(8u, std::max(1u, std::thread::hardware_concurrency())));
  if (const char* env = std::getenv("BLOCHPERT_THREADS")) opt.threads = std::atoi(env);
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--quick") {
      opt.mc_samples = 20000;
      opt.prune_rays = 40;
      opt.bdelta_samples = 16;
      opt.points_per_rho = 8;
    }
  }
  auto sum = blochpert::acceptance::run_all(opt, std::cout);
  return sum.all_pass() ? 0 : 1;
}
