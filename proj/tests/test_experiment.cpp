#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "blochpert/experiment.hpp"

using namespace blochpert;

namespace {

std::string write_config(const std::string& body) {
  std::string path = "/tmp/blochpert_test_config.json";
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kBase = R"({
  "dimension": 2,
  "lattice": {"basis": [[6.283185307179586, 0.0], [0.0, 6.283185307179586]]},
  "potential": {"cosines": [{"axis": 0, "amplitude": 1.0}, {"axis": 1, "amplitude": 1.0}]},
  "rho": [8.0],
  "t": [0.13, 0.29],
  "mode": "spectrum",
  "seed": 3,
  "numeric": {"slab_ball_mult": 4.0}
})";

}  // namespace

TEST_CASE("config loads and the spectrum mode is deterministic") {
  auto path = write_config(kBase);
  auto spec = experiment::load_config(path);
  CHECK(spec.dimension == 2);
  CHECK(spec.q.sup_bound() == doctest::Approx(4.0));

  spec.out_path = "/tmp/blochpert_out_a.csv";
  std::ostringstream sink;
  CHECK(experiment::run(spec, sink) == 0);
  auto spec2 = experiment::load_config(path);
  spec2.out_path = "/tmp/blochpert_out_b.csv";
  CHECK(experiment::run(spec2, sink) == 0);
  CHECK(slurp("/tmp/blochpert_out_a.csv") == slurp("/tmp/blochpert_out_b.csv"));
  CHECK(slurp("/tmp/blochpert_out_a.csv").find("rho,n,lambda") == 0);
  std::remove("/tmp/blochpert_out_a.csv");
  std::remove("/tmp/blochpert_out_b.csv");
}

TEST_CASE("classify and hill modes emit labeled records") {
  auto path = write_config(kBase);
  auto spec = experiment::load_config(path);
  spec.mode = "classify";
  spec.n_points = 8;
  std::ostringstream out;
  CHECK(experiment::run(spec, out) == 0);
  CHECK(out.str().find("kind") != std::string::npos);
  CHECK(out.str().find("nonresonant") != std::string::npos);

  auto spec2 = experiment::load_config(path);
  spec2.mode = "hill";
  spec2.v_list = {0.25};
  std::ostringstream out2;
  CHECK(experiment::run(spec2, out2) == 0);
  CHECK(out2.str().find("0.25,0,") != std::string::npos);
}

TEST_CASE("singular lattice is a config error naming the row") {
  auto path = write_config(R"({
    "dimension": 2,
    "lattice": {"basis": [[1.0, 2.0], [2.0, 4.0]]},
    "mode": "spectrum"
  })");
  CHECK_THROWS_WITH_AS(experiment::load_config(path), doctest::Contains("row 2"), config_error);
}

TEST_CASE("missing lattice and malformed json are config errors") {
  CHECK_THROWS_AS(experiment::load_config(write_config("{\"dimension\": 2}")), config_error);
  CHECK_THROWS_AS(experiment::load_config(write_config("{nope")), config_error);
  CHECK_THROWS_AS(experiment::load_config("/nonexistent/path.json"), config_error);
}

TEST_CASE("predict-nonres mode writes per-record errors instead of aborting") {
  auto path = write_config(kBase);
  auto spec = experiment::load_config(path);
  spec.mode = "predict-nonres";
  // Points chosen to include a slab point (per-record error) and a generic one.
  spec.input_points = {Vec(2), Vec(2)};
  spec.input_points[0] << 0.1, 8.0;   // resonant: floor error recorded
  spec.input_points[1] << 8.0 * std::cos(0.8), 8.0 * std::sin(0.8);
  std::ostringstream out;
  CHECK(experiment::run(spec, out) == 0);
  auto text = out.str();
  CHECK(text.find("below floor") != std::string::npos);
  CHECK(text.find("predicted") != std::string::npos);
}
