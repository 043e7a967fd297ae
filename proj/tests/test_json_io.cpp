#include <gtest/gtest.h>

#include "nsdp/json_io.hpp"
#include "support/instances.hpp"

using namespace nsdp;
namespace fx = nsdp::testing;
using nsdp::io::json;

namespace {

std::string data(const std::string& name) { return std::string(NSDP_DATA_DIR) + "/" + name; }

}  // namespace

TEST(JsonIo, ParsesP1Fixture) {
  const auto pf = io::problem_from_json(io::parse_file(data("p1.json")));
  EXPECT_EQ(pf.problem.n, 2u);
  EXPECT_EQ(pf.problem.m, 2u);
  EXPECT_TRUE(pf.xbar.isZero());
  const NlsdpProblem ref = fx::fixture_p1();
  const Eigen::Vector2d x(0.3, -0.7);
  EXPECT_EQ(eval_F(pf.problem, x), eval_F(ref, x));
  EXPECT_EQ(eval_f(pf.problem, x), eval_f(ref, x));
}

TEST(JsonIo, MalformedAndMissingFiles) {
  EXPECT_THROW(io::parse_file(data("truncated.json")), InputError);
  EXPECT_THROW(io::parse_file(data("does_not_exist.json")), InputError);
}

TEST(JsonIo, StructuralErrorsAreInputErrors) {
  json j = io::parse_file(data("p1.json"));
  j["F"]["A"][0]["lower"] = {1.0, 2.0};
  EXPECT_THROW(io::problem_from_json(j), InputError);
  j = io::parse_file(data("p1.json"));
  j.erase("xbar");
  EXPECT_THROW(io::problem_from_json(j), InputError);
  j = io::parse_file(data("p1.json"));
  j["f"]["g"] = {"a", 1.0};
  EXPECT_THROW(io::problem_from_json(j), InputError);
}

TEST(JsonIo, ProblemRoundTrip) {
  fx::Rng rng(81);
  const NlsdpProblem p = fx::random_problem(rng, 3, 2);
  const Eigen::Vector3d xbar(0.1, 0.2, 0.3);
  const auto back = io::problem_from_json(io::to_json(p, xbar));
  EXPECT_EQ(back.xbar, Eigen::VectorXd(xbar));
  const Eigen::Vector3d x(1.0, -2.0, 0.5);
  EXPECT_EQ(eval_F(back.problem, x), eval_F(p, x));
  EXPECT_DOUBLE_EQ(eval_f(back.problem, x), eval_f(p, x));
}

TEST(JsonIo, TripleFixture) {
  const auto t = io::triple_from_json(io::parse_file(data("triple_basic.json")));
  EXPECT_EQ(t.y, SymMat::diagonal({1, 0}));
  EXPECT_EQ(t.ystar, SymMat::diagonal({0, -1}));
  EXPECT_EQ(t.v, SymMat::from_lower(2, {0, 1, 0}));
}

TEST(JsonIo, ReportsValidate) {
  const NlsdpProblem p = fx::fixture_p1();
  const SoscOptions opts;
  const json sosc = io::to_json(check_sosc(p, Eigen::Vector2d::Zero(), opts), opts);
  EXPECT_TRUE(io::validate_report(sosc).empty());
  const json trivial = io::to_json(check_sosc(fx::fixture_trivial_cone(), Eigen::VectorXd::Zero(1)), opts);
  EXPECT_TRUE(io::validate_report(trivial).empty());
  const json growth = io::to_json(verify_growth(p, Eigen::Vector2d::Zero(), 0.1, 0.25, 100, 0), 0);
  EXPECT_TRUE(io::validate_report(growth).empty());
  EXPECT_TRUE(io::validate_report(io::error_json("growth", "input_error", "x")).empty());
}

TEST(JsonIo, ValidatorFlagsBrokenReports) {
  const SoscOptions opts;
  json sosc = io::to_json(check_sosc(fx::fixture_p1(), Eigen::Vector2d::Zero(), opts), opts);
  json bad = sosc;
  bad["verdict"] = "MAYBE";
  EXPECT_FALSE(io::validate_report(bad).empty());
  bad = sosc;
  bad.erase("directions_checked");
  EXPECT_FALSE(io::validate_report(bad).empty());
  bad = sosc;
  bad["directions"][0]["certificate"]["ystar"]["lower"] = {1.0};
  EXPECT_FALSE(io::validate_report(bad).empty());
  bad = sosc;
  bad["schema_version"] = "0";
  EXPECT_FALSE(io::validate_report(bad).empty());
  EXPECT_FALSE(io::validate_report(json::array()).empty());
}
