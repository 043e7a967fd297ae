#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "nsdp/cli.hpp"

using namespace nsdp;
using nsdp::io::json;

namespace {

std::string data(const std::string& name) { return std::string(NSDP_DATA_DIR) + "/" + name; }

struct ToolRun {
  int code = -1;
  std::string out;
};

// Runs the built tool with stdout captured to a temporary file.
ToolRun run_tool(const std::string& args) {
  static int counter = 0;
  const auto path = std::filesystem::temp_directory_path() /
                    ("nsdp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  const std::string cmd =
      std::string("\"") + NSDP_VERIFY_BIN + "\" " + args + " > \"" + path.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  ToolRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  std::filesystem::remove(path);
  return r;
}

}  // namespace

TEST(CliCommands, CheckSoscExitCodes) {
  EXPECT_EQ(cli::cmd_check_sosc(data("p1.json"), {}).exit_code, cli::kOk);
  EXPECT_EQ(cli::cmd_check_sosc(data("p1_negated.json"), {}).exit_code, cli::kFailed);
  EXPECT_EQ(cli::cmd_check_sosc(data("trivial_cone.json"), {}).exit_code, cli::kOk);
  const auto bad = cli::cmd_check_sosc(data("truncated.json"), {});
  EXPECT_EQ(bad.exit_code, cli::kInputError);
  EXPECT_TRUE(bad.report.contains("error"));
}

TEST(CliCommands, CheckSoscTextEchoesDecomposition) {
  const auto out = cli::cmd_check_sosc(data("p1.json"), {});
  EXPECT_NE(out.text.find("eigenvalues: (1, 0)"), std::string::npos);
  EXPECT_NE(out.text.find("omega (zero): {1}"), std::string::npos);
  EXPECT_NE(out.text.find("VERIFIED_SAMPLED"), std::string::npos);
}

TEST(CliCommands, Subderivative) {
  const auto ok = cli::cmd_subderivative(data("triple_basic.json"), {});
  EXPECT_EQ(ok.exit_code, cli::kOk);
  EXPECT_EQ(ok.report["closed_form"]["kind"], "finite");
  EXPECT_NEAR(ok.report["closed_form"]["value"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(ok.report["oracle"]["estimate"].get<double>(), 2.0, 1e-6);
  EXPECT_TRUE(io::validate_report(ok.report).empty());

  const auto bad = cli::cmd_subderivative(data("triple_bad_multiplier.json"), {});
  EXPECT_EQ(bad.exit_code, cli::kInputError);
  EXPECT_EQ(bad.report["error"]["kind"], "hypothesis_violation");
}

TEST(CliCommands, Growth) {
  cli::Flags flags;
  flags.samples = 1000;
  EXPECT_EQ(cli::cmd_growth(data("p1.json"), 0.1, 0.25, flags).exit_code, cli::kOk);
  EXPECT_EQ(cli::cmd_growth(data("p1_negated.json"), 0.1, 0.25, flags).exit_code, cli::kFailed);
  const auto g = cli::cmd_growth(data("p1.json"), 0.1, 0.25, flags);
  const double above = g.report["min_ratio"].get<double>() * 1.01;
  EXPECT_EQ(cli::cmd_growth(data("p1.json"), 0.1, above, flags).exit_code, cli::kFailed);
  EXPECT_EQ(cli::cmd_growth(data("p1.json"), -0.1, 0.25, flags).exit_code, cli::kInputError);
}

TEST(CliBinary, ExitCodesAndJson) {
  EXPECT_EQ(run_tool("check-sosc " + data("p1.json")).code, 0);
  EXPECT_EQ(run_tool("check-sosc " + data("p1_negated.json")).code, 1);
  EXPECT_EQ(run_tool("check-sosc " + data("truncated.json")).code, 3);
  EXPECT_EQ(run_tool("growth " + data("p1.json") + " --beta 0.25 --samples 500").code, 0);
  EXPECT_EQ(run_tool("growth " + data("p1_negated.json") + " --beta 0.25 --samples 500").code, 1);
  EXPECT_EQ(run_tool("subderivative " + data("triple_bad_multiplier.json")).code, 3);
  EXPECT_EQ(run_tool("growth " + data("p1.json")).code, 3);  // --beta is required
  EXPECT_EQ(run_tool("frobnicate").code, 3);

  const ToolRun r = run_tool("check-sosc " + data("p1.json") + " --json -");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["verdict"], "VERIFIED_SAMPLED");
  EXPECT_TRUE(io::validate_report(j).empty());
}

TEST(CliBinary, RepeatedRunsAreIdentical) {
  for (const std::string& args :
       {"check-sosc " + data("p1_negated.json") + " --seed 7 --json -",
        "growth " + data("p1.json") + " --beta 0.25 --samples 500 --seed 7 --json -",
        "subderivative " + data("triple_basic.json") + " --seed 7 --json -"}) {
    const ToolRun a = run_tool(args);
    const ToolRun b = run_tool(args);
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out) << args;
  }
}
