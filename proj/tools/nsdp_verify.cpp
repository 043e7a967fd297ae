#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nsdp/cli.hpp"

namespace {

void add_common(CLI::App* sub, nsdp::cli::Flags& flags, std::string& json_path) {
  sub->add_option("--tol", flags.tol, "membership tolerance")->capture_default_str();
  sub->add_option("--rank-tol", flags.rank_tol, "eigenvalue rank tolerance (default: relative)");
  sub->add_option("--cert-tol", flags.cert_tol, "multiplier certificate tolerance")
      ->capture_default_str();
  sub->add_option("--margin-tol", flags.margin_tol, "margin positivity threshold")
      ->capture_default_str();
  sub->add_option("--dirs", flags.dirs, "random critical directions to sample")
      ->capture_default_str();
  sub->add_option("--samples", flags.samples, "sample count (growth: points, subderivative: per step)");
  sub->add_option("--seed", flags.seed, "random seed")->capture_default_str();
  sub->add_option("--json", json_path, "write the JSON report to PATH ('-' for stdout)");
}

int emit(const nsdp::cli::Output& out, const std::string& json_path) {
  if (json_path == "-") {
    std::cout << out.report.dump(2) << "\n";
  } else {
    std::cout << out.text;
    if (!json_path.empty()) {
      std::ofstream f(json_path);
      if (!f) {
        std::cerr << "cannot write " << json_path << "\n";
        return nsdp::cli::kInputError;
      }
      f << out.report.dump(2) << "\n";
    }
  }
  if (out.exit_code == nsdp::cli::kInputError) std::cerr << out.text;
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order sufficient condition checks for nonlinear semidefinite programs"};
  app.require_subcommand(1);

  nsdp::cli::Flags flags;
  std::string json_path;
  std::string path;
  double epsilon = 0.1;
  double beta = 0.0;

  auto* sosc = app.add_subcommand("check-sosc", "sampled SOSC check at the problem's xbar");
  sosc->add_option("problem", path, "problem JSON file")->required();
  add_common(sosc, flags, json_path);

  auto* sub = app.add_subcommand("subderivative",
                                 "second subderivative of the PSD indicator for a (Y, Y*, V) triple");
  sub->add_option("triple", path, "triple JSON file")->required();
  add_common(sub, flags, json_path);

  auto* growth = app.add_subcommand("growth", "empirical quadratic growth check around xbar");
  growth->add_option("problem", path, "problem JSON file")->required();
  growth->add_option("--epsilon", epsilon, "ball radius")->capture_default_str();
  growth->add_option("--beta", beta, "growth constant")->required();
  add_common(growth, flags, json_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nsdp::cli::kInputError;
  }

  if (*sosc) return emit(nsdp::cli::cmd_check_sosc(path, flags), json_path);
  if (*sub) return emit(nsdp::cli::cmd_subderivative(path, flags), json_path);
  return emit(nsdp::cli::cmd_growth(path, epsilon, beta, flags), json_path);
}
