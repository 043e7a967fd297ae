#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "nsdp/json_io.hpp"
#include "nsdp/sosc.hpp"
#include "nsdp/subderivative.hpp"

// Command implementations behind tools/nsdp_verify. Each returns the exit
// status, the text report and the JSON report.

namespace nsdp::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kInconclusive = 2, kInputError = 3 };

struct Flags {
  double tol = 1e-9;
  std::optional<double> rank_tol;
  double cert_tol = 1e-7;
  double margin_tol = 1e-9;
  int dirs = 512;
  std::optional<int> samples;
  std::uint64_t seed = 0;
};

struct Output {
  int exit_code = kOk;
  std::string text;
  io::json report;
};

namespace detail {

inline std::string fmt_vec(const Eigen::VectorXd& v) {
  std::ostringstream s;
  s << std::setprecision(6) << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v(i) + 0.0;
  s << ")";
  return s.str();
}

inline std::string fmt_set(const IndexSet& set) {
  std::ostringstream s;
  s << "{";
  for (std::size_t i = 0; i < set.size(); ++i) s << (i ? ", " : "") << set[i];
  s << "}";
  return s.str();
}

inline std::string fmt_num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

inline void echo_decomposition(std::ostream& out, const Eigen::VectorXd& eig, const IndexSet& pi,
                               const IndexSet& omega, double rank_tol) {
  out << "eigenvalues: " << fmt_vec(eig) << "\n"
      << "pi (positive): " << fmt_set(pi) << "  omega (zero): " << fmt_set(omega)
      << "  rank_tol: " << rank_tol << "\n";
}

inline Output input_error(const std::string& command, const std::string& kind,
                          const std::string& message) {
  return {kInputError, "error (" + kind + "): " + message + "\n",
          io::error_json(command, kind, message)};
}

}  // namespace detail

inline Output cmd_check_sosc(const std::string& problem_path, const Flags& flags) {
  const char* cmd = "check-sosc";
  io::ProblemFile pf;
  try {
    pf = io::problem_from_json(io::parse_file(problem_path));
  } catch (const std::exception& e) {
    return detail::input_error(cmd, "input", e.what());
  }
  SoscOptions opts;
  opts.tol = flags.tol;
  opts.rank_tol = flags.rank_tol;
  opts.cert_tol = flags.cert_tol;
  opts.margin_tol = flags.margin_tol;
  opts.n_dirs = flags.dirs;
  opts.seed = flags.seed;
  SoscReport rep;
  try {
    rep = check_sosc(pf.problem, pf.xbar, opts);
  } catch (const HypothesisError& e) {
    return detail::input_error(cmd, "infeasible_point", e.what());
  } catch (const std::invalid_argument& e) {
    return detail::input_error(cmd, "input", e.what());
  }

  std::ostringstream out;
  out << "check-sosc: n = " << pf.problem.n << ", m = " << pf.problem.m
      << ", x̄ = " << detail::fmt_vec(pf.xbar) << "\n";
  detail::echo_decomposition(out, rep.constraint_eigenvalues, rep.pi, rep.omega, rep.rank_tol);
  out << "verdict: " << to_string(rep.verdict) << "\n"
      << "critical directions checked: " << rep.directions_checked << "\n";
  if (rep.directions_checked > 0) {
    out << "min margin: " << (std::isfinite(rep.min_margin) ? detail::fmt_num(rep.min_margin)
                                                            : std::string("none (no multiplier)"))
        << "\n"
        << "worst direction: " << detail::fmt_vec(rep.worst_direction) << "\n";
  }
  for (const auto& d : rep.directions) {
    if (&d - rep.directions.data() >= 8) {
      out << "  ... (" << rep.directions.size() - 8 << " more directions in the JSON report)\n";
      break;
    }
    out << "  u = " << detail::fmt_vec(d.u) << "  " << to_string(d.status);
    if (d.margin) out << "  margin = " << detail::fmt_num(d.margin->margin);
    if (d.candidate) out << "  alpha = " << detail::fmt_num(d.candidate->alpha);
    out << "\n";
  }
  out << rep.diagnostics << "\n";

  int code = kOk;
  switch (rep.verdict) {
    case SoscVerdict::verified_sampled:
    case SoscVerdict::critical_cone_trivial: code = kOk; break;
    case SoscVerdict::failed_at_direction: code = kFailed; break;
    case SoscVerdict::inconclusive: code = kInconclusive; break;
  }
  return {code, out.str(), io::to_json(rep, opts)};
}

inline Output cmd_subderivative(const std::string& triple_path, const Flags& flags) {
  const char* cmd = "subderivative";
  io::Triple tr;
  try {
    tr = io::triple_from_json(io::parse_file(triple_path));
  } catch (const std::exception& e) {
    return detail::input_error(cmd, "input", e.what());
  }

  OrderedEigenDecomposition d;
  ExtendedReal closed = ExtendedReal::plus_infinity();
  try {
    d = eigen_decompose(tr.y, flags.rank_tol);
    if (!d.is_psd()) {
      return detail::input_error(cmd, "hypothesis_violation",
                                 "Y is not positive semidefinite: dist_psd(Y) = " +
                                     detail::fmt_num(dist_psd(tr.y)));
    }
    closed = second_subderivative(d, tr.ystar, tr.v, flags.tol);
  } catch (const HypothesisError& e) {
    return detail::input_error(cmd, "hypothesis_violation", e.what());
  } catch (const AnomalyError& e) {
    return detail::input_error(cmd, "anomaly", e.what());
  }

  std::ostringstream out;
  out << "subderivative: m = " << tr.y.dim() << "\n";
  detail::echo_decomposition(out, d.eigenvalues, d.pi, d.omega, d.rank_tol);
  out << "closed form: "
      << (closed.is_finite() ? detail::fmt_num(closed.value()) : to_string(closed.kind())) << "\n";

  io::json report{{"schema_version", io::kSchemaVersion},
                  {"command", cmd},
                  {"constraint", io::constraint_json(d.eigenvalues, d.pi, d.omega, d.rank_tol)},
                  {"closed_form", io::to_json(closed)},
                  {"oracle", nullptr},
                  {"recovery", io::json::array()}};
  if (closed.is_finite()) {
    SamplingOptions so;
    so.tol = flags.tol;
    so.rank_tol = flags.rank_tol;
    so.seed = flags.seed;
    if (flags.samples) so.n_samples = *flags.samples;
    try {
      const SamplingEstimate est = estimate_subderivative_sampling(tr.y, tr.ystar, tr.v, so);
      report["oracle"] = {{"estimate", est.value},
                          {"raw_min", est.raw_min},
                          {"recovery_limit", est.recovery_limit ? io::json(*est.recovery_limit)
                                                                : io::json(nullptr)}};
      out << "sampling oracle: " << detail::fmt_num(est.value)
          << "  (raw minimum " << detail::fmt_num(est.raw_min) << ")\n";
      if (est.recovery_limit) {
        out << "recovery-sequence limit: " << detail::fmt_num(*est.recovery_limit) << "\n";
      }
      out << "      t          recovery value     |V_t - V|     min sample   feasible\n";
      for (const auto& lv : est.levels) {
        report["recovery"].push_back(
            {{"t", lv.t},
             {"value", lv.recovery_value ? io::json(*lv.recovery_value) : io::json(nullptr)},
             {"distance", lv.recovery_value ? io::json(lv.recovery_distance) : io::json(nullptr)},
             {"min_sample", lv.min_value ? io::json(*lv.min_value) : io::json(nullptr)},
             {"feasible_samples", lv.feasible}});
        out << std::setw(11) << std::setprecision(4) << lv.t << "  " << std::setw(18)
            << (lv.recovery_value ? detail::fmt_num(*lv.recovery_value) : "-") << "  "
            << std::setw(12) << std::setprecision(4) << lv.recovery_distance << "  "
            << std::setw(12) << (lv.min_value ? detail::fmt_num(*lv.min_value) : "-") << "  "
            << lv.feasible << "\n";
      }
    } catch (const std::runtime_error& e) {
      out << "sampling oracle: " << e.what() << "\n";
    }
  }
  return {kOk, out.str(), report};
}

inline Output cmd_growth(const std::string& problem_path, double epsilon, double beta,
                         const Flags& flags) {
  const char* cmd = "growth";
  io::ProblemFile pf;
  try {
    pf = io::problem_from_json(io::parse_file(problem_path));
  } catch (const std::exception& e) {
    return detail::input_error(cmd, "input", e.what());
  }
  GrowthReport rep;
  try {
    rep = verify_growth(pf.problem, pf.xbar, epsilon, beta, flags.samples.value_or(10000),
                        flags.seed, flags.tol);
  } catch (const std::invalid_argument& e) {
    return detail::input_error(cmd, "input", e.what());
  }
  std::ostringstream out;
  out << "growth: epsilon = " << epsilon << ", beta = " << beta << "\n"
      << "samples: " << rep.samples << "  violations: " << rep.violations
      << "  min ratio: " << detail::fmt_num(rep.min_ratio) << "\n"
      << "feasible samples: " << rep.feasible_samples
      << "  violations: " << rep.feasible_violations
      << "  min ratio: " << detail::fmt_num(rep.feasible_min_ratio) << "\n";
  return {rep.violations == 0 ? kOk : kFailed, out.str(), io::to_json(rep, flags.seed)};
}

}  // namespace nsdp::cli
