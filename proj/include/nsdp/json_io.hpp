#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsdp/errors.hpp"
#include "nsdp/nlsdp.hpp"
#include "nsdp/sosc.hpp"
#include "nsdp/subderivative.hpp"
#include "nsdp/symmat.hpp"

// File formats:
//   symmat  {"m": int, "lower": [row-major lower triangle, m(m+1)/2 reals]}
//   problem {"n", "m", "f": {"c", "g", "h": lower triangle}, "F": {"A0", "A", "B"?}, "xbar"}
//   triple  {"Y": symmat, "Ystar": symmat, "V": symmat}
// Reports carry "schema_version": "1".

namespace nsdp::io {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

namespace detail {

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where + ": non-finite number");
  return v;
}

inline std::size_t positive_int(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) {
    throw InputError(where + ": expected a positive integer");
  }
  return static_cast<std::size_t>(j.get<long long>());
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) + 0.0);  // no -0
  return out;
}

inline json indices(const IndexSet& s) {
  json out = json::array();
  for (std::size_t i : s) out.push_back(i);
  return out;
}

}  // namespace detail

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

inline json to_json(const SymMat& a) {
  return json{{"m", a.dim()}, {"lower", std::vector<double>(a.lower().begin(), a.lower().end())}};
}

inline SymMat symmat_from_json(const json& j, const std::string& where = "symmat") {
  const std::size_t m = detail::positive_int(detail::field(j, "m", where), where + ".m");
  std::vector<double> lower = detail::numbers(detail::field(j, "lower", where), where + ".lower");
  if (lower.size() != m * (m + 1) / 2) {
    throw InputError(where + ".lower: expected " + std::to_string(m * (m + 1) / 2) +
                     " entries, got " + std::to_string(lower.size()));
  }
  return SymMat::from_lower(m, std::move(lower));
}

struct ProblemFile {
  NlsdpProblem problem;
  Eigen::VectorXd xbar;
};

inline ProblemFile problem_from_json(const json& j) {
  const std::size_t n = detail::positive_int(detail::field(j, "n", "problem"), "problem.n");
  const std::size_t m = detail::positive_int(detail::field(j, "m", "problem"), "problem.m");

  const json& jf = detail::field(j, "f", "problem");
  QuadraticScalar f;
  f.c = jf.contains("c") ? detail::number(jf["c"], "f.c") : 0.0;
  const auto g = detail::numbers(detail::field(jf, "g", "f"), "f.g");
  if (g.size() != n) throw InputError("f.g: expected length n = " + std::to_string(n));
  f.g = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(n));
  const SymMat h = symmat_from_json(json{{"m", n}, {"lower", detail::field(jf, "h", "f")}}, "f.h");
  f.h = h.dense();

  const json& jF = detail::field(j, "F", "problem");
  const SymMat a0 = symmat_from_json(detail::field(jF, "A0", "F"), "F.A0");
  const json& ja = detail::field(jF, "A", "F");
  if (!ja.is_array() || ja.size() != n) throw InputError("F.A: expected n matrices");
  std::vector<SymMat> a;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(symmat_from_json(ja[i], "F.A[" + std::to_string(i) + "]"));
  }
  auto check_m = [&](const SymMat& s, const std::string& what) {
    if (s.dim() != m) throw InputError(what + ": expected dimension m = " + std::to_string(m));
  };
  check_m(a0, "F.A0");
  for (std::size_t i = 0; i < n; ++i) check_m(a[i], "F.A[" + std::to_string(i) + "]");

  ProblemFile out;
  try {
    if (jF.contains("B") && !jF["B"].is_null()) {
      const json& jb = jF["B"];
      if (!jb.is_array() || jb.size() != n) throw InputError("F.B: expected n rows");
      std::vector<std::vector<SymMat>> b(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!jb[i].is_array() || jb[i].size() != n) throw InputError("F.B: expected n columns");
        for (std::size_t k = 0; k < n; ++k) {
          const std::string where = "F.B[" + std::to_string(i) + "][" + std::to_string(k) + "]";
          b[i].push_back(symmat_from_json(jb[i][k], where));
          check_m(b[i].back(), where);
        }
      }
      out.problem = NlsdpProblem(std::move(f), QuadraticMatrixMap(a0, a, std::move(b)));
    } else {
      out.problem = NlsdpProblem(std::move(f), QuadraticMatrixMap(a0, a));
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(std::string("problem: ") + e.what());
  }

  const auto xbar = detail::numbers(detail::field(j, "xbar", "problem"), "xbar");
  if (xbar.size() != n) throw InputError("xbar: expected length n = " + std::to_string(n));
  out.xbar = Eigen::Map<const Eigen::VectorXd>(xbar.data(), static_cast<Eigen::Index>(n));
  return out;
}

inline json to_json(const NlsdpProblem& p, const Eigen::VectorXd& xbar) {
  json jh = json::array();
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t k = 0; k <= i; ++k)
      jh.push_back(p.f.h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
  json ja = json::array();
  for (std::size_t i = 0; i < p.n; ++i) ja.push_back(to_json(p.F.linear(i)));
  json out{{"n", p.n},
           {"m", p.m},
           {"f", {{"c", p.f.c}, {"g", detail::vec(p.f.g)}, {"h", jh}}},
           {"F", {{"A0", to_json(p.F.constant())}, {"A", ja}}},
           {"xbar", detail::vec(xbar)}};
  if (!p.F.is_affine()) {
    json jb = json::array();
    for (std::size_t i = 0; i < p.n; ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < p.n; ++k) row.push_back(to_json(p.F.quad(i, k)));
      jb.push_back(row);
    }
    out["F"]["B"] = jb;
  }
  return out;
}

struct Triple {
  SymMat y, ystar, v;
};

inline Triple triple_from_json(const json& j) {
  Triple t{symmat_from_json(detail::field(j, "Y", "triple"), "Y"),
           symmat_from_json(detail::field(j, "Ystar", "triple"), "Ystar"),
           symmat_from_json(detail::field(j, "V", "triple"), "V")};
  if (t.ystar.dim() != t.y.dim() || t.v.dim() != t.y.dim()) {
    throw InputError("triple: Y, Ystar and V must have the same dimension");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const ExtendedReal& e) {
  json out{{"kind", to_string(e.kind())}};
  out["value"] = e.is_finite() ? json(e.value()) : json(nullptr);
  return out;
}

inline json constraint_json(const Eigen::VectorXd& eigenvalues, const IndexSet& pi,
                            const IndexSet& omega, double rank_tol) {
  return json{{"eigenvalues", detail::vec(eigenvalues)},
              {"pi", detail::indices(pi)},
              {"omega", detail::indices(omega)},
              {"rank_tol", rank_tol}};
}

inline json to_json(const MultiplierCandidate& c) {
  return json{{"alpha", c.alpha},
              {"ystar", to_json(c.ystar)},
              {"stationarity_residual", c.stationarity_residual},
              {"normal_cone_slack", c.normal_cone_slack}};
}

inline json to_json(const SoscReport& r, const SoscOptions& opts) {
  json dirs = json::array();
  for (const auto& d : r.directions) {
    json jd{{"u", detail::vec(d.u)},
            {"status", to_string(d.status)},
            {"null_dim", d.null_dim},
            {"best_feasibility", detail::finite_or_null(d.best_feasibility)}};
    jd["margin"] = d.margin ? json(d.margin->margin) : json(nullptr);
    jd["margin_subderivative"] = d.margin ? json(d.margin->margin_subderivative) : json(nullptr);
    jd["certificate"] = d.candidate ? to_json(*d.candidate) : json(nullptr);
    dirs.push_back(jd);
  }
  return json{{"schema_version", kSchemaVersion},
              {"command", "check-sosc"},
              {"verdict", to_string(r.verdict)},
              {"sampled", true},
              {"directions_checked", r.directions_checked},
              {"min_margin", detail::finite_or_null(r.min_margin)},
              {"worst_direction", r.worst_direction.size() ? detail::vec(r.worst_direction)
                                                           : json(nullptr)},
              {"constraint", constraint_json(r.constraint_eigenvalues, r.pi, r.omega, r.rank_tol)},
              {"directions", dirs},
              {"options",
               {{"tol", opts.tol},
                {"cert_tol", opts.cert_tol},
                {"margin_tol", opts.margin_tol},
                {"dirs", opts.n_dirs},
                {"seed", opts.seed}}},
              {"diagnostics", r.diagnostics}};
}

inline json to_json(const GrowthReport& r, std::uint64_t seed) {
  return json{{"schema_version", kSchemaVersion},
              {"command", "growth"},
              {"epsilon", r.epsilon},
              {"beta", r.beta},
              {"seed", seed},
              {"samples", r.samples},
              {"violations", r.violations},
              {"min_ratio", detail::finite_or_null(r.min_ratio)},
              {"feasible",
               {{"samples", r.feasible_samples},
                {"violations", r.feasible_violations},
                {"min_ratio", detail::finite_or_null(r.feasible_min_ratio)}}}};
}

inline json error_json(const std::string& command, const std::string& kind,
                       const std::string& message) {
  return json{{"schema_version", kSchemaVersion},
              {"command", command},
              {"error", {{"kind", kind}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// Schema check. Mirrors docs/report.schema.json.

namespace detail {

class Checker {
 public:
  std::vector<std::string> errors;

  void require(const json& j, const std::string& key, const std::string& where,
               bool (json::*pred)() const noexcept, const char* type, bool nullable = false) {
    if (!j.contains(key)) {
      errors.push_back(where + ": missing \"" + key + "\"");
      return;
    }
    const json& v = j[key];
    if (nullable && v.is_null()) return;
    if (!(v.*pred)()) errors.push_back(where + "." + key + ": expected " + type);
  }

  // Nonnegative integer; in-memory reports may hold it as a signed value.
  void count(const json& j, const std::string& key, const std::string& where) {
    require(j, key, where, &json::is_number_integer, "count");
    if (j.contains(key) && j[key].is_number_integer() && !j[key].is_number_unsigned() &&
        j[key].get<long long>() < 0) {
      errors.push_back(where + "." + key + ": expected a nonnegative count");
    }
  }

  void number_array(const json& j, const std::string& key, const std::string& where,
                    bool nullable = false) {
    require(j, key, where, &json::is_array, "array", nullable);
    if (!j.contains(key) || !j[key].is_array()) return;
    for (const auto& v : j[key])
      if (!v.is_number()) errors.push_back(where + "." + key + ": expected numbers");
  }

  void symmat(const json& j, const std::string& where) {
    if (!j.is_object()) {
      errors.push_back(where + ": expected symmat object");
      return;
    }
    require(j, "m", where, &json::is_number_integer, "integer");
    number_array(j, "lower", where);
    if (j.contains("m") && j["m"].is_number_integer() && j.contains("lower") &&
        j["lower"].is_array()) {
      const auto m = j["m"].get<std::size_t>();
      if (j["lower"].size() != m * (m + 1) / 2) errors.push_back(where + ".lower: wrong length");
    }
  }
};

}  // namespace detail

/// Returns the list of schema violations; empty means the report is valid.
inline std::vector<std::string> validate_report(const json& j) {
  detail::Checker c;
  if (!j.is_object()) return {"report: expected an object"};
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    c.errors.push_back("report: schema_version must be \"1\"");
  }
  c.require(j, "command", "report", &json::is_string, "string");
  if (!j.contains("command") || !j["command"].is_string()) return c.errors;
  const std::string cmd = j["command"];

  if (j.contains("error")) {
    c.require(j["error"], "kind", "error", &json::is_string, "string");
    c.require(j["error"], "message", "error", &json::is_string, "string");
    return c.errors;
  }

  if (cmd == "check-sosc") {
    c.require(j, "verdict", "report", &json::is_string, "string");
    if (j.contains("verdict")) {
      static const std::vector<std::string> verdicts{"VERIFIED_SAMPLED", "FAILED_AT_DIRECTION",
                                                     "CRITICAL_CONE_TRIVIAL", "INCONCLUSIVE"};
      if (std::find(verdicts.begin(), verdicts.end(), j["verdict"]) == verdicts.end()) {
        c.errors.push_back("report.verdict: unknown value");
      }
    }
    c.require(j, "sampled", "report", &json::is_boolean, "boolean");
    c.count(j, "directions_checked", "report");
    c.require(j, "min_margin", "report", &json::is_number, "number", true);
    c.number_array(j, "worst_direction", "report", true);
    c.require(j, "constraint", "report", &json::is_object, "object");
    if (j.contains("constraint") && j["constraint"].is_object()) {
      const json& k = j["constraint"];
      c.number_array(k, "eigenvalues", "constraint");
      c.number_array(k, "pi", "constraint");
      c.number_array(k, "omega", "constraint");
      c.require(k, "rank_tol", "constraint", &json::is_number, "number");
    }
    c.require(j, "options", "report", &json::is_object, "object");
    c.require(j, "diagnostics", "report", &json::is_string, "string");
    c.require(j, "directions", "report", &json::is_array, "array");
    if (j.contains("directions") && j["directions"].is_array()) {
      for (std::size_t i = 0; i < j["directions"].size(); ++i) {
        const json& d = j["directions"][i];
        const std::string w = "directions[" + std::to_string(i) + "]";
        c.number_array(d, "u", w);
        c.require(d, "status", w, &json::is_string, "string");
        c.count(d, "null_dim", w);
        c.require(d, "best_feasibility", w, &json::is_number, "number", true);
        c.require(d, "margin", w, &json::is_number, "number", true);
        c.require(d, "margin_subderivative", w, &json::is_number, "number", true);
        c.require(d, "certificate", w, &json::is_object, "object", true);
        if (d.contains("certificate") && d["certificate"].is_object()) {
          const json& cert = d["certificate"];
          const std::string wc = w + ".certificate";
          c.require(cert, "alpha", wc, &json::is_number, "number");
          c.require(cert, "stationarity_residual", wc, &json::is_number, "number");
          c.require(cert, "normal_cone_slack", wc, &json::is_number, "number");
          if (cert.contains("ystar")) {
            c.symmat(cert["ystar"], wc + ".ystar");
          } else {
            c.errors.push_back(wc + ": missing \"ystar\"");
          }
        }
      }
    }
  } else if (cmd == "growth") {
    for (const char* k : {"epsilon", "beta"}) c.require(j, k, "report", &json::is_number, "number");
    for (const char* k : {"seed", "samples", "violations"})
      c.count(j, k, "report");
    c.require(j, "min_ratio", "report", &json::is_number, "number", true);
    c.require(j, "feasible", "report", &json::is_object, "object");
    if (j.contains("feasible") && j["feasible"].is_object()) {
      const json& f = j["feasible"];
      c.count(f, "samples", "feasible");
      c.count(f, "violations", "feasible");
      c.require(f, "min_ratio", "feasible", &json::is_number, "number", true);
    }
  } else if (cmd == "subderivative") {
    c.require(j, "constraint", "report", &json::is_object, "object");
    c.require(j, "closed_form", "report", &json::is_object, "object");
    if (j.contains("closed_form") && j["closed_form"].is_object()) {
      c.require(j["closed_form"], "kind", "closed_form", &json::is_string, "string");
      c.require(j["closed_form"], "value", "closed_form", &json::is_number, "number", true);
    }
    c.require(j, "oracle", "report", &json::is_object, "object", true);
    if (j.contains("oracle") && j["oracle"].is_object()) {
      c.require(j["oracle"], "estimate", "oracle", &json::is_number, "number");
      c.require(j["oracle"], "raw_min", "oracle", &json::is_number, "number");
      c.require(j["oracle"], "recovery_limit", "oracle", &json::is_number, "number", true);
    }
    c.require(j, "recovery", "report", &json::is_array, "array");
    if (j.contains("recovery") && j["recovery"].is_array()) {
      for (std::size_t i = 0; i < j["recovery"].size(); ++i) {
        const json& r = j["recovery"][i];
        const std::string w = "recovery[" + std::to_string(i) + "]";
        c.require(r, "t", w, &json::is_number, "number");
        c.require(r, "value", w, &json::is_number, "number", true);
        c.require(r, "distance", w, &json::is_number, "number", true);
        c.require(r, "min_sample", w, &json::is_number, "number", true);
        c.count(r, "feasible_samples", w);
      }
    }
  } else {
    c.errors.push_back("report.command: unknown command \"" + cmd + "\"");
  }
  return c.errors;
}

}  // namespace nsdp::io
