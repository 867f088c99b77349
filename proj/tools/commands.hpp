#pragma once

// Implementation of the anisonorm subcommands. Each command writes a text
// report (or, with --json, a JSON report record) and returns the process
// exit code:
//
//   0  success / HOLDS / OUTER
//   1  FAILS / NOT OUTER / dual-path discrepancy over budget
//   2  system file could not be parsed
//   3  numerical range or argument error
//   4  output file could not be written

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "anisonorm/anisonorm.hpp"

namespace anisonorm::cli {

using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kNegative = 1,
  kParseError = 2,
  kRangeError = 3,
  kWriteError = 4,
};

inline constexpr double kDefaultBudget = 1e-6;

struct Options {
  std::string command;
  std::string file;
  double a = 0.0;
  std::optional<double> gamma;
  std::optional<double> q;
  std::optional<double> tol;
  double decision_tol = kDefaultDecisionTol;
  double budget = kDefaultBudget;
  std::string method = "both";
  std::string out;
  std::string grid;
  int points = 101;
  bool json_output = false;
};

/// Root-finding tolerance: --tol, else $ANISONORM_TOL, else the default.
inline double root_tol(const Options& opt) {
  if (opt.tol) return *opt.tol;
  if (const char* env = std::getenv("ANISONORM_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && *end == '\0' && v > 0.0) return v;
  }
  return kDefaultRootTol;
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// FNV-1a 64-bit digest of the raw file bytes, hex encoded.
inline std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

/// Parses "0,0.05,0.5" or "lin:start:stop:count".
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.rfind("lin:", 0) == 0) {
    double start = 0, stop = 0;
    int count = 0;
    if (std::sscanf(text.c_str() + 4, "%lf:%lf:%d", &start, &stop, &count) !=
            3 ||
        count < 1) {
      throw RangeError("grid: expected lin:start:stop:count");
    }
    for (int i = 0; i < count; ++i) {
      out.push_back(count == 1 ? start
                               : start + (stop - start) * i / (count - 1));
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw RangeError("grid: cannot parse \"" + item + "\"");
    }
    if (used != item.size()) {
      throw RangeError("grid: cannot parse \"" + item + "\"");
    }
    out.push_back(v);
  }
  return out;
}

namespace detail {

struct Context {
  const Options& opt;
  std::ostream& out;
  std::ostream& err;
  json report;

  void line(const std::string& key, double v) {
    if (!opt.json_output) out << key << ": " << fmt_double(v) << "\n";
  }
  void line(const std::string& key, const std::string& v) {
    if (!opt.json_output) out << key << ": " << v << "\n";
  }
  int finish(int code) {
    report["exit_code"] = code;
    if (opt.json_output) out << report.dump(2) << "\n";
    return code;
  }
};

inline json echo(const Options& opt) {
  json e = {{"command", opt.command}, {"file", opt.file}, {"a", opt.a},
            {"method", opt.method}};
  if (opt.gamma) e["gamma"] = *opt.gamma;
  if (opt.q) e["q"] = *opt.q;
  if (!opt.out.empty()) e["out"] = opt.out;
  if (!opt.grid.empty()) e["grid"] = opt.grid;
  if (opt.command == "plotdata") e["points"] = opt.points;
  return e;
}

inline bool write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return false;
  f << body;
  f.flush();
  return static_cast<bool>(f);
}

inline std::string csv_row(std::initializer_list<double> vals) {
  std::string row;
  bool first = true;
  for (double v : vals) {
    if (!first) row += ',';
    row += std::isnan(v) ? std::string("nan") : fmt_double(v);
    first = false;
  }
  return row + "\n";
}

inline int cmd_norm(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  if (!(o.a >= 0.0)) throw RangeError("--a must be >= 0");
  if (o.method != "dense" && o.method != "riccati" && o.method != "both") {
    throw RangeError("--method must be dense, riccati or both");
  }
  const double tol = root_tol(o);
  const GramOperator g = gram_operator(sys);
  const double lower = h2_norm(g) / std::sqrt(static_cast<double>(g.ell));
  const double upper = hinf_norm(g);
  json res = {{"h2_scaled", lower}, {"hinf", upper}};
  c.line("h2_scaled", lower);
  c.line("hinf", upper);
  std::optional<double> dense, ric;
  if (o.method != "riccati") {
    dense = anisotropic_norm_dense(g, o.a, tol);
    res["norm_dense"] = *dense;
    c.line("norm_dense", *dense);
  }
  if (o.method != "dense") {
    ric = anisotropic_norm_riccati(sys, o.a, tol, o.decision_tol);
    res["norm_riccati"] = *ric;
    c.line("norm_riccati", *ric);
  }
  const double norm = dense ? *dense : *ric;
  res["norm"] = norm;
  c.line("norm", norm);
  int code = kOk;
  if (dense && ric) {
    const double disc = std::abs(*dense - *ric);
    const double allowed = std::max(10.0 * tol, o.budget);
    res["discrepancy"] = disc;
    res["discrepancy_allowed"] = allowed;
    c.line("discrepancy", disc);
    if (disc > allowed) {
      c.err << "dual-path discrepancy " << fmt_double(disc)
            << " exceeds budget " << fmt_double(allowed) << "\n";
      code = kNegative;
    }
  }
  c.report["results"] = res;
  c.report["tolerances"] = {{"root", tol},
                            {"decision", o.decision_tol},
                            {"budget", o.budget}};
  return code;
}

inline json verdict_json(const AnbrlVerdict& v) {
  json j = {{"holds", v.holds},
            {"gamma", v.gamma},
            {"a", v.a},
            {"alpha", v.alpha},
            {"q_lower", v.q_lower},
            {"q_upper", v.q_upper},
            {"margin_unbounded", v.margin_unbounded},
            {"decision_tol", v.decision_tol}};
  j["witness_q"] = v.witness_q ? json(*v.witness_q) : json(nullptr);
  j["margin"] = v.margin ? json(*v.margin) : json(nullptr);
  return j;
}

inline int cmd_check(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  if (!o.gamma) throw RangeError("check requires --gamma");
  const AnbrlVerdict v = check_anbrl(sys, *o.gamma, o.a, o.decision_tol);
  c.line("verdict", v.holds ? "HOLDS" : "FAILS");
  c.line("gamma", v.gamma);
  c.line("a", v.a);
  c.line("witness_q", v.witness_q ? fmt_double(*v.witness_q) : "none");
  c.line("margin", v.margin ? fmt_double(*v.margin) : "none");
  c.line("margin_unbounded", v.margin_unbounded ? "true" : "false");
  c.line("q_interval", "[" + fmt_double(v.q_lower) + ", " +
                           fmt_double(v.q_upper) + ")");
  c.report["results"] = verdict_json(v);
  c.report["tolerances"] = {{"decision", o.decision_tol}};
  return v.holds ? kOk : kNegative;
}

inline int cmd_sweep(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  const std::vector<double> grid = parse_grid(o.grid);
  if (grid.empty()) throw RangeError("sweep: empty --grid");
  for (double a : grid) {
    if (!(a >= 0.0)) throw RangeError("sweep: grid values must be >= 0");
  }
  const double tol = root_tol(o);
  const GramOperator g = gram_operator(sys);
  std::string csv = "a,norm_dense,norm_riccati,discrepancy\n";
  json rows = json::array();
  for (double a : grid) {
    const double d = anisotropic_norm_dense(g, a, tol);
    const double r = anisotropic_norm_riccati(sys, a, tol, o.decision_tol);
    csv += csv_row({a, d, r, std::abs(d - r)});
    rows.push_back({{"a", a},
                    {"norm_dense", d},
                    {"norm_riccati", r},
                    {"discrepancy", std::abs(d - r)}});
  }
  c.report["results"] = {{"rows", rows}};
  c.report["tolerances"] = {{"root", tol}, {"decision", o.decision_tol}};
  if (o.out.empty()) {
    if (!o.json_output) c.out << csv;
  } else if (!write_file(o.out, csv)) {
    c.err << "cannot write " << o.out << "\n";
    return kWriteError;
  } else {
    c.line("wrote", o.out);
  }
  return kOk;
}

inline int cmd_plotdata(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  if (!o.gamma || !(*o.gamma > 0.0)) {
    throw RangeError("plotdata requires --gamma > 0");
  }
  if (o.points < 2) throw RangeError("plotdata: --points must be >= 2");
  const GramOperator g = gram_operator(sys);
  if (g.is_zero()) throw RangeError("plotdata: zero system has no q-range");
  const double gamma = *o.gamma;
  const double q_max = 0.999 / g.hinf_sq;
  std::string csv = "q,A_of_q,N_of_q,fA_of_q_gamma\n";
  for (int i = 0; i < o.points; ++i) {
    const double q = q_max * i / (o.points - 1);
    const QPoint p = evaluate_q(g, q);
    const double f =
        q * gamma * gamma < 1.0 ? fa(g, q, gamma) : std::nan("");
    csv += csv_row({q, p.aniso, p.gain, f});
  }
  c.report["results"] = {{"points", o.points}, {"q_max", q_max}};
  if (o.out.empty()) {
    if (!o.json_output) c.out << csv;
  } else if (!write_file(o.out, csv)) {
    c.err << "cannot write " << o.out << "\n";
    return kWriteError;
  } else {
    c.line("wrote", o.out);
  }
  return kOk;
}

inline int cmd_outer(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  const double tol = o.tol.value_or(kDefaultOuterTol);
  const OuternessReport rep = is_outer(sys, tol);
  const bool oracle = outerness_oracle(sys, tol);
  c.line("state_space", rep.outer ? "OUTER" : "NOT OUTER");
  c.line("dense_oracle", oracle ? "OUTER" : "NOT OUTER");
  if (!o.json_output) {
    c.out << "k,covariance_residual,cross_residual,cross_energy\n";
    for (std::size_t k = 0; k < rep.covariance_residual.size(); ++k) {
      c.out << k << ',' << fmt_double(rep.covariance_residual[k]) << ','
            << fmt_double(rep.cross_residual[k]) << ','
            << fmt_double(rep.cross_energy[k]) << "\n";
    }
  }
  c.report["results"] = {{"is_outer", rep.outer},
                         {"outerness_oracle", oracle},
                         {"covariance_residual", rep.covariance_residual},
                         {"cross_residual", rep.cross_residual},
                         {"cross_energy", rep.cross_energy}};
  c.report["tolerances"] = {{"outer", tol}};
  return rep.outer && oracle ? kOk : kNegative;
}

inline int cmd_factor(Context& c, const LdtvSystem& sys) {
  const Options& o = c.opt;
  if (!o.q || !(*o.q >= 0.0)) throw RangeError("factor requires --q >= 0");
  const double q = *o.q;
  const SpectralFactor sf = spectral_factor(sys, q);
  const double resid = verify_factorization(sys, q);
  const LdtvSystem psi = build_psi(sys, q);
  const OuternessReport rep = is_outer(psi);
  c.line("factorization_residual", resid);
  c.line("psi", rep.outer ? "OUTER" : "NOT OUTER");
  c.report["results"] = {{"factorization_residual", resid},
                         {"psi_outer", rep.outer}};
  if (!o.out.empty()) {
    if (!write_file(o.out, serialize_system(sf.h))) {
      c.err << "cannot write " << o.out << "\n";
      return kWriteError;
    }
    c.line("wrote", o.out);
  } else if (!o.json_output) {
    c.out << serialize_system(sf.h);
  }
  return kOk;
}

}  // namespace detail

/// Runs one subcommand end to end, mapping failures to exit codes.
inline int run(const Options& opt, std::ostream& out, std::ostream& err) {
  detail::Context c{opt, out, err, json::object()};
  c.report["command"] = detail::echo(opt);
  std::string bytes;
  LdtvSystem sys;
  try {
    std::ifstream in(opt.file, std::ios::binary);
    if (!in) throw FileFormatError(opt.file + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes = buf.str();
    sys = parse_system(bytes);
  } catch (const FileFormatError& e) {
    err << "error: " << e.what() << "\n";
    c.report["error"] = e.what();
    return c.finish(kParseError);
  }
  c.report["input_digest"] = digest(bytes);
  try {
    int code = kRangeError;
    if (opt.command == "norm") {
      code = detail::cmd_norm(c, sys);
    } else if (opt.command == "check") {
      code = detail::cmd_check(c, sys);
    } else if (opt.command == "sweep") {
      code = detail::cmd_sweep(c, sys);
    } else if (opt.command == "plotdata") {
      code = detail::cmd_plotdata(c, sys);
    } else if (opt.command == "outer") {
      code = detail::cmd_outer(c, sys);
    } else if (opt.command == "factor") {
      code = detail::cmd_factor(c, sys);
    } else {
      throw RangeError("unknown command " + opt.command);
    }
    return c.finish(code);
  } catch (const NonPdError& e) {
    err << "error: " << e.what() << "\n";
    c.report["error"] = e.what();
    c.report["first_failure"] = e.step;
    return c.finish(kRangeError);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    c.report["error"] = e.what();
    return c.finish(kRangeError);
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    c.report["error"] = e.what();
    return c.finish(kRangeError);
  }
}

}  // namespace anisonorm::cli
