#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using anisonorm::cli::Options;
  CLI::App app{"anisonorm: anisotropic norm analysis of finite-horizon "
               "LDTV systems"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("system-file", opt.file, "JSON system file")->required();
    sub->add_flag("--json", opt.json_output, "print a JSON report record");
  };
  auto add_tol = [&opt](CLI::App* sub, const char* what) {
    sub->add_option_function<double>(
        "--tol", [&opt](double v) { opt.tol = v; }, what);
  };

  auto* norm = app.add_subcommand("norm", "compute |||F|||_a");
  add_common(norm);
  norm->add_option("--a", opt.a, "anisotropy level (nats)");
  add_tol(norm, "root-finding tolerance (default 1e-10 or $ANISONORM_TOL)");
  norm->add_option("--method", opt.method, "dense|riccati|both")
      ->capture_default_str();
  norm->add_option("--budget", opt.budget, "allowed dual-path discrepancy")
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "decide |||F|||_a <= gamma");
  add_common(check);
  check->add_option("--a", opt.a, "anisotropy level (nats)");
  check->add_option_function<double>(
      "--gamma", [&opt](double v) { opt.gamma = v; }, "threshold")
      ->required();
  check->add_option("--tol", opt.decision_tol, "decision tolerance on margin")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "tabulate the norm over a grid");
  add_common(sweep);
  sweep->add_option("--grid", opt.grid,
                    "comma list of a values or lin:start:stop:count")
      ->required();
  sweep->add_option("--out", opt.out, "CSV output path (default stdout)");
  add_tol(sweep, "root-finding tolerance");

  auto* plot = app.add_subcommand("plotdata", "A(q), N(q), fA(q,gamma) table");
  add_common(plot);
  plot->add_option_function<double>(
      "--gamma", [&opt](double v) { opt.gamma = v; }, "threshold")
      ->required();
  plot->add_option("--points", opt.points, "number of q samples")
      ->capture_default_str();
  plot->add_option("--out", opt.out, "CSV output path (default stdout)");

  auto* outer = app.add_subcommand("outer", "state-space outerness test");
  add_common(outer);
  add_tol(outer, "max-abs residual tolerance (default 1e-8)");

  auto* factor = app.add_subcommand("factor", "spectral factor H at q");
  add_common(factor);
  factor->add_option_function<double>(
      "--q", [&opt](double v) { opt.q = v; }, "Riccati parameter")
      ->required();
  factor->add_option("--out", opt.out, "write H as a system file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : anisonorm::cli::kParseError;
  }
  for (auto* sub : {norm, check, sweep, plot, outer, factor}) {
    if (sub->parsed()) opt.command = sub->get_name();
  }
  return anisonorm::cli::run(opt, std::cout, std::cerr);
}
