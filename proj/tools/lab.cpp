// lab: command-line front end for the experiment runner.
//
//   lab <kind> --gamma 0.7 --n 10000 --out runs/
//   lab <kind> --config exp.txt [--seed 9]
//   lab export-table --gamma 0.5 --p 3 --xi 1 --K 50 --M 400 --out tables/
//   lab update-fixtures --dir tests/fixtures

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tiedown/lab/export.hpp"
#include "tiedown/lab/runner.hpp"

namespace {

using namespace tiedown;

int run_kind(const std::string& kind, const std::string& config_path, const std::map<std::string, CLI::Option*>& opts,
             const std::map<std::string, std::string>& values) {
  lab::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = lab::parse_config(read_text(config_path));
  cfg.kind = kind;
  for (const auto& [key, opt] : opts)
    if (opt->count() > 0) lab::set_field(cfg, key, values.at(key));
  const lab::RunResult r = lab::run_experiment(cfg);
  lab::VerdictMap all;
  all[r.id] = r.verdicts;
  lab::emit_report(all, cfg.out);
  for (const auto& v : r.verdicts) {
    std::printf("%-28s %-5s observed=%-24s target=%-12s tol=%-12s %s\n", v.metric.c_str(),
                v.pass ? "PASS" : "FAIL", format_double(v.observed).c_str(), format_double(v.target).c_str(),
                format_double(v.tolerance).c_str(), lab::mode_name(v.mode));
  }
  return lab::all_pass(r.verdicts) ? 0 : 1;
}

void write_bridge_fixture(const std::filesystem::path& dir, std::int64_t n) {
  const auto pmf = bridge_local_time_exact(WalkLaw::lazy(), n);
  CsvTable t;
  t.header = {"l", "prob"};
  for (std::size_t l = 0; l < pmf.size(); ++l) t.rows.push_back({static_cast<double>(l), pmf[l]});
  write_csv(dir / ("bridge_n" + std::to_string(n) + ".csv"), t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tied-down renewal and occupation-time experiments"};
  app.require_subcommand(1);

  std::map<std::string, std::string> values;
  std::string config_path;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  const std::map<std::string, std::string> flags = {
      {"gamma", "--gamma"}, {"p", "--p"},         {"xi", "--xi"},       {"n", "--n"},
      {"bins", "--bins"},   {"trials", "--trials"}, {"seed", "--seed"}, {"g", "--g"},
      {"map", "--map"},     {"kappa", "--kappa"}, {"mc_n", "--mc-n"},   {"out", "--out"}};
  for (auto kind : lab::kKinds) {
    auto* sub = app.add_subcommand(std::string(kind), "run the " + std::string(kind) + " experiment");
    sub->add_option("--config", config_path, "flat key=value configuration file");
    for (const auto& [key, flag] : flags) options[std::string(kind)][key] = sub->add_option(flag, values[key]);
  }

  double gamma = 0.5;
  std::int64_t p = 1;
  std::int64_t xi = 1;
  std::int64_t K = 50;
  std::int64_t M = 400;
  std::string table_out = "tables";
  auto* exp = app.add_subcommand("export-table", "write a convolution table as CSV plus JSON sidecar");
  exp->add_option("--gamma", gamma);
  exp->add_option("--p", p);
  exp->add_option("--xi", xi);
  exp->add_option("--K", K);
  exp->add_option("--M", M);
  exp->add_option("--out", table_out);

  std::string fixture_dir = "tests/fixtures";
  auto* fix = app.add_subcommand("update-fixtures", "regenerate the golden bridge fixtures");
  fix->add_option("--dir", fixture_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*exp) {
      const ConvolutionTable table(LatticeLaw(gamma, p, xi), K, M);
      lab::export_table(table, table_out, "convolution");
      return 0;
    }
    if (*fix) {
      ensure_directory(fixture_dir);
      write_bridge_fixture(fixture_dir, 2);
      write_bridge_fixture(fixture_dir, 4);
      return 0;
    }
    for (auto kind : lab::kKinds) {
      const std::string k(kind);
      if (*app.get_subcommand(k)) return run_kind(k, config_path, options[k], values);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
