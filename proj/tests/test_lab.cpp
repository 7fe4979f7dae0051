#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "tiedown/lab/export.hpp"
#include "tiedown/lab/runner.hpp"

using namespace tiedown;
using namespace tiedown::lab;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tiedown-lab-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, SerializeParseRoundTrip) {
  ExperimentConfig c;
  c.kind = "renewal-llt";
  c.gamma = 0.7;
  c.p = 3;
  c.xi = 2;
  c.seed = 123456789012345ULL;
  c.g = "exp-decay";
  c.out = "somewhere/else";
  EXPECT_EQ(parse_config(serialize(c)), c);
  const std::string text = serialize(c);
  EXPECT_EQ(serialize(parse_config(text)), text);
  c.gamma = 0.1 + 0.2;
  EXPECT_EQ(parse_config(serialize(c)).gamma, c.gamma);
}

TEST(Config, CommentsAndBlankLines) {
  const ExperimentConfig c = parse_config("# header\n\nkind=map-tail\n  gamma = 0.6 \n");
  EXPECT_EQ(c.kind, "map-tail");
  EXPECT_EQ(c.gamma, 0.6);
  EXPECT_EQ(c.n, ExperimentConfig{}.n);
}

TEST(Config, Errors) {
  ExperimentConfig c;
  EXPECT_THROW(set_field(c, "colour", "red"), UsageError);
  EXPECT_THROW(set_field(c, "gamma", "half"), UsageError);
  EXPECT_THROW(parse_config("gamma\n"), UsageError);
  c.kind = "nope";
  EXPECT_THROW(validate(c), UsageError);
  c = ExperimentConfig{};
  c.gamma = 1.0;
  EXPECT_THROW(validate(c), UsageError);
  c.kind = "map-tail";
  EXPECT_NO_THROW(validate(c));
  c.kind = "map-tied";
  EXPECT_THROW(validate(c), UsageError);
  c = ExperimentConfig{};
  c.p = 4;
  c.xi = 2;
  EXPECT_THROW(validate(c), UsageError);
  c = ExperimentConfig{};
  c.kind = "walk-bridge";
  c.n = 2001;
  EXPECT_THROW(validate(c), UsageError);
}

TEST(Verdict, Modes) {
  EXPECT_TRUE(judge(Mode::kTwoSided, 1.04, 1.0, 0.05));
  EXPECT_FALSE(judge(Mode::kTwoSided, 0.94, 1.0, 0.05));
  EXPECT_TRUE(judge(Mode::kUpperBound, 0.01, 0.01, 0.0));
  EXPECT_FALSE(judge(Mode::kUpperBound, 0.0101, 0.01, 0.0));
  EXPECT_TRUE(judge(Mode::kInformational, 1e9, 0.0, 0.0));
  EXPECT_FALSE(make_verdict("x", std::nan(""), 0.0, 1.0).pass);
}

TEST(Verdict, EmptyReportIsAnObject) {
  EXPECT_EQ(report_json({}).dump(), "{}");
  const auto dir = scratch("empty");
  emit_report({}, dir);
  EXPECT_EQ(read_text(dir / "report.json"), "{}\n");
}

TEST(Verdict, ReportCarriesSeedButNotRuntime) {
  VerdictMap all;
  Verdict v = make_verdict("ks", 0.01, 0.05, 0.0, Mode::kUpperBound, 7);
  v.runtime = 3.5;
  all["map-dk"] = {v};
  const Json r = report_json(all);
  EXPECT_EQ(r["map-dk"][0]["seed"], 7);
  EXPECT_FALSE(r["map-dk"][0].contains("runtime"));
  EXPECT_EQ(timings_json(all)["map-dk"]["ks"], 3.5);
}

TEST(Runner, RenewalSrtPasses) {
  ExperimentConfig c = parse_config(read_text(std::filesystem::path(TIEDOWN_SOURCE_DIR) / "tools/configs/renewal_srt.txt"));
  c.out = scratch("srt").string();
  const RunResult r = run_experiment(c);
  ASSERT_FALSE(r.verdicts.empty());
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.pass) << v.metric << " observed " << v.observed;
  EXPECT_EQ(parse_config(read_text(r.dir / "config.txt")), c);
}

TEST(Runner, DistPasses) {
  ExperimentConfig c;
  c.kind = "dist";
  c.gamma = 0.5;
  c.trials = 200000;
  c.out = scratch("dist").string();
  const RunResult r = run_experiment(c);
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.pass) << v.metric << " observed " << v.observed;
}

TEST(Runner, SeededRunsAreByteIdentical) {
  ExperimentConfig c;
  c.kind = "renewal-continuous";
  c.gamma = 0.6;
  c.n = 1000;
  c.trials = 20000;
  c.seed = 99;
  auto run = [&](const std::string& tag) {
    c.out = scratch(tag).string();
    VerdictMap all;
    const RunResult r = run_experiment(c);
    all[r.id] = r.verdicts;
    emit_report(all, c.out);
    return read_text(std::filesystem::path(c.out) / "report.json");
  };
  const std::string a = run("det-a");
  const std::string b = run("det-b");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"seed\": 99"), std::string::npos);
}

TEST(Export, TableCsvAndSidecar) {
  const LatticeLaw law(0.7, 1, 1);
  const ConvolutionTable t(law, 5, 40);
  const auto dir = scratch("export");
  export_table(t, dir, "tbl");
  const std::string csv = read_text(dir / "tbl.csv");
  EXPECT_EQ(csv.rfind("k,m,prob\n", 0), 0u);
  const Json meta = Json::parse(read_text(dir / "tbl.json"));
  EXPECT_EQ(meta["K"], 5);
  EXPECT_EQ(meta["M"], 40);
  EXPECT_EQ(meta["overflow"].size(), 5u);
  // every listed entry is a positive probability that matches the table
  std::size_t lines = 0;
  std::size_t pos = csv.find('\n') + 1;
  while (pos < csv.size()) {
    const std::size_t end = csv.find('\n', pos);
    const std::string line = csv.substr(pos, end - pos);
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const std::int64_t k = std::stoll(line.substr(0, c1));
    const std::int64_t m = std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
    EXPECT_EQ(parse_double(line.substr(c2 + 1)), t.prob(k, m));
    ++lines;
    pos = end + 1;
  }
  EXPECT_GT(lines, 100u);
}
