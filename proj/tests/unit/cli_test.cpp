#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <commands.hpp>
#include <trustnav/analytics.hpp>

using namespace trustnav;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("trustnav-cli-" + std::to_string(::getpid()) + "-" +
                                                std::to_string(counter()++))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, GenWritesLoadableConfigs) {
  TempDir dir;
  cli::GenOptions o;
  o.seed = 3;
  o.count = 6;
  o.out = (dir.path / "cfg").string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_gen(o, out, err), 0) << err.str();
  const auto configs = load_configs({o.out});
  EXPECT_EQ(configs.size(), 6u);
  EXPECT_EQ(configs, generate_configs(3, 6, o.params));
}

TEST(Cli, SolveWritesSolution) {
  TempDir dir;
  const auto cfg = dir.path / "g.txt";
  std::ofstream(cfg) << "S..G\n";
  cli::SolveOptions o;
  o.config = cfg.string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_solve(o, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_TRUE(j.contains("policy"));
  EXPECT_TRUE(j.contains("values"));
}

TEST(Cli, MissingConfigFails) {
  cli::SolveOptions o;
  o.config = "/no/such/config.json";
  std::ostringstream out, err;
  EXPECT_THROW(cli::cmd_solve(o, out, err), GridError);
}

TEST(Cli, AssessReportAndLowSampleWarning) {
  TempDir dir;
  const auto cfg = dir.path / "g.txt";
  std::ofstream(cfg) << "S.~.G\n.....\n";
  cli::AssessOptions o;
  o.config = cfg.string();
  o.params.n_rollouts = 10;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_assess(o, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["label"], "very good");
  EXPECT_EQ(j["low_sample_count"], true);
  EXPECT_NE(j["statement"].get<std::string>().find("very good"), std::string::npos);
  EXPECT_FALSE(err.str().empty());

  o.params.n_rollouts = cli::kLowSampleThreshold;
  std::ostringstream out2, err2;
  ASSERT_EQ(cli::cmd_assess(o, out2, err2), 0);
  EXPECT_EQ(nlohmann::json::parse(out2.str())["low_sample_count"], false);
}

TEST(Cli, AssessSeedMatchesLibrary) {
  const auto config = load_configs({TRUSTNAV_DATA_DIR "/configs/cfg-005.json"}).front();
  const auto lib = TaskLibrary::build({config});
  cli::AssessOptions o;
  o.config = "unused";
  const auto report = cli::assess_report(config, o);
  EXPECT_EQ(report["oa"].get<double>(), lib.at(config.id()).assessment.oa);
  EXPECT_EQ(report["seed"].get<std::uint64_t>(), lib.at(config.id()).assessment.seed);
}

TEST(Cli, HeadlessThenAnalyze) {
  TempDir dir;
  const auto manifest = dir.path / "m.json";
  RunManifest m;
  m.seed = 1;
  m.n_sessions = 4;
  m.op.kind = OperatorKind::ReportFollowing;
  m.configs = {TRUSTNAV_DATA_DIR "/configs"};
  m.out = "run.jsonl";  // relative to the manifest
  std::ofstream(manifest) << m.to_json().dump(2);

  cli::HeadlessOptions h;
  h.manifest = manifest.string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run_headless(h, out, err), 0) << err.str();
  const auto log = dir.path / "run.jsonl";
  ASSERT_TRUE(fs::exists(log));
  const auto first = slurp(log);

  ASSERT_EQ(cli::cmd_run_headless(h, out, err), 0);
  EXPECT_EQ(slurp(log), first);

  cli::AnalyzeOptions a;
  a.logs = {dir.path.string()};
  a.out = (dir.path / "analysis").string();
  ASSERT_EQ(cli::cmd_analyze(a, out, err), 0) << err.str();
  for (const char* f : {"tasks.csv", "control_proportion_by_label.csv", "control_proportion_by_label.json",
                        "contingency_performance.csv", "contingency_reporting-presence.json", "report.json"}) {
    EXPECT_TRUE(fs::exists(dir.path / "analysis" / f)) << f;
  }
  const auto table = contingency_from_csv(slurp(dir.path / "analysis" / "contingency_reporting-presence.csv"));
  EXPECT_EQ(table.n(), 32);
}

TEST(Cli, HeadlessOverridesWin) {
  TempDir dir;
  const auto manifest = dir.path / "m.json";
  RunManifest m;
  m.n_sessions = 1;
  m.configs = {TRUSTNAV_DATA_DIR "/configs"};
  std::ofstream(manifest) << m.to_json().dump();
  cli::HeadlessOptions h;
  h.manifest = manifest.string();
  h.n_sessions = 2;
  h.condition = "random-random";
  h.out = (dir.path / "o.jsonl").string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run_headless(h, out, err), 0) << err.str();
  std::ifstream in(dir.path / "o.jsonl");
  const auto records = records_from_events(read_event_log(in).events);
  EXPECT_EQ(records.size(), 16u);
  for (const auto& r : records) EXPECT_EQ(condition_name(r.condition), "random-random");
}

TEST(Cli, AnalyzeEmptyInputWarns) {
  TempDir dir;
  std::ofstream(dir.path / "empty.jsonl") << "garbage\n";
  cli::AnalyzeOptions a;
  a.logs = {dir.path.string()};
  a.out = (dir.path / "analysis").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_analyze(a, out, err), 0);
  EXPECT_FALSE(err.str().empty());
}
