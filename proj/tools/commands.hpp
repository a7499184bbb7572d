#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <trustnav/assessment.hpp>
#include <trustnav/generator.hpp>
#include <trustnav/headless.hpp>

namespace trustnav::cli {

// Below this many rollouts the assess report carries a low-sample warning.
inline constexpr int kLowSampleThreshold = 30;

struct GenOptions {
  std::uint64_t seed = 0;
  int count = 20;
  GeneratorParams params;
  std::string out = "configs";
};

struct SolveOptions {
  std::string config;
  SolverParams solver;
  std::string out;  // stdout when empty
};

struct AssessOptions {
  std::string config;
  std::uint64_t seed = 0;
  AssessmentParams params;
};

struct HeadlessOptions {
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> condition;
  std::optional<std::string> op;
  std::optional<int> n_sessions;
  std::optional<std::string> out;
};

struct AnalyzeOptions {
  std::vector<std::string> logs;
  std::string out = "analysis";
};

// Each returns the process exit code. Results go to `out`, diagnostics to
// `err`.
int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err);
int cmd_assess(const AssessOptions& o, std::ostream& out, std::ostream& err);
int cmd_run_headless(const HeadlessOptions& o, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err);

// The assess report: the assessment, the rendered statement and a
// low_sample_count flag.
nlohmann::json assess_report(const GridConfig& config, const AssessOptions& o);

}  // namespace trustnav::cli
