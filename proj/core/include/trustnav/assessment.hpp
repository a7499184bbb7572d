#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/rng.hpp"
#include "trustnav/solver.hpp"
#include "trustnav/world.hpp"

namespace trustnav {

struct RewardSamples {
  std::vector<double> values;
  double r_min = 0.0;
};

// First partial moments about zero, split at r_min. A sample equal to r_min
// counts on the upper side. lpm_mag is the magnitude of the lower moment.
struct PartialMoments {
  double upm = 0.0;
  double lpm_mag = 0.0;
};

PartialMoments partial_moments(const RewardSamples& samples);

// Semantic: (upm - lpm) / (upm + lpm), i.e. the logistic transform evaluated
// at ln(lpm / upm). Literal: the printed transform 2 / (1 + e^(upm / -lpm)) - 1,
// which never goes below 0 and is kept for comparison runs only.
enum class OaMode { Semantic, Literal };

std::string_view to_string(OaMode m) noexcept;
OaMode parse_oa_mode(std::string_view s);

double outcome_assessment(double upm, double lpm_mag, OaMode mode = OaMode::Semantic);

enum class Label { VeryBad, Bad, Fair, Good, VeryGood };

inline constexpr std::array<Label, 5> kLabels{Label::VeryBad, Label::Bad, Label::Fair, Label::Good,
                                              Label::VeryGood};

// Statement wording, e.g. "very bad".
std::string_view to_string(Label l) noexcept;
Label parse_label(std::string_view s);

// [-1,-0.75) very bad, [-0.75,-0.25) bad, [-0.25,0.25] fair,
// (0.25,0.75] good, (0.75,1] very good.
Label label(double oa);

enum class ReportSource { Informed, Random, Absent };

std::string_view to_string(ReportSource s) noexcept;
ReportSource parse_report_source(std::string_view s);

struct ReportStatement {
  std::string robot_color;
  std::optional<Label> label;  // empty iff source == Absent
  std::string text;
  ReportSource source = ReportSource::Absent;

  static ReportStatement absent(std::string color);
  friend bool operator==(const ReportStatement&, const ReportStatement&) = default;
};

ReportStatement render_statement(std::string_view color, Label l,
                                 ReportSource source = ReportSource::Informed);

ReportStatement random_report(Rng& rng, std::string_view color);

struct OutcomeAssessment {
  std::string config_id;
  double upm = 0.0;
  double lpm_mag = 0.0;
  double oa = 0.0;
  Label label = Label::Fair;
  OaMode mode = OaMode::Semantic;
  int n_samples = 0;
  double r_min = 0.0;
  std::uint64_t seed = 0;
};

struct AssessmentParams {
  int n_rollouts = 100;
  double r_min = 0.0;
  OaMode mode = OaMode::Semantic;
  SolverParams solver;
};

// Rollouts of `policy` seeded with `seed`, reduced to an outcome assessment.
OutcomeAssessment assess(const GridConfig& config, const Policy& policy, std::uint64_t seed,
                         const AssessmentParams& params = {});

OutcomeAssessment assess_samples(std::string config_id, const RewardSamples& samples,
                                 OaMode mode, std::uint64_t seed);

nlohmann::json to_json(const OutcomeAssessment& a);
OutcomeAssessment assessment_from_json(const nlohmann::json& doc);

}  // namespace trustnav
