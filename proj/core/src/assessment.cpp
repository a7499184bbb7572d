#include "trustnav/assessment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trustnav {

PartialMoments partial_moments(const RewardSamples& samples) {
  if (samples.values.empty()) throw std::invalid_argument("partial moments of an empty sample");
  if (!std::isfinite(samples.r_min)) throw std::invalid_argument("r_min must be finite");
  double upper = 0.0;
  double lower = 0.0;
  for (double r : samples.values) {
    if (r >= samples.r_min) {
      upper += r;
    } else {
      lower += std::abs(r);
    }
  }
  const auto n = static_cast<double>(samples.values.size());
  return {upper / n, lower / n};
}

std::string_view to_string(OaMode m) noexcept {
  return m == OaMode::Semantic ? "semantic" : "literal";
}

OaMode parse_oa_mode(std::string_view s) {
  if (s == "semantic") return OaMode::Semantic;
  if (s == "literal") return OaMode::Literal;
  throw std::invalid_argument("unknown oa mode '" + std::string(s) + "'");
}

double outcome_assessment(double upm, double lpm_mag, OaMode mode) {
  if (!(upm >= 0.0) || !(lpm_mag >= 0.0)) {
    throw std::invalid_argument("partial moments must be non-negative");
  }
  if (mode == OaMode::Semantic) {
    const double total = upm + lpm_mag;
    if (total == 0.0) return 0.0;
    return (upm - lpm_mag) / total;
  }
  double ratio = 0.0;
  if (lpm_mag == 0.0) {
    ratio = upm == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  } else {
    ratio = upm / -lpm_mag;
  }
  return 2.0 / (1.0 + std::exp(ratio)) - 1.0;
}

std::string_view to_string(Label l) noexcept {
  switch (l) {
    case Label::VeryBad: return "very bad";
    case Label::Bad: return "bad";
    case Label::Fair: return "fair";
    case Label::Good: return "good";
    case Label::VeryGood: return "very good";
  }
  return "fair";
}

Label parse_label(std::string_view s) {
  for (Label l : kLabels) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown label '" + std::string(s) + "'");
}

Label label(double oa) {
  if (!(oa >= -1.0 && oa <= 1.0)) throw std::out_of_range("oa outside [-1, 1]");
  if (oa < -0.75) return Label::VeryBad;
  if (oa < -0.25) return Label::Bad;
  if (oa <= 0.25) return Label::Fair;
  if (oa <= 0.75) return Label::Good;
  return Label::VeryGood;
}

std::string_view to_string(ReportSource s) noexcept {
  switch (s) {
    case ReportSource::Informed: return "informed";
    case ReportSource::Random: return "random";
    case ReportSource::Absent: return "absent";
  }
  return "absent";
}

ReportSource parse_report_source(std::string_view s) {
  if (s == "informed") return ReportSource::Informed;
  if (s == "random") return ReportSource::Random;
  if (s == "absent") return ReportSource::Absent;
  throw std::invalid_argument("unknown report source '" + std::string(s) + "'");
}

ReportStatement ReportStatement::absent(std::string color) {
  return {std::move(color), std::nullopt, {}, ReportSource::Absent};
}

ReportStatement render_statement(std::string_view color, Label l, ReportSource source) {
  if (source == ReportSource::Absent) {
    throw std::invalid_argument("an absent report has no statement");
  }
  std::string text = "the ";
  text += color;
  text += " robot has ";
  text += to_string(l);
  text += " confidence in navigating to the goal";
  return {std::string(color), l, std::move(text), source};
}

ReportStatement random_report(Rng& rng, std::string_view color) {
  return render_statement(color, kLabels[uniform_index(rng, kLabels.size())], ReportSource::Random);
}

OutcomeAssessment assess_samples(std::string config_id, const RewardSamples& samples,
                                 OaMode mode, std::uint64_t seed) {
  const auto m = partial_moments(samples);
  const double oa = outcome_assessment(m.upm, m.lpm_mag, mode);
  return {std::move(config_id), m.upm, m.lpm_mag, oa, label(oa),
          mode, static_cast<int>(samples.values.size()), samples.r_min, seed};
}

OutcomeAssessment assess(const GridConfig& config, const Policy& policy, std::uint64_t seed,
                         const AssessmentParams& params) {
  Rng rng{seed};
  RewardSamples samples{reward_distribution(config, policy, params.n_rollouts, rng, params.solver),
                        params.r_min};
  return assess_samples(config.id(), samples, params.mode, seed);
}

nlohmann::json to_json(const OutcomeAssessment& a) {
  return {{"config_id", a.config_id}, {"upm", a.upm},
          {"lpm", a.lpm_mag},         {"oa", a.oa},
          {"label", to_string(a.label)}, {"mode", to_string(a.mode)},
          {"n_samples", a.n_samples}, {"r_min", a.r_min},
          {"seed", a.seed}};
}

OutcomeAssessment assessment_from_json(const nlohmann::json& doc) {
  OutcomeAssessment a;
  a.config_id = doc.at("config_id").get<std::string>();
  a.upm = doc.at("upm").get<double>();
  a.lpm_mag = doc.at("lpm").get<double>();
  a.oa = doc.at("oa").get<double>();
  a.label = parse_label(doc.at("label").get<std::string>());
  a.mode = parse_oa_mode(doc.at("mode").get<std::string>());
  a.n_samples = doc.at("n_samples").get<int>();
  a.r_min = doc.at("r_min").get<double>();
  a.seed = doc.at("seed").get<std::uint64_t>();
  return a;
}

}  // namespace trustnav
