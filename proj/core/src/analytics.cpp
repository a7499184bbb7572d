#include "trustnav/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>

#include <boost/math/special_functions/gamma.hpp>

#include "trustnav/csv.hpp"

namespace trustnav {

std::optional<double> control_proportion(std::int64_t a_robot, std::int64_t a_participant) {
  if (a_robot < 0 || a_participant < 0) throw AnalyticsError("action counts must be non-negative");
  const std::int64_t total = a_robot + a_participant;
  if (total == 0) return std::nullopt;
  return static_cast<double>(a_robot - a_participant) / static_cast<double>(total);
}

ControlProportionStat control_proportion(const TaskRecord& record) {
  const auto robot = static_cast<std::int64_t>(record.robot_actions.size());
  const auto participant = static_cast<std::int64_t>(record.participant_actions.size());
  return {record.session + "/" + std::to_string(record.group) + "/" + std::to_string(record.task),
          robot, participant, control_proportion(robot, participant)};
}

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string report_key(const TaskRecord& r) {
  return r.report_shown.label ? std::string(to_string(*r.report_shown.label)) : "absent";
}

int key_rank(const std::string& key) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (to_string(kLabels[i]) == key) return static_cast<int>(i);
  }
  return static_cast<int>(kLabels.size());
}

}  // namespace

std::optional<BoxStats> box_stats(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  BoxStats s;
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

std::vector<GroupSummary> aggregate_by_report(std::span<const TaskRecord> records,
                                              ReportFilter filter) {
  struct Acc {
    std::vector<double> values;
    GroupSummary summary;
    int successes = 0, failures = 0, aborts = 0;
  };
  std::map<std::string, Acc> groups;
  for (const auto& r : records) {
    if (r.training) continue;
    if (filter == ReportFilter::InformedOnly && r.report_shown.source == ReportSource::Random) continue;
    auto& acc = groups[report_key(r)];
    ++acc.summary.n_tasks;
    if (r.report_shown.source == ReportSource::Random) ++acc.summary.n_random;
    if (const auto cp = control_proportion(r).value) {
      acc.values.push_back(*cp);
    } else {
      ++acc.summary.n_excluded;
    }
    switch (r.outcome) {
      case TaskOutcome::Success: ++acc.successes; break;
      case TaskOutcome::Failure: ++acc.failures; break;
      case TaskOutcome::Abort: ++acc.aborts; break;
    }
  }

  std::vector<GroupSummary> out;
  for (auto& [key, acc] : groups) {
    acc.summary.key = key;
    acc.summary.control = box_stats(std::move(acc.values));
    const double n = acc.summary.n_tasks;
    acc.summary.p_success = acc.successes / n;
    acc.summary.p_failure = acc.failures / n;
    acc.summary.p_abort = acc.aborts / n;
    out.push_back(std::move(acc.summary));
  }
  std::stable_sort(out.begin(), out.end(), [](const GroupSummary& a, const GroupSummary& b) {
    return key_rank(a.key) < key_rank(b.key);
  });
  return out;
}

std::string_view to_string(Factor f) noexcept {
  switch (f) {
    case Factor::Performance: return "performance";
    case Factor::ReportPresence: return "reporting-presence";
    case Factor::ReportSource: return "report-source";
  }
  return "performance";
}

Factor parse_factor(std::string_view s) {
  for (Factor f : {Factor::Performance, Factor::ReportPresence, Factor::ReportSource}) {
    if (to_string(f) == s) return f;
  }
  throw AnalyticsError("unknown factor '" + std::string(s) + "'");
}

std::int64_t ContingencyTable::n() const noexcept {
  std::int64_t total = 0;
  for (const auto& row : counts) total = std::accumulate(row.begin(), row.end(), total);
  return total;
}

std::int64_t ContingencyTable::row_total(std::size_t r) const {
  return std::accumulate(counts.at(r).begin(), counts.at(r).end(), std::int64_t{0});
}

std::int64_t ContingencyTable::col_total(std::size_t c) const {
  std::int64_t total = 0;
  for (const auto& row : counts) total += row.at(c);
  return total;
}

ContingencyTable outcome_contingency(std::span<const TaskRecord> records, Factor factor) {
  ContingencyTable t;
  t.col_labels = {"success", "failure", "abort"};
  switch (factor) {
    case Factor::Performance: t.row_labels = {"high", "random"}; break;
    case Factor::ReportPresence: t.row_labels = {"absent", "informed"}; break;
    case Factor::ReportSource: t.row_labels = {"absent", "random", "informed"}; break;
  }
  t.counts.assign(t.row_labels.size(), std::vector<std::int64_t>(3, 0));
  for (const auto& r : records) {
    if (r.training) continue;
    std::optional<std::size_t> row;
    const ReportSource source = r.report_shown.source;
    switch (factor) {
      case Factor::Performance:
        row = r.condition.performance == PerformanceLevel::High ? 0U : 1U;
        break;
      case Factor::ReportPresence:
        if (source == ReportSource::Absent) row = 0U;
        if (source == ReportSource::Informed) row = 1U;
        break;
      case Factor::ReportSource:
        row = source == ReportSource::Absent ? 0U : source == ReportSource::Random ? 1U : 2U;
        break;
    }
    if (!row) continue;
    ++t.counts[*row][static_cast<std::size_t>(r.outcome)];
  }
  return t;
}

ChiSquareResult chi_square(const ContingencyTable& table) {
  const std::size_t rows = table.counts.size();
  const std::size_t cols = rows ? table.counts.front().size() : 0;
  if (rows < 2 || cols < 2) throw AnalyticsError("contingency table needs at least 2x2 cells");
  const auto n = static_cast<double>(table.n());
  std::vector<double> row_totals(rows);
  std::vector<double> col_totals(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    row_totals[r] = static_cast<double>(table.row_total(r));
    if (row_totals[r] == 0) throw AnalyticsError("zero row total for '" + table.row_labels.at(r) + "'");
  }
  for (std::size_t c = 0; c < cols; ++c) {
    col_totals[c] = static_cast<double>(table.col_total(c));
    if (col_totals[c] == 0) throw AnalyticsError("zero column total for '" + table.col_labels.at(c) + "'");
  }
  ChiSquareResult result;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = row_totals[r] * col_totals[c] / n;
      const double diff = static_cast<double>(table.counts[r][c]) - expected;
      result.statistic += diff * diff / expected;
    }
  }
  result.dof = static_cast<int>((rows - 1) * (cols - 1));
  result.p_value = boost::math::gamma_q(result.dof / 2.0, result.statistic / 2.0);
  return result;
}

double cramers_v(double statistic, std::int64_t n, int rows, int cols) {
  if (n <= 0) throw AnalyticsError("Cramer's V needs a positive sample size");
  if (std::min(rows, cols) < 2) throw AnalyticsError("Cramer's V needs at least a 2x2 table");
  if (statistic < 0) throw AnalyticsError("negative chi-square statistic");
  return std::sqrt(statistic / (static_cast<double>(n) * (std::min(rows, cols) - 1)));
}

std::string summaries_csv(std::span<const GroupSummary> summaries) {
  std::vector<csv::Row> rows{{"key", "n_tasks", "n_excluded", "n_random", "cp_min", "cp_q1",
                              "cp_median", "cp_q3", "cp_max", "cp_mean", "p_success", "p_failure",
                              "p_abort"}};
  for (const auto& s : summaries) {
    csv::Row row{s.key, std::to_string(s.n_tasks), std::to_string(s.n_excluded),
                 std::to_string(s.n_random)};
    if (s.control) {
      for (double v : {s.control->min, s.control->q1, s.control->median, s.control->q3,
                       s.control->max, s.control->mean}) {
        row.push_back(csv::number(v));
      }
    } else {
      row.insert(row.end(), 6, "");
    }
    for (double v : {s.p_success, s.p_failure, s.p_abort}) row.push_back(csv::number(v));
    rows.push_back(std::move(row));
  }
  return csv::format(rows);
}

std::string contingency_csv(const ContingencyTable& table) {
  std::vector<csv::Row> rows;
  csv::Row header{"level"};
  header.insert(header.end(), table.col_labels.begin(), table.col_labels.end());
  rows.push_back(std::move(header));
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    csv::Row row{table.row_labels[r]};
    for (auto c : table.counts[r]) row.push_back(std::to_string(c));
    rows.push_back(std::move(row));
  }
  return csv::format(rows);
}

ContingencyTable contingency_from_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty() || rows.front().size() < 2) throw AnalyticsError("contingency CSV lacks a header");
  ContingencyTable t;
  t.col_labels.assign(rows.front().begin() + 1, rows.front().end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != rows.front().size()) throw AnalyticsError("ragged contingency CSV row");
    t.row_labels.push_back(row.front());
    std::vector<std::int64_t> counts;
    for (std::size_t c = 1; c < row.size(); ++c) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(row[c], &used);
        if (used != row[c].size() || v < 0) throw std::invalid_argument("count");
        counts.push_back(v);
      } catch (const std::logic_error&) {
        throw AnalyticsError("bad count '" + row[c] + "' in contingency CSV");
      }
    }
    t.counts.push_back(std::move(counts));
  }
  return t;
}

nlohmann::json to_json(const GroupSummary& s) {
  nlohmann::json j = {{"key", s.key},
                      {"n_tasks", s.n_tasks},
                      {"n_excluded", s.n_excluded},
                      {"n_random", s.n_random},
                      {"p_success", s.p_success},
                      {"p_failure", s.p_failure},
                      {"p_abort", s.p_abort}};
  if (s.control) {
    j["control_proportion"] = {{"min", s.control->min},       {"q1", s.control->q1},
                               {"median", s.control->median}, {"q3", s.control->q3},
                               {"max", s.control->max},       {"mean", s.control->mean}};
  } else {
    j["control_proportion"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const ContingencyTable& t) {
  return {{"rows", t.row_labels}, {"cols", t.col_labels}, {"counts", t.counts}, {"n", t.n()}};
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AnalyticsError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw AnalyticsError("write to '" + path + "' failed");
}

std::vector<TaskRecord> records_from_events(std::span<const Event> events) {
  using Key = std::tuple<std::string, int, int>;
  std::map<Key, TaskRecord> open;
  std::vector<TaskRecord> out;

  auto pose_of = [](const nlohmann::json& p) { return Pose{p.at("x").get<int>(), p.at("y").get<int>()}; };

  for (const auto& e : events) {
    const Key key{e.session, e.group, e.task};
    const auto& p = e.payload;
    try {
      switch (e.type) {
        case EventType::TaskStart: {
          TaskRecord r;
          r.session = e.session;
          r.group = e.group;
          r.task = e.task;
          r.training = p.value("training", false);
          r.config_id = p.at("config_id").get<std::string>();
          const auto& c = p.at("condition");
          r.condition = StudyCondition::make(parse_reporting_level(c.at("reporting").get<std::string>()),
                                             parse_performance_level(c.at("performance").get<std::string>()));
          r.presence = parse_report_presence(p.at("presence").get<std::string>());
          r.report_shown.robot_color = p.value("robot_color", std::string{});
          r.report_shown.source = parse_report_source(p.at("report_source").get<std::string>());
          if (p.at("report_label").is_string()) {
            r.report_shown.label = parse_label(p.at("report_label").get<std::string>());
          }
          open[key] = std::move(r);
          break;
        }
        case EventType::ReportShown:
          if (auto it = open.find(key); it != open.end()) {
            it->second.report_shown.text = p.at("text").get<std::string>();
          }
          break;
        case EventType::OperatorAction:
          if (auto it = open.find(key); it != open.end()) {
            it->second.participant_actions.push_back({pose_of(p), parse_action(p.at("action").get<std::string>())});
          }
          break;
        case EventType::RobotAction:
          if (auto it = open.find(key); it != open.end()) {
            it->second.robot_actions.push_back({pose_of(p), parse_action(p.at("action").get<std::string>())});
          }
          break;
        case EventType::ModeChange:
          if (auto it = open.find(key); it != open.end()) {
            it->second.mode_switches.push_back({e.t_ms, parse_control_mode(p.at("mode").get<std::string>())});
          }
          break;
        case EventType::TaskEnd:
          if (auto it = open.find(key); it != open.end()) {
            it->second.outcome = parse_task_outcome(p.at("outcome").get<std::string>());
            it->second.total_time = p.at("total_time").get<double>();
            it->second.score = p.at("score").get<double>();
            out.push_back(std::move(it->second));
            open.erase(it);
          }
          break;
        case EventType::Abort:
        case EventType::Survey:
          break;
      }
    } catch (const nlohmann::json::exception& ex) {
      throw AnalyticsError(std::string("malformed ") + std::string(to_string(e.type)) +
                           " payload: " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw AnalyticsError(std::string("malformed ") + std::string(to_string(e.type)) +
                           " payload: " + ex.what());
    }
  }
  return out;
}

}  // namespace trustnav
