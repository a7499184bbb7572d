#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/event_log.hpp"
#include "trustnav/session.hpp"

namespace trustnav {

class AnalyticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (robot - participant) / (robot + participant); nullopt when both are 0.
std::optional<double> control_proportion(std::int64_t a_robot, std::int64_t a_participant);

struct ControlProportionStat {
  std::string task_id;  // session/group/task
  std::int64_t a_robot = 0;
  std::int64_t a_participant = 0;
  std::optional<double> value;
};

ControlProportionStat control_proportion(const TaskRecord& record);

// Box-plot statistics; quartiles by linear interpolation between order
// statistics (position (n-1)p).
struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

std::optional<BoxStats> box_stats(std::vector<double> values);

struct GroupSummary {
  std::string key;  // report label, or "absent"
  int n_tasks = 0;
  int n_excluded = 0;  // control proportion undefined
  int n_random = 0;    // tasks whose report was drawn at random
  std::optional<BoxStats> control;
  double p_success = 0.0;
  double p_failure = 0.0;
  double p_abort = 0.0;
};

enum class ReportFilter { All, InformedOnly };

// One summary per report label present in the input, in label order
// (very bad .. very good), then "absent". Training tasks are ignored.
std::vector<GroupSummary> aggregate_by_report(std::span<const TaskRecord> records,
                                              ReportFilter filter = ReportFilter::All);

// Performance: rows high/random. ReportPresence: rows absent/informed
// (random-report tasks left out). ReportSource: rows absent/random/informed.
enum class Factor { Performance, ReportPresence, ReportSource };

std::string_view to_string(Factor f) noexcept;
// Throws AnalyticsError on an unknown factor name.
Factor parse_factor(std::string_view s);

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::int64_t>> counts;

  std::int64_t n() const noexcept;
  std::int64_t row_total(std::size_t r) const;
  std::int64_t col_total(std::size_t c) const;
  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

// Columns success, failure, abort. Training tasks are ignored.
ContingencyTable outcome_contingency(std::span<const TaskRecord> records, Factor factor);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson statistic with expected counts from the marginals. Throws
// AnalyticsError when any row or column total is zero.
ChiSquareResult chi_square(const ContingencyTable& table);

// sqrt(statistic / (n (min(rows, cols) - 1))).
double cramers_v(double statistic, std::int64_t n, int rows, int cols);

std::string summaries_csv(std::span<const GroupSummary> summaries);
std::string contingency_csv(const ContingencyTable& table);
ContingencyTable contingency_from_csv(std::string_view text);

nlohmann::json to_json(const GroupSummary& s);
nlohmann::json to_json(const ContingencyTable& t);

// Writes `content` verbatim; throws AnalyticsError when the destination
// cannot be written.
void write_file(const std::string& path, std::string_view content);

// Rebuilds task records from a session event log. Tasks without a task_end
// are dropped.
std::vector<TaskRecord> records_from_events(std::span<const Event> events);

}  // namespace trustnav
