#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigbird/cloudsim.hpp"
#include "bigbird/common.hpp"
#include "bigbird/ingestion.hpp"
#include "bigbird/slots.hpp"
#include "json.hpp"

namespace bigbird::obs {

// A derived row, never stored: recomputed from the job ledgers on demand.
struct JobStatsRow {
  std::string project;
  std::string job_id;
  slots::JobKind job_type = slots::JobKind::query;
  slots::JobState state = slots::JobState::queued;
  Timestamp submitted_at = 0;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
  std::string reservation_name;
  std::int64_t slots_consumed = 0;
  std::optional<Duration> execution_time;  // absent while not finished

  bool operator==(const JobStatsRow&) const = default;
};

struct InfoSchemaFilter {
  std::optional<std::string> project;
  std::optional<slots::JobKind> type;
  std::optional<slots::JobState> state;
  std::optional<Timestamp> submitted_from;
  std::optional<Timestamp> submitted_to;
};

// Organization- or project-scoped view over both job ledgers. Scope is the
// organization id or a project resource id.
Result<std::vector<JobStatsRow>> info_schema_query(const sim::CloudSim& sim,
                                                   const slots::SlotPool& pool,
                                                   const ingest::LoadService& load,
                                                   std::string_view scope,
                                                   const InfoSchemaFilter& filter);

enum class MetricName {
  current_total_jobs,
  execution_time_per_job_per_project,
  failed_jobs_per_project,
  slots_allocated,
  slots_used,
  jobs_waiting_for_slots,
  degradation_warnings,
};

std::string_view metric_name(MetricName m);
std::optional<MetricName> parse_metric(std::string_view s);

struct MetricPoint {
  Timestamp ts = 0;
  std::int64_t value = 0;  // counts and duration sums are exact integers

  bool operator==(const MetricPoint&) const = default;
};

struct MetricSeries {
  MetricName name = MetricName::current_total_jobs;
  std::map<std::string, std::string> dimensions;
  std::vector<MetricPoint> points;  // strictly increasing timestamps

  bool operator==(const MetricSeries&) const = default;
};

enum class Comparator { gt, ge, lt, le };

std::string_view comparator_name(Comparator c);
std::optional<Comparator> parse_comparator(std::string_view s);

struct AlertRule {
  std::string name;
  MetricName metric = MetricName::failed_jobs_per_project;
  std::map<std::string, std::string> dim_filter;  // subset match on series dims
  Comparator comparator = Comparator::gt;
  double threshold = 0;
  std::string pager;

  bool operator==(const AlertRule&) const = default;
};

struct AlertFiring {
  std::string rule;
  std::string series_key;
  Timestamp at = 0;
  std::int64_t value = 0;
  std::string pager;

  bool operator==(const AlertFiring&) const = default;
};

struct CollectorConfig {
  Duration poll_interval = 60;
  std::int64_t cooldown_polls = 5;

  bool operator==(const CollectorConfig&) const = default;
};

// Polls the derived views at a fixed interval, appends one point per metric
// per dimension combination, and evaluates threshold alerts with cooldown
// suppression. Given the same virtual-clock trace, two runs produce
// identical series.
class Collector {
 public:
  // Idempotent within a tick: polling twice at the same instant is a no-op.
  Result<int> poll(const sim::CloudSim& sim, const slots::SlotPool& pool,
                   const ingest::LoadService& load, Timestamp now);

  std::vector<AlertFiring> evaluate_alerts(Timestamp now);

  std::optional<Timestamp> next_poll_due() const;

  const std::map<std::string, MetricSeries>& series() const { return series_; }
  const MetricSeries* find_series(MetricName m,
                                  const std::map<std::string, std::string>& dims) const;
  const std::vector<AlertFiring>& firings() const { return firings_; }
  Timestamp last_poll() const { return last_poll_; }

  CollectorConfig config;
  std::vector<AlertRule> rules;

  nlohmann::ordered_json to_json() const;
  static Result<Collector> from_json(const nlohmann::ordered_json& j);

 private:
  void append(MetricName m, std::map<std::string, std::string> dims, Timestamp ts,
              std::int64_t value);

  std::map<std::string, MetricSeries> series_;
  Timestamp last_poll_ = -1;
  std::map<std::string, Timestamp> last_fired_;  // rule|series_key -> ts
  std::vector<AlertFiring> firings_;
};

std::string series_key(MetricName m, const std::map<std::string, std::string>& dims);

}  // namespace bigbird::obs
