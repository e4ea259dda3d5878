#include "bigbird/observability.hpp"

#include <algorithm>

namespace bigbird::obs {

using ordered_json = nlohmann::ordered_json;

std::string_view metric_name(MetricName m) {
  switch (m) {
    case MetricName::current_total_jobs: return "current_total_jobs";
    case MetricName::execution_time_per_job_per_project:
      return "execution_time_per_job_per_project";
    case MetricName::failed_jobs_per_project: return "failed_jobs_per_project";
    case MetricName::slots_allocated: return "slots_allocated";
    case MetricName::slots_used: return "slots_used";
    case MetricName::jobs_waiting_for_slots: return "jobs_waiting_for_slots";
    case MetricName::degradation_warnings: return "degradation_warnings";
  }
  return "unknown";
}

std::optional<MetricName> parse_metric(std::string_view s) {
  for (MetricName m :
       {MetricName::current_total_jobs, MetricName::execution_time_per_job_per_project,
        MetricName::failed_jobs_per_project, MetricName::slots_allocated, MetricName::slots_used,
        MetricName::jobs_waiting_for_slots, MetricName::degradation_warnings}) {
    if (metric_name(m) == s) return m;
  }
  return std::nullopt;
}

std::string_view comparator_name(Comparator c) {
  switch (c) {
    case Comparator::gt: return ">";
    case Comparator::ge: return ">=";
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
  }
  return "?";
}

std::optional<Comparator> parse_comparator(std::string_view s) {
  if (s == ">") return Comparator::gt;
  if (s == ">=") return Comparator::ge;
  if (s == "<") return Comparator::lt;
  if (s == "<=") return Comparator::le;
  return std::nullopt;
}

namespace {

bool matches(const JobStatsRow& row, const InfoSchemaFilter& f) {
  if (f.project && row.project != *f.project) return false;
  if (f.type && row.job_type != *f.type) return false;
  if (f.state && row.state != *f.state) return false;
  if (f.submitted_from && row.submitted_at < *f.submitted_from) return false;
  if (f.submitted_to && row.submitted_at > *f.submitted_to) return false;
  return true;
}

JobStatsRow row_from_slot_job(const slots::SlotJob& job) {
  JobStatsRow row;
  row.project = job.request.project;
  row.job_id = job.request.job_id;
  row.job_type = job.request.kind;
  row.state = job.state;
  row.submitted_at = job.submitted_at;
  row.started_at = job.started_at;
  row.finished_at = job.finished_at;
  row.reservation_name = job.reservation;
  row.slots_consumed = job.request.slots_needed;
  if (job.state == slots::JobState::succeeded || job.state == slots::JobState::failed) {
    row.execution_time = job.finished_at - job.started_at;
  }
  return row;
}

JobStatsRow row_from_transfer_job(const ingest::TransferJob& job, std::string_view load_project,
                                  std::string_view reservation) {
  JobStatsRow row;
  row.project = std::string(load_project);
  row.job_id = job.job_id;
  row.job_type = slots::JobKind::load;
  row.state = job.state;
  row.submitted_at = job.submitted_at;
  row.started_at = job.started_at;
  row.finished_at = job.finished_at;
  row.reservation_name = std::string(reservation);
  row.slots_consumed = job.slots_used;
  if (job.state == slots::JobState::succeeded || job.state == slots::JobState::failed) {
    row.execution_time = job.finished_at - job.started_at;
  }
  return row;
}

}  // namespace

Result<std::vector<JobStatsRow>> info_schema_query(const sim::CloudSim& sim,
                                                   const slots::SlotPool& pool,
                                                   const ingest::LoadService& load,
                                                   std::string_view scope,
                                                   const InfoSchemaFilter& filter) {
  const sim::ResourceNode* node = sim.find(scope);
  if (node == nullptr || (node->kind != sim::ResourceKind::organization &&
                          node->kind != sim::ResourceKind::project)) {
    return Error{Errc::unknown_scope, std::string(scope)};
  }
  const bool org_scope = node->kind == sim::ResourceKind::organization;
  const std::string project_scope =
      org_scope ? "" : std::string(scope).substr(std::string("projects/").size());

  std::vector<JobStatsRow> rows;
  for (const auto& [id, job] : pool.jobs()) {
    if (!org_scope && job.request.project != project_scope) continue;
    JobStatsRow row = row_from_slot_job(job);
    if (matches(row, filter)) rows.push_back(std::move(row));
  }
  const std::string load_reservation = pool.reservation_of(load.config.load_project);
  for (const auto& [id, job] : load.jobs()) {
    if (!org_scope && load.config.load_project != project_scope) continue;
    JobStatsRow row = row_from_transfer_job(job, load.config.load_project, load_reservation);
    if (matches(row, filter)) rows.push_back(std::move(row));
  }
  return rows;
}

std::string series_key(MetricName m, const std::map<std::string, std::string>& dims) {
  std::string key(metric_name(m));
  for (const auto& [k, v] : dims) {
    key += "|";
    key += k;
    key += "=";
    key += v;
  }
  return key;
}

void Collector::append(MetricName m, std::map<std::string, std::string> dims, Timestamp ts,
                       std::int64_t value) {
  const std::string key = series_key(m, dims);
  MetricSeries& series = series_[key];
  if (series.points.empty()) {
    series.name = m;
    series.dimensions = std::move(dims);
  }
  series.points.push_back({ts, value});
}

Result<int> Collector::poll(const sim::CloudSim& sim, const slots::SlotPool& pool,
                            const ingest::LoadService& load, Timestamp now) {
  if (now == last_poll_) return 0;  // idempotent within a tick

  auto rows_r = info_schema_query(sim, pool, load, sim::kOrganizationId, {});
  if (!rows_r) return rows_r.error();
  const std::vector<JobStatsRow>& rows = rows_r.value();

  int appended = 0;
  const auto put = [&](MetricName m, std::map<std::string, std::string> dims,
                       std::int64_t value) {
    append(m, std::move(dims), now, value);
    ++appended;
  };

  std::int64_t live = 0;
  std::map<std::string, std::int64_t> exec_time;
  std::map<std::string, std::int64_t> failed;
  for (const JobStatsRow& row : rows) {
    if (row.state == slots::JobState::queued || row.state == slots::JobState::running) ++live;
    exec_time.try_emplace(row.project, 0);
    failed.try_emplace(row.project, 0);
    if (row.execution_time) exec_time[row.project] += *row.execution_time;
    if (row.state == slots::JobState::failed) ++failed[row.project];
  }
  put(MetricName::current_total_jobs, {}, live);
  for (const auto& [project, total] : exec_time) {
    put(MetricName::execution_time_per_job_per_project, {{"project", project}}, total);
  }
  for (const auto& [project, count] : failed) {
    put(MetricName::failed_jobs_per_project, {{"project", project}}, count);
  }

  const slots::PoolStatus status = pool.status();
  for (const slots::Reservation& res : status.reservations) {
    put(MetricName::slots_allocated, {{"reservation", res.name}}, res.capacity);
    put(MetricName::slots_used, {{"reservation", res.name}}, res.allocated);
    put(MetricName::jobs_waiting_for_slots, {{"reservation", res.name}},
        static_cast<std::int64_t>(res.queue.size()));
  }
  put(MetricName::degradation_warnings, {}, static_cast<std::int64_t>(sim.warnings().size()));

  last_poll_ = now;
  return appended;
}

std::vector<AlertFiring> Collector::evaluate_alerts(Timestamp now) {
  std::vector<AlertFiring> fired;
  for (const AlertRule& rule : rules) {
    for (const auto& [key, series] : series_) {
      if (series.name != rule.metric || series.points.empty()) continue;
      bool dims_match = true;
      for (const auto& [k, v] : rule.dim_filter) {
        const auto it = series.dimensions.find(k);
        if (it == series.dimensions.end() || it->second != v) {
          dims_match = false;
          break;
        }
      }
      if (!dims_match) continue;
      const MetricPoint& latest = series.points.back();
      const double v = static_cast<double>(latest.value);
      bool crossed = false;
      switch (rule.comparator) {
        case Comparator::gt: crossed = v > rule.threshold; break;
        case Comparator::ge: crossed = v >= rule.threshold; break;
        case Comparator::lt: crossed = v < rule.threshold; break;
        case Comparator::le: crossed = v <= rule.threshold; break;
      }
      if (!crossed) continue;
      const std::string fired_key = rule.name + "|" + key;
      const auto last = last_fired_.find(fired_key);
      const Duration cooldown = config.cooldown_polls * config.poll_interval;
      if (last != last_fired_.end() && now - last->second < cooldown) continue;
      last_fired_[fired_key] = now;
      AlertFiring firing{rule.name, key, now, latest.value, rule.pager};
      firings_.push_back(firing);
      fired.push_back(std::move(firing));
    }
  }
  return fired;
}

std::optional<Timestamp> Collector::next_poll_due() const {
  if (config.poll_interval <= 0) return std::nullopt;
  if (last_poll_ < 0) return config.poll_interval;
  // Polls land on multiples of the interval.
  return (last_poll_ / config.poll_interval + 1) * config.poll_interval;
}

const MetricSeries* Collector::find_series(MetricName m,
                                           const std::map<std::string, std::string>& dims) const {
  const auto it = series_.find(series_key(m, dims));
  return it == series_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json Collector::to_json() const {
  ordered_json j;
  ordered_json series = ordered_json::array();
  for (const auto& [key, s] : series_) {
    ordered_json points = ordered_json::array();
    for (const MetricPoint& p : s.points) points.push_back({p.ts, p.value});
    series.push_back({{"metric", std::string(metric_name(s.name))},
                      {"dimensions", s.dimensions},
                      {"points", std::move(points)}});
  }
  j["series"] = std::move(series);
  j["last_poll"] = last_poll_;
  j["last_fired"] = last_fired_;
  ordered_json firings = ordered_json::array();
  for (const AlertFiring& f : firings_) {
    firings.push_back({{"rule", f.rule},
                       {"series", f.series_key},
                       {"at", f.at},
                       {"value", f.value},
                       {"pager", f.pager}});
  }
  j["firings"] = std::move(firings);
  return j;
}

Result<Collector> Collector::from_json(const nlohmann::ordered_json& j) {
  Collector c;
  try {
    for (const auto& n : j.at("series")) {
      MetricSeries s;
      const auto m = parse_metric(n.at("metric").get<std::string>());
      if (!m) return Error{Errc::corrupt_snapshot, "bad metric name"};
      s.name = *m;
      s.dimensions = n.at("dimensions").get<std::map<std::string, std::string>>();
      for (const auto& p : n.at("points")) {
        s.points.push_back({p.at(0).get<Timestamp>(), p.at(1).get<std::int64_t>()});
      }
      c.series_.emplace(series_key(s.name, s.dimensions), std::move(s));
    }
    c.last_poll_ = j.at("last_poll").get<Timestamp>();
    c.last_fired_ = j.at("last_fired").get<std::map<std::string, Timestamp>>();
    for (const auto& f : j.at("firings")) {
      c.firings_.push_back({f.at("rule").get<std::string>(), f.at("series").get<std::string>(),
                            f.at("at").get<Timestamp>(), f.at("value").get<std::int64_t>(),
                            f.at("pager").get<std::string>()});
    }
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("collector state: ") + ex.what()};
  }
  return c;
}

}  // namespace bigbird::obs
