#include "bigbird/ingestion.hpp"

#include <algorithm>
#include <fstream>

namespace bigbird::ingest {

using ordered_json = nlohmann::ordered_json;

std::string_view tool_name(Tool t) {
  switch (t) {
    case Tool::blaster: return "blaster";
    case Tool::bid: return "bid";
    case Tool::dataflow: return "dataflow";
  }
  return "unknown";
}

std::optional<Tool> parse_tool(std::string_view s) {
  if (s == "blaster") return Tool::blaster;
  if (s == "bid") return Tool::bid;
  if (s == "dataflow") return Tool::dataflow;
  return std::nullopt;
}

std::string_view format_name(Format f) {
  switch (f) {
    case Format::parquet: return "parquet";
    case Format::lzo: return "lzo";
    case Format::csv: return "csv";
    case Format::tsv: return "tsv";
  }
  return "unknown";
}

std::optional<Format> parse_format(std::string_view s) {
  if (s == "parquet") return Format::parquet;
  if (s == "lzo") return Format::lzo;
  if (s == "csv") return Format::csv;
  if (s == "tsv") return Format::tsv;
  return std::nullopt;
}

const std::array<ToolCapability, 3>& capability_table() {
  static const std::array<ToolCapability, 3> table = {{
      {Tool::blaster, {Format::parquet, Format::lzo}, true, true, true, true},
      {Tool::bid, {Format::parquet, Format::csv, Format::tsv}, true, true, true, true},
      {Tool::dataflow, {Format::lzo}, false, true, true, false},
  }};
  return table;
}

const ToolCapability& capability(Tool t) {
  for (const ToolCapability& c : capability_table()) {
    if (c.tool == t) return c;
  }
  return capability_table()[0];
}

std::string_view stage_name(Stage s) {
  return s == Stage::hdfs_to_gcs ? "hdfs->gcs" : "gcs->bq";
}

std::vector<WatchdogFinding> watchdog_scan(const std::vector<DatasetStatus>& statuses,
                                           Timestamp now, const WatchdogThresholds& thresholds) {
  std::vector<WatchdogFinding> findings;
  for (const DatasetStatus& s : statuses) {
    if (s.exists_hdfs && !s.exists_gcs && s.last_changed_hdfs &&
        now - *s.last_changed_hdfs > thresholds.hdfs_to_gcs) {
      findings.push_back({s.logical_path, Stage::hdfs_to_gcs, now - *s.last_changed_hdfs});
      continue;
    }
    if (s.exists_gcs && !s.exists_bq && s.last_changed_gcs &&
        now - *s.last_changed_gcs > thresholds.gcs_to_bq) {
      findings.push_back({s.logical_path, Stage::gcs_to_bq, now - *s.last_changed_gcs});
    }
  }
  return findings;
}

namespace {

Status status_invariants(const DatasetStatus& s) {
  const auto check = [&](bool exists, const std::optional<Timestamp>& ts, const char* stage) {
    return exists == ts.has_value()
               ? ok_status()
               : Status(Error{Errc::config_invalid,
                              s.logical_path + ": last_changed_" + stage +
                                  " must be present exactly when the stage exists"});
  };
  if (auto r = check(s.exists_hdfs, s.last_changed_hdfs, "hdfs"); !r) return r;
  if (auto r = check(s.exists_gcs, s.last_changed_gcs, "gcs"); !r) return r;
  return check(s.exists_bq, s.last_changed_bq, "bq");
}

ordered_json status_to_json(const DatasetStatus& s) {
  ordered_json j;
  j["logical_path"] = s.logical_path;
  j["exists_hdfs"] = s.exists_hdfs;
  j["exists_gcs"] = s.exists_gcs;
  j["exists_bq"] = s.exists_bq;
  if (s.last_changed_hdfs) j["last_changed_hdfs"] = *s.last_changed_hdfs;
  if (s.last_changed_gcs) j["last_changed_gcs"] = *s.last_changed_gcs;
  if (s.last_changed_bq) j["last_changed_bq"] = *s.last_changed_bq;
  return j;
}

Result<DatasetStatus> status_from_json(const ordered_json& j) {
  DatasetStatus s;
  try {
    s.logical_path = j.at("logical_path").get<std::string>();
    s.exists_hdfs = j.value("exists_hdfs", false);
    s.exists_gcs = j.value("exists_gcs", false);
    s.exists_bq = j.value("exists_bq", false);
    if (j.contains("last_changed_hdfs")) s.last_changed_hdfs = j["last_changed_hdfs"].get<Timestamp>();
    if (j.contains("last_changed_gcs")) s.last_changed_gcs = j["last_changed_gcs"].get<Timestamp>();
    if (j.contains("last_changed_bq")) s.last_changed_bq = j["last_changed_bq"].get<Timestamp>();
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::config_invalid, std::string("dataset status: ") + ex.what()};
  }
  if (auto r = status_invariants(s); !r) return r.error();
  return s;
}

}  // namespace

Status StatusStore::load_ndjson_line(const std::string& line) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded()) return Error{Errc::config_invalid, "unparsable status record"};
  auto s = status_from_json(j);
  if (!s) return s.error();
  upsert(std::move(s.value()));
  return ok_status();
}

Status StatusStore::load_ndjson_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_error, "cannot open " + path};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (auto r = load_ndjson_line(line); !r) {
      return Error{r.error().code, path + ":" + std::to_string(line_no) + ": " + r.error().message};
    }
  }
  return ok_status();
}

void StatusStore::upsert(DatasetStatus status) {
  by_path_[status.logical_path] = std::move(status);
}

void StatusStore::mark_bq(std::string_view logical_path, Timestamp now) {
  const auto it = by_path_.find(std::string(logical_path));
  if (it == by_path_.end()) {
    DatasetStatus s;
    s.logical_path = std::string(logical_path);
    s.exists_bq = true;
    s.last_changed_bq = now;
    by_path_.emplace(s.logical_path, std::move(s));
    return;
  }
  it->second.exists_bq = true;
  it->second.last_changed_bq = now;
}

const DatasetStatus* StatusStore::find(std::string_view logical_path) const {
  const auto it = by_path_.find(std::string(logical_path));
  return it == by_path_.end() ? nullptr : &it->second;
}

std::vector<DatasetStatus> StatusStore::all() const {
  std::vector<DatasetStatus> out;
  out.reserve(by_path_.size());
  for (const auto& [path, s] : by_path_) out.push_back(s);
  return out;
}

nlohmann::ordered_json StatusStore::to_json() const {
  ordered_json arr = ordered_json::array();
  for (const auto& [path, s] : by_path_) arr.push_back(status_to_json(s));
  return arr;
}

Result<StatusStore> StatusStore::from_json(const nlohmann::ordered_json& j) {
  StatusStore store;
  for (const auto& n : j) {
    auto s = status_from_json(n);
    if (!s) return Error{Errc::corrupt_snapshot, s.error().message};
    store.upsert(std::move(s.value()));
  }
  return store;
}

std::int64_t LoadService::concurrency_cap(const slots::SlotPool& pool,
                                          const sim::QuotaTable& quota) const {
  const std::string reservation = pool.reservation_of(config.load_project);
  const std::int64_t reserved = pool.reservation_capacity(reservation);
  if (quota.slots_per_concurrency_unit <= 0) return 0;
  return quota.concurrent_load_jobs_per_unit * (reserved / quota.slots_per_concurrency_unit);
}

std::int64_t LoadService::running_count() const {
  std::int64_t n = 0;
  for (const auto& [id, job] : jobs_) {
    if (job.state == slots::JobState::running) ++n;
  }
  return n;
}

Result<std::string> LoadService::submit(Tool tool, const paths::PhysicalBucketPath& source,
                                        std::string_view dest_project,
                                        std::string_view dest_dataset,
                                        std::string_view dest_table, Format format,
                                        const SubmitOptions& options, sim::CloudSim& sim,
                                        const sim::GroupResolver* groups, const OpContext& ctx) {
  const ToolCapability& cap = capability(tool);
  const std::string dest = std::string(dest_project) + "." + std::string(dest_dataset) + "." +
                           std::string(dest_table);
  if (!cap.formats.contains(format)) {
    return Error{Errc::unsupported_format, std::string(tool_name(tool)) + " does not support " +
                                               std::string(format_name(format))};
  }
  if (options.partitioned_dest && !cap.partitioned) {
    return Error{Errc::partitioned_unsupported,
                 std::string(tool_name(tool)) + " cannot load partitioned destinations"};
  }
  if (options.backfill && options.backfill->from > options.backfill->to) {
    return Error{Errc::invalid_name, "backfill range is inverted"};
  }
  const std::string dataset_id = sim::dataset_rid(dest_project, dest_dataset);
  if (!sim.exists(dataset_id)) return Error{Errc::unknown_resource, dataset_id};

  const std::string submitter = options.submitter.empty() ? ctx.principal : options.submitter;
  if (!sim.access_allowed(submitter, dataset_id, sim::AccessAction::write, groups)) {
    if (auto r = audit::emit(ctx, audit::Action::job_transition, dataset_id,
                             audit::Outcome::denied,
                             {{"reason", "access_denied"}, {"submitter", submitter}});
        !r) {
      return r.error();
    }
    return Error{Errc::access_denied, submitter + " lacks write on " + dataset_id};
  }

  std::string dedupe_key;
  if (cap.idempotent) {
    dedupe_key = std::string(tool_name(tool)) + "|" + source.str() + "|" + dest;
    const auto it = dedupe_.find(dedupe_key);
    if (it != dedupe_.end()) return it->second;  // same logical transfer, no event
  }

  if (auto r = sim.charge_load_job(config.load_project, ctx.now); !r) {
    if (auto e = audit::emit(ctx, audit::Action::job_transition, "loads/" + dest,
                             audit::Outcome::denied, {{"quota", "load-jobs-per-day"}});
        !e) {
      return e.error();
    }
    return r.error();
  }

  ++job_counter_;
  TransferJob job;
  job.job_id = "load-" + hex64(job_counter_).substr(10);
  job.tool = tool;
  job.source = source;
  job.dest_project = std::string(dest_project);
  job.dest_dataset = std::string(dest_dataset);
  job.dest_table = std::string(dest_table);
  job.format = format;
  job.partitioned_dest = options.partitioned_dest;
  job.backfill = options.backfill;
  job.dedupe_key = dedupe_key;
  job.state = slots::JobState::queued;
  job.submitted_at = ctx.now;
  job.slots_used = options.slots_used.value_or(config.default_job_slots);
  job.duration = options.duration.value_or(config.default_job_duration);

  if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + job.job_id,
                           audit::Outcome::success,
                           {{"state", "queued"},
                            {"tool", std::string(tool_name(tool))},
                            {"dest", dest}});
      !r) {
    return r.error();
  }
  const std::string job_id = job.job_id;
  if (!dedupe_key.empty()) dedupe_[dedupe_key] = job_id;
  queue_.push_back(job_id);
  jobs_.emplace(job_id, std::move(job));
  return job_id;
}

std::optional<Timestamp> LoadService::next_finish_due() const {
  std::optional<Timestamp> due;
  for (const auto& [id, job] : jobs_) {
    if (job.state == slots::JobState::running) {
      const Timestamp t = job.started_at + job.duration;
      if (!due || t < *due) due = t;
    }
  }
  return due;
}

bool LoadService::has_startable_queue(const slots::SlotPool& pool,
                                      const sim::QuotaTable& quota) const {
  return !queue_.empty() && running_count() < concurrency_cap(pool, quota);
}

Result<std::vector<Transition>> LoadService::tick(const slots::SlotPool& pool,
                                                  const sim::QuotaTable& quota,
                                                  StatusStore& statuses, const OpContext& ctx) {
  std::vector<Transition> transitions;

  // Completions first (deterministic by finish time then id), releasing
  // capacity for the queue.
  std::vector<std::pair<Timestamp, std::string>> due;
  for (const auto& [id, job] : jobs_) {
    if (job.state == slots::JobState::running && job.started_at + job.duration <= ctx.now) {
      due.emplace_back(job.started_at + job.duration, id);
    }
  }
  std::sort(due.begin(), due.end());
  for (const auto& [finish, id] : due) {
    TransferJob& job = jobs_.at(id);
    OpContext at = ctx;
    at.now = finish;
    if (auto r = audit::emit(at, audit::Action::job_transition, "jobs/" + id,
                             audit::Outcome::success, {{"state", "succeeded"}});
        !r) {
      return r.error();
    }
    job.state = slots::JobState::succeeded;
    job.finished_at = finish;
    if (auto logical = paths::from_physical(job.source, config.domain_suffix); logical) {
      statuses.mark_bq(logical.value().str(), finish);
    }
    transitions.push_back({id, slots::JobState::succeeded, finish});
  }

  const std::int64_t cap = concurrency_cap(pool, quota);
  while (!queue_.empty() && running_count() < cap) {
    const std::string id = queue_.front();
    TransferJob& job = jobs_.at(id);
    if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + id,
                             audit::Outcome::success, {{"state", "running"}});
        !r) {
      return r.error();
    }
    queue_.erase(queue_.begin());
    job.state = slots::JobState::running;
    job.started_at = ctx.now;
    transitions.push_back({id, slots::JobState::running, ctx.now});
  }
  return transitions;
}

Status LoadService::fail_job(std::string_view job_id, const OpContext& ctx) {
  const auto it = jobs_.find(std::string(job_id));
  if (it == jobs_.end()) return Error{Errc::unknown_job, std::string(job_id)};
  TransferJob& job = it->second;
  if (job.state != slots::JobState::running) {
    return Error{Errc::unknown_job, std::string(job_id) + " is not running"};
  }
  if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + job.job_id,
                           audit::Outcome::failed, {{"state", "failed"}});
      !r) {
    return r.error();
  }
  job.state = slots::JobState::failed;
  job.finished_at = ctx.now;
  if (!job.dedupe_key.empty()) dedupe_.erase(job.dedupe_key);
  return ok_status();
}

const TransferJob* LoadService::find(std::string_view job_id) const {
  const auto it = jobs_.find(std::string(job_id));
  return it == jobs_.end() ? nullptr : &it->second;
}

nlohmann::ordered_json LoadService::to_json() const {
  ordered_json j;
  ordered_json jobs = ordered_json::array();
  for (const auto& [id, job] : jobs_) {
    ordered_json n;
    n["job_id"] = job.job_id;
    n["tool"] = tool_name(job.tool);
    n["source"] = job.source.str();
    n["dest_project"] = job.dest_project;
    n["dest_dataset"] = job.dest_dataset;
    n["dest_table"] = job.dest_table;
    n["format"] = format_name(job.format);
    n["partitioned_dest"] = job.partitioned_dest;
    if (job.backfill) n["backfill"] = {{"from", job.backfill->from}, {"to", job.backfill->to}};
    n["dedupe_key"] = job.dedupe_key;
    n["state"] = slots::job_state_name(job.state);
    n["submitted_at"] = job.submitted_at;
    n["started_at"] = job.started_at;
    n["finished_at"] = job.finished_at;
    n["slots_used"] = job.slots_used;
    n["duration"] = job.duration;
    jobs.push_back(std::move(n));
  }
  j["jobs"] = std::move(jobs);
  j["queue"] = queue_;
  j["dedupe"] = dedupe_;
  j["job_counter"] = job_counter_;
  return j;
}

Result<LoadService> LoadService::from_json(const nlohmann::ordered_json& j) {
  LoadService ls;
  try {
    for (const auto& n : j.at("jobs")) {
      TransferJob job;
      job.job_id = n.at("job_id").get<std::string>();
      const auto tool = parse_tool(n.at("tool").get<std::string>());
      const auto format = parse_format(n.at("format").get<std::string>());
      const auto state = slots::parse_job_state(n.at("state").get<std::string>());
      if (!tool || !format || !state) return Error{Errc::corrupt_snapshot, "bad transfer job"};
      job.tool = *tool;
      auto src = paths::parse_gs_uri(n.at("source").get<std::string>());
      if (!src) return Error{Errc::corrupt_snapshot, "bad transfer source"};
      job.source = std::move(src.value());
      job.dest_project = n.at("dest_project").get<std::string>();
      job.dest_dataset = n.at("dest_dataset").get<std::string>();
      job.dest_table = n.at("dest_table").get<std::string>();
      job.format = *format;
      job.partitioned_dest = n.at("partitioned_dest").get<bool>();
      if (n.contains("backfill")) {
        job.backfill = BackfillRange{n["backfill"].at("from").get<Timestamp>(),
                                     n["backfill"].at("to").get<Timestamp>()};
      }
      job.dedupe_key = n.at("dedupe_key").get<std::string>();
      job.state = *state;
      job.submitted_at = n.at("submitted_at").get<Timestamp>();
      job.started_at = n.at("started_at").get<Timestamp>();
      job.finished_at = n.at("finished_at").get<Timestamp>();
      job.slots_used = n.at("slots_used").get<std::int64_t>();
      job.duration = n.at("duration").get<Duration>();
      ls.jobs_.emplace(job.job_id, std::move(job));
    }
    ls.queue_ = j.at("queue").get<std::vector<std::string>>();
    ls.dedupe_ = j.at("dedupe").get<std::map<std::string, std::string>>();
    ls.job_counter_ = j.at("job_counter").get<std::uint64_t>();
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("load state: ") + ex.what()};
  }
  return ls;
}

}  // namespace bigbird::ingest
