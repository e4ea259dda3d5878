#include "bigbird/system.hpp"

#include <fstream>
#include <sstream>

namespace bigbird {

using ordered_json = nlohmann::ordered_json;

System::System(Config config, audit::Sink* sink) : config_(std::move(config)), sink_(sink) {
  apply_config();
}

void System::apply_config() {
  state_.cloud.quota = config_.quota;
  state_.cloud.audit_denied = config_.audit_denied;
  state_.ids.config = config_.identity;
  state_.load.config.load_project = config_.naming.load_project;
  state_.load.config.default_job_duration = config_.load_job_duration;
  state_.load.config.default_job_slots = config_.load_job_slots;
  state_.load.config.domain_suffix = config_.naming.domain_suffix;
  state_.collector.config = config_.collector;
  state_.collector.rules = config_.alerts;
}

OpContext System::ctx(std::string principal) const {
  return OpContext{state_.now, sink_, std::move(principal)};
}

Status System::step_at(Timestamp t) {
  OpContext c{t, sink_, "system"};
  if (auto r = state_.ids.run_due_rotations(c); !r) return r;
  if (auto r = state_.pool.finish_due_jobs(c); !r) return r;
  if (auto r = state_.load.tick(state_.pool, state_.cloud.quota, state_.statuses, c); !r) {
    return r.error();
  }
  const auto poll_due = state_.collector.next_poll_due();
  if (poll_due && *poll_due <= t) {
    if (auto r = state_.collector.poll(state_.cloud, state_.pool, state_.load, t); !r) {
      return r.error();
    }
    state_.collector.evaluate_alerts(t);
  }
  return ok_status();
}

Status System::advance_clock(Duration delta) {
  if (delta < 0) return Error{Errc::invalid_name, "clock cannot move backwards"};
  const Timestamp target = state_.now + delta;
  while (true) {
    std::optional<Timestamp> next;
    const auto consider = [&](const std::optional<Timestamp>& t) {
      if (t && *t > state_.now && (!next || *t < *next)) next = *t;
    };
    consider(state_.ids.next_rotation_due());
    consider(state_.pool.next_finish_due());
    consider(state_.load.next_finish_due());
    consider(state_.collector.next_poll_due());
    if (!next || *next > target) break;
    state_.now = *next;
    if (auto r = step_at(state_.now); !r) return r;
  }
  state_.now = target;
  return ok_status();
}

Result<std::string> System::load_submit(ingest::Tool tool,
                                        const paths::PhysicalBucketPath& source,
                                        std::string_view dest_project,
                                        std::string_view dest_dataset,
                                        std::string_view dest_table, ingest::Format format,
                                        const ingest::SubmitOptions& options,
                                        const std::string& principal) {
  auto job = state_.load.submit(tool, source, dest_project, dest_dataset, dest_table, format,
                                options, state_.cloud, &state_.ids, ctx(principal));
  if (!job) return job;
  if (auto t = load_tick(); !t) return t.error();
  return job;
}

Result<std::vector<ingest::Transition>> System::load_tick() {
  return state_.load.tick(state_.pool, state_.cloud.quota, state_.statuses, ctx());
}

provision::ReconcileReport System::reconcile(const std::vector<provision::TenantSpec>& specs,
                                             bool dry_run) {
  provision::Provisioner prov(config_.naming);
  if (dry_run) {
    // Work on a throwaway copy with audit suppressed; report the diff only.
    SystemState scratch = state_;
    scratch.ids.vault = nullptr;
    OpContext quiet{state_.now, nullptr, "provisioner"};
    return prov.reconcile(specs, scratch.cloud, scratch.ids, quiet);
  }
  return prov.reconcile(specs, state_.cloud, state_.ids, ctx("provisioner"));
}

bool System::precondition(const provision::TenantSpec& tenant) {
  provision::Provisioner prov(config_.naming);
  return prov.precondition(tenant, state_.cloud, state_.ids, ctx("provisioner"));
}

std::vector<ingest::WatchdogFinding> System::watchdog_scan(
    const std::optional<ingest::WatchdogThresholds>& thresholds) const {
  return ingest::watchdog_scan(state_.statuses.all(), state_.now,
                               thresholds.value_or(config_.watchdog));
}

std::string System::snapshot_string() const {
  ordered_json j;
  j["schema_version"] = kSnapshotSchemaVersion;
  j["clock"] = state_.now;
  j["cloud"] = state_.cloud.to_json();
  j["identity"] = state_.ids.to_json();
  j["slots"] = state_.pool.to_json();
  j["load"] = state_.load.to_json();
  j["statuses"] = state_.statuses.to_json();
  j["collector"] = state_.collector.to_json();
  return j.dump(2) + "\n";
}

Status System::save_state(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return Error{Errc::io_error, "cannot write " + path};
  out << snapshot_string();
  out.flush();
  if (!out) return Error{Errc::io_error, "short write to " + path};
  return ok_status();
}

Result<SystemState> System::state_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("schema_version") ||
      !j["schema_version"].is_number_integer()) {
    return Error{Errc::corrupt_snapshot, "missing schema_version"};
  }
  if (j["schema_version"].get<int>() != kSnapshotSchemaVersion) {
    return Error{Errc::version_mismatch,
                 "snapshot schema " + j["schema_version"].dump() + ", expected " +
                     std::to_string(kSnapshotSchemaVersion)};
  }
  SystemState s;
  try {
    s.now = j.at("clock").get<Timestamp>();
    auto cloud = sim::CloudSim::from_json(j.at("cloud"));
    if (!cloud) return cloud.error();
    s.cloud = std::move(cloud.value());
    auto ids = identity::IdentityStore::from_json(j.at("identity"));
    if (!ids) return ids.error();
    s.ids = std::move(ids.value());
    auto pool = slots::SlotPool::from_json(j.at("slots"));
    if (!pool) return pool.error();
    s.pool = std::move(pool.value());
    auto load = ingest::LoadService::from_json(j.at("load"));
    if (!load) return load.error();
    s.load = std::move(load.value());
    auto statuses = ingest::StatusStore::from_json(j.at("statuses"));
    if (!statuses) return statuses.error();
    s.statuses = std::move(statuses.value());
    auto collector = obs::Collector::from_json(j.at("collector"));
    if (!collector) return collector.error();
    s.collector = std::move(collector.value());
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("snapshot: ") + ex.what()};
  }
  return s;
}

Status System::load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_error, "cannot read " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ordered_json j = ordered_json::parse(buffer.str(), nullptr, false);
  if (j.is_discarded()) return Error{Errc::corrupt_snapshot, path + ": unparsable snapshot"};
  auto s = state_from_json(j);
  if (!s) return s.error();
  state_ = std::move(s.value());
  apply_config();
  return ok_status();
}

}  // namespace bigbird
