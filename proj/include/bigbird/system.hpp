#pragma once

#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/cloudsim.hpp"
#include "bigbird/common.hpp"
#include "bigbird/config.hpp"
#include "bigbird/identity.hpp"
#include "bigbird/ingestion.hpp"
#include "bigbird/observability.hpp"
#include "bigbird/provisioner.hpp"
#include "bigbird/slots.hpp"
#include "json.hpp"

namespace bigbird {

inline constexpr int kSnapshotSchemaVersion = 1;

// The full dynamic state of the control plane. Value-semantic: copies are
// independent, which is what dry runs rely on. Configuration is not part of
// the state; it is re-applied after restore.
struct SystemState {
  Timestamp now = 0;
  sim::CloudSim cloud;
  identity::IdentityStore ids;
  slots::SlotPool pool;
  ingest::LoadService load;
  ingest::StatusStore statuses;
  obs::Collector collector;
};

// Single-binary control plane: owns the state, the virtual clock, and the
// audit sink wiring. CLI commands and tests drive everything through here.
class System {
 public:
  explicit System(Config config, audit::Sink* sink = nullptr);

  OpContext ctx(std::string principal = "system") const;
  SystemState& state() { return state_; }
  const SystemState& state() const { return state_; }
  const Config& config() const { return config_; }
  audit::Sink* sink() const { return sink_; }

  // Moves the virtual clock forward, executing due work at each event
  // instant in canonical order: window rollover (implicit with fixed
  // windows), key rotations, ingestion tick, collector poll, alerts.
  Status advance_clock(Duration delta);

  // Submit-and-pump: the job starts immediately when the running set is
  // under the concurrency cap.
  Result<std::string> load_submit(ingest::Tool tool, const paths::PhysicalBucketPath& source,
                                  std::string_view dest_project, std::string_view dest_dataset,
                                  std::string_view dest_table, ingest::Format format,
                                  const ingest::SubmitOptions& options,
                                  const std::string& principal);

  Result<std::vector<ingest::Transition>> load_tick();

  provision::ReconcileReport reconcile(const std::vector<provision::TenantSpec>& specs,
                                       bool dry_run);
  bool precondition(const provision::TenantSpec& tenant);

  std::vector<ingest::WatchdogFinding> watchdog_scan(
      const std::optional<ingest::WatchdogThresholds>& thresholds = std::nullopt) const;

  // Deterministic snapshot: same state, same bytes.
  std::string snapshot_string() const;
  Status save_state(const std::string& path) const;
  Status load_state(const std::string& path);
  static Result<SystemState> state_from_json(const nlohmann::ordered_json& j);

 private:
  Status step_at(Timestamp t);
  void apply_config();

  Config config_;
  audit::Sink* sink_ = nullptr;
  SystemState state_;
};

}  // namespace bigbird
