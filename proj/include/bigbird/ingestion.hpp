#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/cloudsim.hpp"
#include "bigbird/common.hpp"
#include "bigbird/paths.hpp"
#include "bigbird/slots.hpp"
#include "json.hpp"

namespace bigbird::ingest {

enum class Tool { blaster, bid, dataflow };
enum class Format { parquet, lzo, csv, tsv };

std::string_view tool_name(Tool t);
std::optional<Tool> parse_tool(std::string_view s);
std::string_view format_name(Format f);
std::optional<Format> parse_format(std::string_view s);

struct ToolCapability {
  Tool tool = Tool::blaster;
  std::set<Format> formats;
  bool idempotent = false;
  bool requires_slots = false;
  bool backfill = false;
  bool partitioned = false;
};

const std::array<ToolCapability, 3>& capability_table();
const ToolCapability& capability(Tool t);

struct BackfillRange {
  Timestamp from = 0;
  Timestamp to = 0;

  bool operator==(const BackfillRange&) const = default;
};

struct TransferJob {
  std::string job_id;
  Tool tool = Tool::blaster;
  paths::PhysicalBucketPath source;
  std::string dest_project;
  std::string dest_dataset;
  std::string dest_table;
  Format format = Format::parquet;
  bool partitioned_dest = false;
  std::optional<BackfillRange> backfill;
  std::string dedupe_key;  // empty for non-idempotent tools
  slots::JobState state = slots::JobState::queued;
  Timestamp submitted_at = 0;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
  std::int64_t slots_used = 0;
  Duration duration = 0;

  bool operator==(const TransferJob&) const = default;
};

// Per-dataset pipeline position, keyed by logical path. Supplied
// externally for the on-prem stages; the warehouse stage is updated by the
// load service on job success.
struct DatasetStatus {
  std::string logical_path;
  bool exists_hdfs = false;
  bool exists_gcs = false;
  bool exists_bq = false;
  std::optional<Timestamp> last_changed_hdfs;
  std::optional<Timestamp> last_changed_gcs;
  std::optional<Timestamp> last_changed_bq;

  bool operator==(const DatasetStatus&) const = default;
};

enum class Stage { hdfs_to_gcs, gcs_to_bq };
std::string_view stage_name(Stage s);

struct WatchdogFinding {
  std::string logical_path;
  Stage stage = Stage::hdfs_to_gcs;
  Duration stalled_for = 0;

  bool operator==(const WatchdogFinding&) const = default;
};

struct WatchdogThresholds {
  Duration hdfs_to_gcs = 6 * 3600;
  Duration gcs_to_bq = 6 * 3600;

  bool operator==(const WatchdogThresholds&) const = default;
};

// A dataset is stuck in a stage when it exists upstream of the stage, is
// absent downstream, and its upstream copy has not changed for longer than
// the stage threshold.
std::vector<WatchdogFinding> watchdog_scan(const std::vector<DatasetStatus>& statuses,
                                           Timestamp now, const WatchdogThresholds& thresholds);

class StatusStore {
 public:
  Status load_ndjson_line(const std::string& line);
  Status load_ndjson_file(const std::string& path);
  void upsert(DatasetStatus status);
  void mark_bq(std::string_view logical_path, Timestamp now);
  const DatasetStatus* find(std::string_view logical_path) const;
  std::vector<DatasetStatus> all() const;

  nlohmann::ordered_json to_json() const;
  static Result<StatusStore> from_json(const nlohmann::ordered_json& j);

 private:
  std::map<std::string, DatasetStatus> by_path_;
};

struct LoadConfig {
  std::string load_project = "twitter-gcs-to-bq-project";
  Duration default_job_duration = 300;
  std::int64_t default_job_slots = 40;
  std::string domain_suffix = std::string(paths::kDefaultDomainSuffix);

  bool operator==(const LoadConfig&) const = default;
};

struct SubmitOptions {
  bool partitioned_dest = false;
  std::optional<BackfillRange> backfill;
  std::optional<Duration> duration;
  std::optional<std::int64_t> slots_used;
  std::string submitter;  // defaults to ctx.principal
};

struct Transition {
  std::string job_id;
  slots::JobState to = slots::JobState::running;
  Timestamp at = 0;
};

// Routes transfer jobs through the dedicated data-load project: validates
// against the capability matrix, dedupes idempotent tools on
// (tool, source, destination), charges the per-day load-job quota, and
// gates starts on the reservation-derived concurrency cap. A dedupe key
// stays bound to its job until that job fails, so no two non-failed jobs
// ever share one; only a failure frees the key for a retry.
class LoadService {
 public:
  Result<std::string> submit(Tool tool, const paths::PhysicalBucketPath& source,
                             std::string_view dest_project, std::string_view dest_dataset,
                             std::string_view dest_table, Format format,
                             const SubmitOptions& options, sim::CloudSim& sim,
                             const sim::GroupResolver* groups, const OpContext& ctx);

  // Simulated downstream failure: running -> failed, dedupe key released.
  Status fail_job(std::string_view job_id, const OpContext& ctx);

  // Finishes running jobs whose duration elapsed, then starts queued jobs
  // FIFO up to the concurrency cap.
  Result<std::vector<Transition>> tick(const slots::SlotPool& pool, const sim::QuotaTable& quota,
                                       StatusStore& statuses, const OpContext& ctx);

  std::optional<Timestamp> next_finish_due() const;
  bool has_startable_queue(const slots::SlotPool& pool, const sim::QuotaTable& quota) const;

  // 50 concurrent jobs per 2000 reserved slots, floor-scaled, minimum 0.
  std::int64_t concurrency_cap(const slots::SlotPool& pool, const sim::QuotaTable& quota) const;

  std::int64_t running_count() const;
  const std::map<std::string, TransferJob>& jobs() const { return jobs_; }
  const std::vector<std::string>& queue() const { return queue_; }
  const TransferJob* find(std::string_view job_id) const;

  LoadConfig config;

  nlohmann::ordered_json to_json() const;
  static Result<LoadService> from_json(const nlohmann::ordered_json& j);

 private:
  std::map<std::string, TransferJob> jobs_;
  std::vector<std::string> queue_;                // FIFO queued job ids
  std::map<std::string, std::string> dedupe_;     // dedupe_key -> non-failed job
  std::uint64_t job_counter_ = 0;
};

}  // namespace bigbird::ingest
