#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/common.hpp"
#include "json.hpp"

namespace bigbird::slots {

inline constexpr std::string_view kDefaultReservation = "default";

enum class JobKind { query, analytics, load };
enum class JobState { queued, running, succeeded, failed };

std::string_view job_kind_name(JobKind k);
std::optional<JobKind> parse_job_kind(std::string_view s);
std::string_view job_state_name(JobState s);
std::optional<JobState> parse_job_state(std::string_view s);

struct SlotRequest {
  std::string job_id;
  std::string project;
  std::int64_t slots_needed = 0;
  JobKind kind = JobKind::query;
  Duration duration = 0;  // 0: runs until completed explicitly

  bool operator==(const SlotRequest&) const = default;
};

struct SlotJob {
  SlotRequest request;
  JobState state = JobState::queued;
  Timestamp submitted_at = 0;
  Timestamp started_at = 0;
  Timestamp finished_at = 0;
  std::string reservation;

  bool operator==(const SlotJob&) const = default;
};

struct Reservation {
  std::string name;
  std::int64_t capacity = 0;
  std::int64_t allocated = 0;
  std::set<std::string> projects;       // empty set on default: catches all
  std::vector<std::string> queue;       // FIFO job ids

  std::int64_t free() const { return capacity - allocated; }
  bool operator==(const Reservation&) const = default;
};

enum class Placement { allocated, queued };

struct PoolStatus {
  std::int64_t total = 0;
  std::int64_t default_capacity = 0;
  std::int64_t default_free = 0;
  std::int64_t queued_jobs = 0;
  std::int64_t running_jobs = 0;
  std::vector<Reservation> reservations;  // default first, then dedicated
};

// One logical slot ledger: the default reservation plus dedicated
// reservations carved out of it. Conservation invariant: default capacity
// plus the sum of dedicated capacities always equals the purchased total.
class SlotPool {
 public:
  Status init(std::int64_t total, const OpContext& ctx);
  Status carve(std::string_view name, std::int64_t slot_count, std::string_view project,
               const OpContext& ctx);
  Status release(std::string_view name, const OpContext& ctx);
  Status purchase(std::int64_t extra, const OpContext& ctx);

  // Allocates immediately when the reservation has room and no earlier job
  // is waiting; otherwise queues FIFO. Jobs larger than the whole
  // reservation fail fast.
  Result<Placement> schedule(const SlotRequest& request, const OpContext& ctx);

  Status complete(std::string_view job_id, bool failed, const OpContext& ctx);

  // Virtual-clock hooks: finish running jobs whose duration has elapsed and
  // start queued work that now fits.
  std::optional<Timestamp> next_finish_due() const;
  Status finish_due_jobs(const OpContext& ctx);

  std::int64_t total_purchased() const { return total_; }
  std::int64_t default_capacity() const { return default_.capacity; }
  const Reservation& default_reservation() const { return default_; }
  const std::map<std::string, Reservation>& dedicated() const { return dedicated_; }
  const std::map<std::string, SlotJob>& jobs() const { return jobs_; }
  const SlotJob* find_job(std::string_view job_id) const;

  std::string reservation_of(std::string_view project) const;
  std::int64_t reservation_capacity(std::string_view reservation) const;
  PoolStatus status() const;
  bool conservation_holds() const;

  nlohmann::ordered_json to_json() const;
  static Result<SlotPool> from_json(const nlohmann::ordered_json& j);

 private:
  Reservation* reservation_ptr(std::string_view name);
  const Reservation* reservation_ptr(std::string_view name) const;
  Status pump(Reservation& r, const OpContext& ctx);

  std::int64_t total_ = 0;
  Reservation default_{std::string(kDefaultReservation), 0, 0, {}, {}};
  std::map<std::string, Reservation> dedicated_;
  std::map<std::string, std::string> project_assignment_;  // project -> reservation
  std::map<std::string, SlotJob> jobs_;
};

}  // namespace bigbird::slots
