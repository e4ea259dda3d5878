#include "bigbird/slots.hpp"

#include <algorithm>

namespace bigbird::slots {

using ordered_json = nlohmann::ordered_json;

std::string_view job_kind_name(JobKind k) {
  switch (k) {
    case JobKind::query: return "query";
    case JobKind::analytics: return "analytics";
    case JobKind::load: return "load";
  }
  return "unknown";
}

std::optional<JobKind> parse_job_kind(std::string_view s) {
  if (s == "query") return JobKind::query;
  if (s == "analytics") return JobKind::analytics;
  if (s == "load") return JobKind::load;
  return std::nullopt;
}

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::succeeded: return "succeeded";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

std::optional<JobState> parse_job_state(std::string_view s) {
  if (s == "queued") return JobState::queued;
  if (s == "running") return JobState::running;
  if (s == "succeeded") return JobState::succeeded;
  if (s == "failed") return JobState::failed;
  return std::nullopt;
}

Reservation* SlotPool::reservation_ptr(std::string_view name) {
  if (name == kDefaultReservation) return &default_;
  const auto it = dedicated_.find(std::string(name));
  return it == dedicated_.end() ? nullptr : &it->second;
}

const Reservation* SlotPool::reservation_ptr(std::string_view name) const {
  if (name == kDefaultReservation) return &default_;
  const auto it = dedicated_.find(std::string(name));
  return it == dedicated_.end() ? nullptr : &it->second;
}

Status SlotPool::init(std::int64_t total, const OpContext& ctx) {
  if (total < 0) return Error{Errc::invalid_name, "negative slot total"};
  if (!jobs_.empty()) return Error{Errc::reservation_busy, "pool already has jobs"};
  if (auto r = audit::emit(ctx, audit::Action::reservation_change, "slots/default",
                           audit::Outcome::success,
                           {{"op", "init"}, {"total", std::to_string(total)}});
      !r) {
    return r.error();
  }
  total_ = total;
  default_ = Reservation{std::string(kDefaultReservation), total, 0, {}, {}};
  dedicated_.clear();
  project_assignment_.clear();
  return ok_status();
}

namespace {

// Reservation names follow identifier rules but may carry underscores.
bool is_reservation_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Status SlotPool::carve(std::string_view name, std::int64_t slot_count, std::string_view project,
                       const OpContext& ctx) {
  if (!is_reservation_name(name)) {
    return Error{Errc::invalid_name, "bad reservation name: " + std::string(name)};
  }
  if (name == kDefaultReservation || dedicated_.contains(std::string(name))) {
    return Error{Errc::duplicate_reservation, std::string(name)};
  }
  if (slot_count < 0) return Error{Errc::invalid_name, "negative slot count"};
  if (slot_count > default_.free()) {
    return Error{Errc::insufficient_default_capacity,
                 "carve " + std::to_string(slot_count) + " from default free " +
                     std::to_string(default_.free())};
  }
  if (auto r = audit::emit(ctx, audit::Action::reservation_change, "slots/" + std::string(name),
                           audit::Outcome::success,
                           {{"op", "carve"},
                            {"slots", std::to_string(slot_count)},
                            {"project", std::string(project)}});
      !r) {
    return r.error();
  }
  Reservation res{std::string(name), slot_count, 0, {}, {}};
  if (!project.empty()) {
    res.projects.insert(std::string(project));
    project_assignment_[std::string(project)] = std::string(name);
  }
  default_.capacity -= slot_count;
  dedicated_.emplace(std::string(name), std::move(res));
  return ok_status();
}

Status SlotPool::release(std::string_view name, const OpContext& ctx) {
  const auto it = dedicated_.find(std::string(name));
  if (it == dedicated_.end()) return Error{Errc::unknown_reservation, std::string(name)};
  if (it->second.allocated > 0 || !it->second.queue.empty()) {
    return Error{Errc::reservation_busy, std::string(name)};
  }
  if (auto r = audit::emit(ctx, audit::Action::reservation_change, "slots/" + std::string(name),
                           audit::Outcome::success, {{"op", "release"}});
      !r) {
    return r.error();
  }
  default_.capacity += it->second.capacity;
  for (const std::string& project : it->second.projects) project_assignment_.erase(project);
  dedicated_.erase(it);
  return ok_status();
}

Status SlotPool::purchase(std::int64_t extra, const OpContext& ctx) {
  if (extra < 0) return Error{Errc::invalid_name, "negative slot purchase"};
  if (extra == 0) return ok_status();
  if (auto r = audit::emit(ctx, audit::Action::reservation_change, "slots/default",
                           audit::Outcome::success,
                           {{"op", "purchase"}, {"extra", std::to_string(extra)}});
      !r) {
    return r.error();
  }
  total_ += extra;
  default_.capacity += extra;
  return ok_status();
}

std::string SlotPool::reservation_of(std::string_view project) const {
  const auto it = project_assignment_.find(std::string(project));
  return it == project_assignment_.end() ? std::string(kDefaultReservation) : it->second;
}

std::int64_t SlotPool::reservation_capacity(std::string_view reservation) const {
  const Reservation* r = reservation_ptr(reservation);
  return r == nullptr ? 0 : r->capacity;
}

Result<Placement> SlotPool::schedule(const SlotRequest& request, const OpContext& ctx) {
  if (request.slots_needed <= 0) return Error{Errc::invalid_name, "slots_needed must be > 0"};
  if (jobs_.contains(request.job_id)) return Error{Errc::already_exists, request.job_id};
  const std::string res_name = reservation_of(request.project);
  Reservation& res = *reservation_ptr(res_name);
  if (request.slots_needed > res.capacity) {
    return Error{Errc::request_exceeds_reservation,
                 request.job_id + " needs " + std::to_string(request.slots_needed) +
                     " > reservation capacity " + std::to_string(res.capacity)};
  }
  const bool can_start = res.queue.empty() && res.free() >= request.slots_needed;
  if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + request.job_id,
                           audit::Outcome::success,
                           {{"state", can_start ? "running" : "queued"},
                            {"reservation", res_name},
                            {"kind", std::string(job_kind_name(request.kind))}});
      !r) {
    return r.error();
  }
  SlotJob job;
  job.request = request;
  job.submitted_at = ctx.now;
  job.reservation = res_name;
  if (can_start) {
    job.state = JobState::running;
    job.started_at = ctx.now;
    res.allocated += request.slots_needed;
  } else {
    job.state = JobState::queued;
    // FIFO by submitted_at, ties broken by job id
    const auto pos = std::upper_bound(
        res.queue.begin(), res.queue.end(), job,
        [this](const SlotJob& j, const std::string& queued_id) {
          const SlotJob& queued = jobs_.at(queued_id);
          if (j.submitted_at != queued.submitted_at) return j.submitted_at < queued.submitted_at;
          return j.request.job_id < queued.request.job_id;
        });
    res.queue.insert(pos, request.job_id);
  }
  jobs_.emplace(request.job_id, std::move(job));
  return can_start ? Placement::allocated : Placement::queued;
}

Status SlotPool::pump(Reservation& res, const OpContext& ctx) {
  // Strict FIFO: the head either fits or blocks the queue.
  while (!res.queue.empty()) {
    SlotJob& head = jobs_.at(res.queue.front());
    if (head.request.slots_needed > res.free()) break;
    if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + head.request.job_id,
                             audit::Outcome::success,
                             {{"state", "running"}, {"reservation", res.name}});
        !r) {
      return r.error();
    }
    head.state = JobState::running;
    head.started_at = ctx.now;
    res.allocated += head.request.slots_needed;
    res.queue.erase(res.queue.begin());
  }
  return ok_status();
}

Status SlotPool::complete(std::string_view job_id, bool failed, const OpContext& ctx) {
  const auto it = jobs_.find(std::string(job_id));
  if (it == jobs_.end()) return Error{Errc::unknown_job, std::string(job_id)};
  SlotJob& job = it->second;
  if (job.state != JobState::running) {
    return Error{Errc::unknown_job, std::string(job_id) + " is not running"};
  }
  if (auto r = audit::emit(ctx, audit::Action::job_transition, "jobs/" + job.request.job_id,
                           failed ? audit::Outcome::failed : audit::Outcome::success,
                           {{"state", failed ? "failed" : "succeeded"}});
      !r) {
    return r.error();
  }
  job.state = failed ? JobState::failed : JobState::succeeded;
  job.finished_at = ctx.now;
  Reservation& res = *reservation_ptr(job.reservation);
  res.allocated -= job.request.slots_needed;
  return pump(res, ctx);
}

std::optional<Timestamp> SlotPool::next_finish_due() const {
  std::optional<Timestamp> due;
  for (const auto& [id, job] : jobs_) {
    if (job.state == JobState::running && job.request.duration > 0) {
      const Timestamp t = job.started_at + job.request.duration;
      if (!due || t < *due) due = t;
    }
  }
  return due;
}

Status SlotPool::finish_due_jobs(const OpContext& ctx) {
  // Deterministic order: by (finish time, job id).
  std::vector<std::pair<Timestamp, std::string>> due;
  for (const auto& [id, job] : jobs_) {
    if (job.state == JobState::running && job.request.duration > 0 &&
        job.started_at + job.request.duration <= ctx.now) {
      due.emplace_back(job.started_at + job.request.duration, id);
    }
  }
  std::sort(due.begin(), due.end());
  for (const auto& [t, id] : due) {
    OpContext at = ctx;
    at.now = t;
    if (auto r = complete(id, false, at); !r) return r.error();
  }
  return ok_status();
}

const SlotJob* SlotPool::find_job(std::string_view job_id) const {
  const auto it = jobs_.find(std::string(job_id));
  return it == jobs_.end() ? nullptr : &it->second;
}

PoolStatus SlotPool::status() const {
  PoolStatus s;
  s.total = total_;
  s.default_capacity = default_.capacity;
  s.default_free = default_.free();
  for (const auto& [id, job] : jobs_) {
    if (job.state == JobState::queued) ++s.queued_jobs;
    if (job.state == JobState::running) ++s.running_jobs;
  }
  s.reservations.push_back(default_);
  for (const auto& [name, res] : dedicated_) s.reservations.push_back(res);
  return s;
}

bool SlotPool::conservation_holds() const {
  std::int64_t dedicated_sum = 0;
  for (const auto& [name, res] : dedicated_) {
    if (res.allocated < 0 || res.allocated > res.capacity) return false;
    dedicated_sum += res.capacity;
  }
  if (default_.allocated < 0 || default_.allocated > default_.capacity) return false;
  return default_.capacity + dedicated_sum == total_;
}

namespace {

ordered_json reservation_to_json(const Reservation& r) {
  return {{"name", r.name},
          {"capacity", r.capacity},
          {"allocated", r.allocated},
          {"projects", r.projects},
          {"queue", r.queue}};
}

Reservation reservation_from_json(const ordered_json& j) {
  Reservation r;
  r.name = j.at("name").get<std::string>();
  r.capacity = j.at("capacity").get<std::int64_t>();
  r.allocated = j.at("allocated").get<std::int64_t>();
  r.projects = j.at("projects").get<std::set<std::string>>();
  r.queue = j.at("queue").get<std::vector<std::string>>();
  return r;
}

}  // namespace

nlohmann::ordered_json SlotPool::to_json() const {
  ordered_json j;
  j["total"] = total_;
  j["default"] = reservation_to_json(default_);
  ordered_json dedicated = ordered_json::array();
  for (const auto& [name, res] : dedicated_) dedicated.push_back(reservation_to_json(res));
  j["dedicated"] = std::move(dedicated);
  j["assignment"] = project_assignment_;
  ordered_json jobs = ordered_json::array();
  for (const auto& [id, job] : jobs_) {
    jobs.push_back({{"job_id", job.request.job_id},
                    {"project", job.request.project},
                    {"slots", job.request.slots_needed},
                    {"kind", std::string(job_kind_name(job.request.kind))},
                    {"duration", job.request.duration},
                    {"state", std::string(job_state_name(job.state))},
                    {"submitted_at", job.submitted_at},
                    {"started_at", job.started_at},
                    {"finished_at", job.finished_at},
                    {"reservation", job.reservation}});
  }
  j["jobs"] = std::move(jobs);
  return j;
}

Result<SlotPool> SlotPool::from_json(const nlohmann::ordered_json& j) {
  SlotPool pool;
  try {
    pool.total_ = j.at("total").get<std::int64_t>();
    pool.default_ = reservation_from_json(j.at("default"));
    for (const auto& r : j.at("dedicated")) {
      Reservation res = reservation_from_json(r);
      pool.dedicated_.emplace(res.name, std::move(res));
    }
    pool.project_assignment_ = j.at("assignment").get<std::map<std::string, std::string>>();
    for (const auto& n : j.at("jobs")) {
      SlotJob job;
      job.request.job_id = n.at("job_id").get<std::string>();
      job.request.project = n.at("project").get<std::string>();
      job.request.slots_needed = n.at("slots").get<std::int64_t>();
      const auto kind = parse_job_kind(n.at("kind").get<std::string>());
      const auto state = parse_job_state(n.at("state").get<std::string>());
      if (!kind || !state) return Error{Errc::corrupt_snapshot, "bad job kind or state"};
      job.request.kind = *kind;
      job.request.duration = n.at("duration").get<Duration>();
      job.state = *state;
      job.submitted_at = n.at("submitted_at").get<Timestamp>();
      job.started_at = n.at("started_at").get<Timestamp>();
      job.finished_at = n.at("finished_at").get<Timestamp>();
      job.reservation = n.at("reservation").get<std::string>();
      pool.jobs_.emplace(job.request.job_id, std::move(job));
    }
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("slot state: ") + ex.what()};
  }
  return pool;
}

}  // namespace bigbird::slots
