#pragma once

// Test-only generators and brute-force evaluators. Everything here is
// independent of the implementation paths it checks: the access oracle
// enumerates (ancestor, binding, membership) combinations over its own copy
// of the tree, and the metric oracle recomputes aggregates from raw job
// timestamps.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bigbird/ingestion.hpp"
#include "bigbird/observability.hpp"
#include "bigbird/paths.hpp"
#include "bigbird/slots.hpp"

namespace oracles {

using bigbird::Duration;
using bigbird::Timestamp;

// ---------------------------------------------------------------------------
// Random valid on-prem paths
// ---------------------------------------------------------------------------

class PathGenerator {
 public:
  explicit PathGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string identifier(std::size_t min_len = 1, std::size_t max_len = 8) {
    static constexpr char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
    std::string out;
    const std::size_t n = len(rng_);
    for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng_)]);
    return out;
  }

  std::string segment() {
    static constexpr char alphabet[] =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-";
    std::uniform_int_distribution<std::size_t> len(1, 12);
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
    std::string out;
    const std::size_t n = len(rng_);
    for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[pick(rng_)]);
    return out;
  }

  bigbird::paths::OnPremPath onprem() {
    bigbird::paths::OnPremPath p;
    p.datacenter = identifier();
    p.cluster = identifier();
    p.kind = coin() ? bigbird::paths::NamespaceKind::user : bigbird::paths::NamespaceKind::log;
    p.owner = identifier();
    std::uniform_int_distribution<std::size_t> count(0, 5);
    const std::size_t n = count(rng_);
    for (std::size_t i = 0; i < n; ++i) p.relative.push_back(segment());
    return p;
  }

  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Brute-force access evaluation over a test-owned tree copy
// ---------------------------------------------------------------------------

struct AccessWorld {
  std::map<std::string, std::string> parent;                   // node -> parent ("" for root)
  std::vector<std::tuple<std::string, std::string, int>> bindings;  // (resource, principal, role)
  std::map<std::string, std::set<std::string>> members;        // group -> principals

  // role: 0 owner, 1 writer, 2 reader; action: 0 read, 1 write, 2 administer
  bool allowed(const std::string& principal, const std::string& resource, int action) const {
    std::string node = resource;
    while (true) {
      for (const auto& [res, who, role] : bindings) {
        if (res != node) continue;
        const bool covers = action == 0 ? true : (action == 1 ? role <= 1 : role == 0);
        if (!covers) continue;
        if (who == principal) return true;
        const auto g = members.find(who);
        if (g != members.end() && g->second.count(principal) > 0) return true;
      }
      const auto up = parent.find(node);
      if (up == parent.end() || up->second.empty()) return false;
      node = up->second;
    }
  }
};

// ---------------------------------------------------------------------------
// Metric recomputation from raw job timestamps at a historical instant
// ---------------------------------------------------------------------------

struct MetricOracle {
  const bigbird::slots::SlotPool& pool;
  const bigbird::ingest::LoadService& load;
  const bigbird::sim::CloudSim& cloud;

  // Timestamps alone are ambiguous (a job can legitimately start at t=0),
  // so validity comes from the final state: started_at is meaningful once a
  // job left the queue, finished_at once it reached a terminal state.
  static bool ever_started(bigbird::slots::JobState state) {
    return state != bigbird::slots::JobState::queued;
  }
  static bool terminal(bigbird::slots::JobState state) {
    return state == bigbird::slots::JobState::succeeded ||
           state == bigbird::slots::JobState::failed;
  }
  static bool finished_by(bigbird::slots::JobState state, Timestamp finished, Timestamp t) {
    return terminal(state) && finished <= t;
  }

  std::int64_t current_total_jobs(Timestamp t) const {
    std::int64_t n = 0;
    for (const auto& [id, j] : pool.jobs()) {
      if (j.submitted_at <= t && !finished_by(j.state, j.finished_at, t)) ++n;
    }
    for (const auto& [id, j] : load.jobs()) {
      if (j.submitted_at <= t && !finished_by(j.state, j.finished_at, t)) ++n;
    }
    return n;
  }

  std::int64_t execution_time(const std::string& project, Timestamp t) const {
    std::int64_t sum = 0;
    for (const auto& [id, j] : pool.jobs()) {
      if (j.request.project == project && finished_by(j.state, j.finished_at, t)) {
        sum += j.finished_at - j.started_at;
      }
    }
    if (project == load.config.load_project) {
      for (const auto& [id, j] : load.jobs()) {
        if (finished_by(j.state, j.finished_at, t)) sum += j.finished_at - j.started_at;
      }
    }
    return sum;
  }

  std::int64_t failed_jobs(const std::string& project, Timestamp t) const {
    std::int64_t n = 0;
    for (const auto& [id, j] : pool.jobs()) {
      if (j.request.project == project && j.state == bigbird::slots::JobState::failed &&
          j.finished_at <= t) {
        ++n;
      }
    }
    if (project == load.config.load_project) {
      for (const auto& [id, j] : load.jobs()) {
        if (j.state == bigbird::slots::JobState::failed && j.finished_at <= t) ++n;
      }
    }
    return n;
  }

  std::int64_t slots_used(const std::string& reservation, Timestamp t) const {
    std::int64_t sum = 0;
    for (const auto& [id, j] : pool.jobs()) {
      if (j.reservation == reservation && ever_started(j.state) && j.started_at <= t &&
          !finished_by(j.state, j.finished_at, t)) {
        sum += j.request.slots_needed;
      }
    }
    return sum;
  }

  std::int64_t jobs_waiting(const std::string& reservation, Timestamp t) const {
    std::int64_t n = 0;
    for (const auto& [id, j] : pool.jobs()) {
      if (j.reservation == reservation && j.submitted_at <= t &&
          (!ever_started(j.state) || j.started_at > t)) {
        ++n;
      }
    }
    return n;
  }

  std::int64_t degradation_warnings(Timestamp t) const {
    std::int64_t n = 0;
    for (const auto& w : cloud.warnings()) {
      if (w.at <= t) ++n;
    }
    return n;
  }

  // Recomputes the value a series point should hold.
  std::int64_t point_value(const bigbird::obs::MetricSeries& s, Timestamp t) const {
    using bigbird::obs::MetricName;
    switch (s.name) {
      case MetricName::current_total_jobs:
        return current_total_jobs(t);
      case MetricName::execution_time_per_job_per_project:
        return execution_time(s.dimensions.at("project"), t);
      case MetricName::failed_jobs_per_project:
        return failed_jobs(s.dimensions.at("project"), t);
      case MetricName::slots_allocated: {
        // Capacities in the oracle traces are fixed before jobs run.
        return pool.reservation_capacity(s.dimensions.at("reservation"));
      }
      case MetricName::slots_used:
        return slots_used(s.dimensions.at("reservation"), t);
      case MetricName::jobs_waiting_for_slots:
        return jobs_waiting(s.dimensions.at("reservation"), t);
      case MetricName::degradation_warnings:
        return degradation_warnings(t);
    }
    return -1;
  }
};

// ---------------------------------------------------------------------------
// Alert replay: re-runs threshold + cooldown logic over recorded series
// ---------------------------------------------------------------------------

inline std::vector<bigbird::obs::AlertFiring> replay_alerts(
    const std::map<std::string, bigbird::obs::MetricSeries>& series,
    const std::vector<bigbird::obs::AlertRule>& rules, const std::vector<Timestamp>& poll_times,
    Duration cooldown) {
  using namespace bigbird::obs;
  std::vector<AlertFiring> out;
  std::map<std::string, Timestamp> last_fired;
  for (const Timestamp t : poll_times) {
    for (const AlertRule& rule : rules) {
      for (const auto& [key, s] : series) {
        if (s.name != rule.metric) continue;
        bool dims_ok = true;
        for (const auto& [k, v] : rule.dim_filter) {
          const auto it = s.dimensions.find(k);
          if (it == s.dimensions.end() || it->second != v) {
            dims_ok = false;
            break;
          }
        }
        if (!dims_ok) continue;
        const MetricPoint* latest = nullptr;
        for (const MetricPoint& p : s.points) {
          if (p.ts <= t) latest = &p;
        }
        if (latest == nullptr) continue;
        const double v = static_cast<double>(latest->value);
        bool crossed = false;
        switch (rule.comparator) {
          case Comparator::gt: crossed = v > rule.threshold; break;
          case Comparator::ge: crossed = v >= rule.threshold; break;
          case Comparator::lt: crossed = v < rule.threshold; break;
          case Comparator::le: crossed = v <= rule.threshold; break;
        }
        if (!crossed) continue;
        const std::string fired_key = rule.name + "|" + key;
        const auto last = last_fired.find(fired_key);
        if (last != last_fired.end() && t - last->second < cooldown) continue;
        last_fired[fired_key] = t;
        out.push_back({rule.name, key, t, latest->value, rule.pager});
      }
    }
  }
  return out;
}

}  // namespace oracles
