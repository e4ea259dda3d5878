#include "bigbird/observability.hpp"

#include "doctest.h"
#include "oracles.hpp"

using namespace bigbird;
using obs::Collector;
using obs::MetricName;
using slots::JobKind;
using slots::JobState;

namespace {

OpContext at(Timestamp t) { return OpContext{t, nullptr, "system"}; }

struct Fixture {
  sim::CloudSim cloud;
  slots::SlotPool pool;
  ingest::LoadService load;
  ingest::StatusStore statuses;
  Collector collector;

  Fixture() {
    REQUIRE(cloud.create_project("pa", {}, at(0)).ok());
    REQUIRE(cloud.create_project("pb", {}, at(0)).ok());
    REQUIRE(pool.init(1000, at(0)).ok());
  }
};

}  // namespace

TEST_CASE("info schema scope and filter semantics") {
  Fixture f;
  auto empty = obs::info_schema_query(f.cloud, f.pool, f.load, "org", {});
  REQUIRE(empty.ok());
  CHECK(empty.value().empty());

  REQUIRE(f.pool.schedule({"j1", "pa", 10, JobKind::query, 0}, at(1)).ok());
  REQUIRE(f.pool.schedule({"j2", "pa", 10, JobKind::analytics, 0}, at(2)).ok());
  REQUIRE(f.pool.schedule({"j3", "pb", 10, JobKind::query, 0}, at(3)).ok());
  REQUIRE(f.pool.complete("j2", false, at(5)).ok());

  auto all = obs::info_schema_query(f.cloud, f.pool, f.load, "org", {});
  REQUIRE(all.ok());
  CHECK(all.value().size() == 3);

  obs::InfoSchemaFilter running_only;
  running_only.state = JobState::running;
  auto running = obs::info_schema_query(f.cloud, f.pool, f.load, "org", running_only);
  CHECK(running.value().size() == 2);

  auto scoped = obs::info_schema_query(f.cloud, f.pool, f.load, "projects/pa", {});
  CHECK(scoped.value().size() == 2);

  auto missing = obs::info_schema_query(f.cloud, f.pool, f.load, "projects/none", {});
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.error().code == Errc::unknown_scope);

  // execution_time present only once finished
  for (const auto& row : all.value()) {
    if (row.job_id == "j2") {
      REQUIRE(row.execution_time.has_value());
      CHECK(*row.execution_time == 3);
    } else {
      CHECK_FALSE(row.execution_time.has_value());
    }
  }
}

TEST_CASE("an empty system polls a zero current_total_jobs point") {
  Fixture f;
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 60).ok());
  const auto* series = f.collector.find_series(MetricName::current_total_jobs, {});
  REQUIRE(series != nullptr);
  REQUIRE(series->points.size() == 1);
  CHECK(series->points[0].value == 0);
}

TEST_CASE("five submissions poll a five") {
  Fixture f;
  for (int i = 0; i < 5; ++i) {
    REQUIRE(f.pool.schedule({"j" + std::to_string(i), "pa", 10, JobKind::query, 0}, at(i)).ok());
  }
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 60).ok());
  CHECK(f.collector.find_series(MetricName::current_total_jobs, {})->points.back().value == 5);
}

TEST_CASE("polling twice at one instant appends nothing new") {
  Fixture f;
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 60).ok());
  const auto* series = f.collector.find_series(MetricName::current_total_jobs, {});
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 60).ok());
  CHECK(series->points.size() == 1);
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 120).ok());
  CHECK(series->points.size() == 2);
}

TEST_CASE("series timestamps are strictly increasing") {
  Fixture f;
  for (Timestamp t : {60, 120, 180, 240}) {
    REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, t).ok());
  }
  for (const auto& [key, series] : f.collector.series()) {
    for (std::size_t i = 1; i < series.points.size(); ++i) {
      REQUIRE(series.points[i].ts > series.points[i - 1].ts);
    }
  }
}

TEST_CASE("every point over a random trace equals the brute-force aggregation") {
  Fixture f;
  REQUIRE(f.pool.carve("lane", 200, "pb", at(0)).ok());
  oracles::PathGenerator gen(0x5eed0b5);
  Timestamp now = 0;
  int jobs = 0;
  for (int i = 0; i < 200; ++i) {
    now += gen.uniform(1, 40);
    const auto roll = gen.uniform(0, 99);
    if (roll < 60) {
      const std::string project = gen.coin() ? "pa" : "pb";
      (void)f.pool.schedule({"j" + std::to_string(jobs++), project,
                             static_cast<std::int64_t>(gen.uniform(1, 150)),
                             gen.coin() ? JobKind::query : JobKind::analytics,
                             static_cast<Duration>(gen.uniform(1, 100))},
                            at(now));
    } else if (roll < 70) {
      // fail a running job explicitly
      for (const auto& [id, job] : f.pool.jobs()) {
        if (job.state == JobState::running) {
          REQUIRE(f.pool.complete(id, true, at(now)).ok());
          break;
        }
      }
    } else if (roll < 85) {
      REQUIRE(f.pool.finish_due_jobs(at(now)).ok());
    } else {
      // tick-then-collect, the same phase order the clock driver uses;
      // otherwise a poll could observe a completion that is later recorded
      // with a backdated finish time
      REQUIRE(f.pool.finish_due_jobs(at(now)).ok());
      REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, now).ok());
    }
  }
  REQUIRE(f.pool.finish_due_jobs(at(now + 1)).ok());
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, now + 1).ok());

  const oracles::MetricOracle oracle{f.pool, f.load, f.cloud};
  std::size_t checked = 0;
  for (const auto& [key, series] : f.collector.series()) {
    for (const auto& point : series.points) {
      REQUIRE_MESSAGE(point.value == oracle.point_value(series, point.ts), key);
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("alert firings respect comparators and cooldown, matching a replay") {
  Fixture f;
  obs::AlertRule rule;
  rule.name = "too-many-live";
  rule.metric = MetricName::current_total_jobs;
  rule.comparator = obs::Comparator::gt;
  rule.threshold = 2;
  rule.pager = "oncall";
  f.collector.rules = {rule};
  f.collector.config.poll_interval = 60;
  f.collector.config.cooldown_polls = 2;  // 120s cooldown

  // below threshold: no firing
  REQUIRE(f.pool.schedule({"a", "pa", 1, JobKind::query, 0}, at(0)).ok());
  REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, 60).ok());
  CHECK(f.collector.evaluate_alerts(60).empty());

  // crossing fires once, then cooldown suppresses
  REQUIRE(f.pool.schedule({"b", "pa", 1, JobKind::query, 0}, at(61)).ok());
  REQUIRE(f.pool.schedule({"c", "pa", 1, JobKind::query, 0}, at(62)).ok());
  std::vector<Timestamp> polls;
  for (Timestamp t : {120, 180, 240, 300}) {
    REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, t).ok());
    f.collector.evaluate_alerts(t);
    polls.push_back(t);
  }
  // fired at 120, suppressed at 180 (within 120s), fired again at 240, ...
  REQUIRE(f.collector.firings().size() == 2);
  CHECK(f.collector.firings()[0].at == 120);
  CHECK(f.collector.firings()[1].at == 240);

  const auto replay = oracles::replay_alerts(
      f.collector.series(), f.collector.rules, {60, 120, 180, 240, 300},
      f.collector.config.cooldown_polls * f.collector.config.poll_interval);
  REQUIRE(replay.size() == f.collector.firings().size());
  for (std::size_t i = 0; i < replay.size(); ++i) {
    CHECK(replay[i] == f.collector.firings()[i]);
  }
}

TEST_CASE("oscillating series under cooldown match the replay oracle") {
  Fixture f;
  obs::AlertRule rule;
  rule.name = "waiting";
  rule.metric = MetricName::jobs_waiting_for_slots;
  rule.dim_filter = {{"reservation", "default"}};
  rule.comparator = obs::Comparator::ge;
  rule.threshold = 1;
  rule.pager = "oncall";
  f.collector.rules = {rule};
  f.collector.config.poll_interval = 10;
  f.collector.config.cooldown_polls = 3;

  oracles::PathGenerator gen(0x5eedf1a5);
  std::vector<Timestamp> polls;
  int jobs = 0;
  Timestamp now = 0;
  for (int i = 0; i < 60; ++i) {
    now += 10;
    if (gen.coin()) {
      (void)f.pool.schedule(
          {"x" + std::to_string(jobs++), "pa", 900, JobKind::query,
           static_cast<Duration>(gen.uniform(5, 30))},
          at(now));
    }
    REQUIRE(f.pool.finish_due_jobs(at(now)).ok());
    REQUIRE(f.collector.poll(f.cloud, f.pool, f.load, now).ok());
    f.collector.evaluate_alerts(now);
    polls.push_back(now);
  }
  const auto replay = oracles::replay_alerts(
      f.collector.series(), f.collector.rules, polls,
      f.collector.config.cooldown_polls * f.collector.config.poll_interval);
  REQUIRE(f.collector.firings().size() == replay.size());
  for (std::size_t i = 0; i < replay.size(); ++i) {
    CHECK(f.collector.firings()[i] == replay[i]);
  }
}
