// Acceptance suite: one check function per criterion, one PASS/FAIL line
// each. Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "bigbird/http_api.hpp"
#include "bigbird/system.hpp"
#include "oracles.hpp"

using namespace bigbird;

namespace {

struct Check {
  int failures = 0;
  std::vector<std::string> notes;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ++failures;
      notes.push_back(what);
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

OpContext at(Timestamp t) { return OpContext{t, nullptr, "system"}; }

// ---------------------------------------------------------------------------
// 1. Path mapping fidelity
// ---------------------------------------------------------------------------

void criterion_paths(Check& check) {
  const auto start = std::chrono::steady_clock::now();

  auto user_path = paths::parse_onprem("/dc1/cluster1/user/helen/some/path/part-001.lzo");
  check.expect(user_path.ok(), "user example parses");
  if (user_path.ok()) {
    const auto logical = paths::to_logical(user_path.value());
    check.expect(logical.str() == "gcs/user/helen/some/path/part-001.lzo",
                 "logical form of the user example");
    auto physical = paths::to_physical(logical);
    check.expect(physical.ok() && physical.value().str() ==
                                      "gs://user.helen.dp.twitter.domain/some/path/part-001.lzo",
                 "physical form of the user example");
  }

  auto log_path = paths::parse_onprem("/dc1/cluster1/log/activity-logs/some/path/part-001.lzo");
  check.expect(log_path.ok(), "log example parses");
  if (log_path.ok()) {
    auto physical = paths::to_physical(paths::to_logical(log_path.value()));
    check.expect(physical.ok() &&
                     physical.value().str() ==
                         "gs://log.activity-logs.dp.twitter.domain/some/path/part-001.lzo",
                 "physical form of the log example");
  }

  oracles::PathGenerator gen(0xacce5501);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const paths::OnPremPath original = gen.onprem();
    const std::string text = original.str();
    auto parsed = paths::parse_onprem(text);
    if (!parsed.ok() || parsed.value().str() != text) {
      ++failures;
      continue;
    }
    const auto logical = paths::to_logical(parsed.value());
    auto physical = paths::to_physical(logical);
    if (!physical.ok()) {
      ++failures;
      continue;
    }
    auto back = paths::from_physical(physical.value());
    if (!back.ok() || !(back.value() == logical)) ++failures;
  }
  check.expect(failures == 0,
               "10000 random paths round-trip (failures: " + std::to_string(failures) + ")");
  check.expect(seconds_since(start) < 1.0, "runtime under 1 s");
}

// ---------------------------------------------------------------------------
// 2. Provisioning at desk scale
// ---------------------------------------------------------------------------

void criterion_provisioning(Check& check) {
  Config config;
  System system(config);
  std::vector<provision::TenantSpec> tenants;
  for (int i = 0; i < 500; ++i) {
    tenants.push_back({"svc-" + std::to_string(i), provision::TenantKind::service_account_user});
  }
  for (int i = 0; i < 100; ++i) {
    tenants.push_back({"logs-" + std::to_string(i), provision::TenantKind::log_category});
  }

  const auto start = std::chrono::steady_clock::now();
  const auto first = system.reconcile(tenants, false);
  const double elapsed = seconds_since(start);
  check.expect(elapsed < 60.0, "first reconcile under 60 s");
  check.expect(first.created.size() == 600, "600 tenants created on the first run");
  check.expect(first.failed.empty(), "no failures on the first run");

  const std::string before = system.state().cloud.to_json().dump();
  const auto second = system.reconcile(tenants, false);
  check.expect(second.created.empty(), "0 created on the second run");
  check.expect(second.failed.empty(), "0 failed on the second run");
  check.expect(second.unchanged.size() == 600, "600 unchanged on the second run");
  check.expect(system.state().cloud.to_json().dump() == before,
               "cloud state byte-identical across runs");

  // Least privilege: enumerate every binding the procedures prescribe and
  // require exact set equality with the installed set.
  const auto& ids = system.state().ids;
  const auto& naming = config.naming;
  std::set<sim::AclBinding> expected;
  const auto reader_of = [&](const std::string& subject) {
    const identity::ReaderGroup* group = ids.group_for_subject(subject);
    check.expect(group != nullptr, "reader group exists for " + subject);
    return group == nullptr ? std::string("missing") : group->group_email;
  };
  for (int i = 0; i < 500; ++i) {
    const std::string name = "svc-" + std::to_string(i);
    const std::string shadow = name + "@" + config.identity.service_account_domain;
    const std::string bucket =
        sim::bucket_rid(paths::bucket_name_for(paths::NamespaceKind::user, name));
    const std::string dataset = sim::dataset_rid(naming.render_user_project(name), "user");
    expected.insert({bucket, shadow, sim::Role::owner});
    expected.insert({bucket, reader_of(bucket), sim::Role::reader});
    expected.insert({dataset, shadow, sim::Role::owner});
    expected.insert({dataset, reader_of(dataset), sim::Role::reader});
  }
  const std::string repl_shadow =
      naming.replication_account + "@" + config.identity.service_account_domain;
  for (int i = 0; i < 100; ++i) {
    const std::string name = "logs-" + std::to_string(i);
    const std::string shadow = name + "@" + config.identity.service_account_domain;
    const std::string bucket =
        sim::bucket_rid(paths::bucket_name_for(paths::NamespaceKind::log, name));
    const std::string dataset = sim::dataset_rid(naming.render_log_project(name), name);
    const std::string view = sim::view_rid(naming.central_logs_project, "logs", name);
    expected.insert({bucket, shadow, sim::Role::owner});
    expected.insert({bucket, reader_of(bucket), sim::Role::reader});
    expected.insert({dataset, repl_shadow, sim::Role::owner});
    expected.insert({dataset, reader_of(dataset), sim::Role::reader});
    expected.insert({view, reader_of(view), sim::Role::reader});
  }
  check.expect(system.state().cloud.bindings() == expected,
               "installed bindings equal the least-privilege expectation set");

  // count oracle: recount node kinds from scratch
  std::int64_t projects = 0;
  std::int64_t datasets = 0;
  std::int64_t views = 0;
  std::set<std::string> view_backings;
  for (const auto& [id, node] : system.state().cloud.nodes()) {
    if (node.kind == sim::ResourceKind::project) ++projects;
    if (node.kind == sim::ResourceKind::dataset) ++datasets;
    if (node.kind == sim::ResourceKind::view) {
      ++views;
      view_backings.insert(node.view->backing_dataset);
    }
  }
  // 500 user + 100 bql + gcs + central-logs + load projects
  check.expect(projects == 603, "project count (got " + std::to_string(projects) + ")");
  // 500 user datasets + 100 category datasets + the central `logs` dataset
  check.expect(datasets == 601, "dataset count (got " + std::to_string(datasets) + ")");
  check.expect(views == 100 && view_backings.size() == 100,
               "100 central views, each backed by a distinct category dataset");
}

// ---------------------------------------------------------------------------
// 3. Quota threshold suite (ten limits)
// ---------------------------------------------------------------------------

void criterion_quotas(Check& check) {
  const auto start = std::chrono::steady_clock::now();

  {  // 1. datasets per project: 1000 clean, 1001st warns
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    bool warned_early = false;
    for (int i = 0; i < 1000; ++i) {
      auto r = cloud.create_dataset("p", "d" + std::to_string(i), at(0));
      if (!r.ok() || r.value().degradation_warning) warned_early = true;
    }
    auto over = cloud.create_dataset("p", "d1000", at(0));
    check.expect(!warned_early && over.ok() && over.value().degradation_warning,
                 "1001st dataset warns");
  }
  {  // 2. authorized views per dataset: 2500 clean, 2501st rejects
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    (void)cloud.create_dataset("p", "d", at(0));
    (void)cloud.create_dataset("p", "backing", at(0));
    bool all_ok = true;
    for (int i = 0; i < 2500; ++i) {
      if (!cloud.create_view("p", "d", "v" + std::to_string(i), "projects/p/datasets/backing",
                             true, at(0))
               .ok()) {
        all_ok = false;
      }
    }
    auto over =
        cloud.create_view("p", "d", "v2500", "projects/p/datasets/backing", true, at(0));
    check.expect(all_ok && !over.ok() && over.error().code == Errc::quota_exceeded,
                 "2501st authorized view rejects");
  }
  {  // 3. columns per table: 10000 fine, 10001 rejects
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    (void)cloud.create_dataset("p", "d", at(0));
    auto wide = cloud.create_table("p", "d", "twide", 10000, false, at(0));
    auto wider = cloud.create_table("p", "d", "twider", 10001, false, at(0));
    check.expect(wide.ok() && !wider.ok() && wider.error().code == Errc::quota_exceeded,
                 "10001st column rejects");
  }
  {  // 4. table ops per day: 1000 then reject, counting a downstream failure
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    (void)cloud.create_dataset("p", "d", at(0));
    (void)cloud.create_table("p", "d", "t", 1, false, at(0));
    const std::string table = "projects/p/datasets/d/tables/t";
    bool all_ok = cloud.table_operation(table, sim::TableOpKind::data_write, true, at(0)).ok();
    for (int i = 0; i < 999; ++i) {
      if (!cloud.table_operation(table, sim::TableOpKind::data_write, false, at(i % 100)).ok()) {
        all_ok = false;
      }
    }
    auto over = cloud.table_operation(table, sim::TableOpKind::data_write, false, at(200));
    auto next_day = cloud.table_operation(table, sim::TableOpKind::data_write, false, at(kDay));
    check.expect(all_ok && !over.ok() && over.error().code == Errc::quota_exceeded &&
                     next_day.ok(),
                 "1001st table op per day rejects (failures count)");
  }
  {  // 5. metadata rate: 5 per 10 s, boundary admits
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    (void)cloud.create_dataset("p", "d", at(0));
    (void)cloud.create_table("p", "d", "t", 1, false, at(0));
    const std::string table = "projects/p/datasets/d/tables/t";
    bool all_ok = true;
    for (int i = 0; i < 5; ++i) {
      if (!cloud.table_operation(table, sim::TableOpKind::metadata, false, at(0)).ok()) {
        all_ok = false;
      }
    }
    auto sixth = cloud.table_operation(table, sim::TableOpKind::metadata, false, at(9));
    auto boundary = cloud.table_operation(table, sim::TableOpKind::metadata, false, at(10));
    check.expect(all_ok && !sixth.ok() && boundary.ok(),
                 "6th metadata op in 10 s rejects, admits at the window boundary");
  }
  {  // 6. ReadRows per minute per user per project
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    bool all_ok = true;
    for (int i = 0; i < 5000; ++i) {
      if (!cloud.record_api_call("alice", "p", sim::ApiCallKind::read_rows, at(30)).ok()) {
        all_ok = false;
      }
    }
    auto over = cloud.record_api_call("alice", "p", sim::ApiCallKind::read_rows, at(59));
    bool other_user_ok = true;
    for (int i = 0; i < 5000; ++i) {
      if (!cloud.record_api_call("bob", "p", sim::ApiCallKind::read_rows, at(59)).ok()) {
        other_user_ok = false;
      }
    }
    check.expect(all_ok && !over.ok() && other_user_ok,
                 "5001st ReadRows per minute rejects; scope is per user per project");
  }
  {  // 7. other storage API calls per minute
    sim::CloudSim cloud;
    (void)cloud.create_project("p", {}, at(0));
    bool all_ok = true;
    for (int i = 0; i < 1000; ++i) {
      if (!cloud.record_api_call("alice", "p", sim::ApiCallKind::other_storage_api, at(0)).ok()) {
        all_ok = false;
      }
    }
    auto over = cloud.record_api_call("alice", "p", sim::ApiCallKind::other_storage_api, at(30));
    check.expect(all_ok && !over.ok(), "1001st storage API call per minute rejects");
  }
  {  // 8. streaming RPS, scaled limit on the same code path
    sim::CloudSim cloud;
    cloud.quota.streaming_rps_per_project = 1000;
    (void)cloud.create_project("p", {}, at(0));
    bool all_ok = true;
    for (int i = 0; i < 1000; ++i) {
      if (!cloud.record_api_call("svc", "p", sim::ApiCallKind::streaming_insert, at(5)).ok()) {
        all_ok = false;
      }
    }
    auto over = cloud.record_api_call("svc", "p", sim::ApiCallKind::streaming_insert, at(5));
    auto next_second = cloud.record_api_call("svc", "p", sim::ApiCallKind::streaming_insert,
                                             at(6));
    check.expect(all_ok && !over.ok() && next_second.ok(), "scaled streaming RPS rejects");
  }
  {  // 9. load jobs per project per day: 100000 then reject
    sim::CloudSim cloud;
    slots::SlotPool pool;
    ingest::StatusStore statuses;
    ingest::LoadService load;
    (void)pool.init(100000, at(0));
    (void)pool.carve("load-lane", 2000, load.config.load_project, at(0));
    (void)cloud.create_project(load.config.load_project, {}, at(0));
    (void)cloud.create_project("dest", {}, at(0));
    (void)cloud.create_dataset("dest", "d", at(0));
    (void)cloud.bind("projects/dest/datasets/d", "loader", sim::Role::writer, at(0));
    ingest::SubmitOptions options;
    options.submitter = "loader";
    options.duration = 1;
    const paths::PhysicalBucketPath src{"user.h.dp.twitter.domain", "k"};
    bool all_ok = true;
    for (int i = 0; i < 100000; ++i) {
      if (!load.submit(ingest::Tool::dataflow, src, "dest", "d", "t", ingest::Format::lzo,
                       options, cloud, nullptr, at(100))
               .ok()) {
        all_ok = false;
      }
    }
    auto over = load.submit(ingest::Tool::dataflow, src, "dest", "d", "t", ingest::Format::lzo,
                            options, cloud, nullptr, at(20000));
    auto next_day = load.submit(ingest::Tool::dataflow, src, "dest", "d", "t",
                                ingest::Format::lzo, options, cloud, nullptr, at(kDay));
    check.expect(all_ok && !over.ok() && over.error().code == Errc::quota_exceeded &&
                     next_day.ok(),
                 "100001st load job per day rejects, next day admits");
  }
  {  // 10. concurrency queuing: 50 per 2000 slots, 51st queues
    sim::CloudSim cloud;
    slots::SlotPool pool;
    ingest::StatusStore statuses;
    ingest::LoadService load;
    (void)pool.init(100000, at(0));
    (void)pool.carve("load-lane", 2000, load.config.load_project, at(0));
    (void)cloud.create_project(load.config.load_project, {}, at(0));
    (void)cloud.create_project("dest", {}, at(0));
    (void)cloud.create_dataset("dest", "d", at(0));
    (void)cloud.bind("projects/dest/datasets/d", "loader", sim::Role::writer, at(0));
    ingest::SubmitOptions options;
    options.submitter = "loader";
    options.duration = 1000;
    bool all_ok = true;
    for (int i = 0; i < 51; ++i) {
      const paths::PhysicalBucketPath src{"user.h.dp.twitter.domain",
                                          "k" + std::to_string(i)};
      if (!load.submit(ingest::Tool::dataflow, src, "dest", "d", "t", ingest::Format::lzo,
                       options, cloud, nullptr, at(0))
               .ok()) {
        all_ok = false;
      }
    }
    (void)load.tick(pool, cloud.quota, statuses, at(0));
    check.expect(all_ok && load.running_count() == 50 && load.queue().size() == 1,
                 "51st concurrent load job queues at 2000 reserved slots");
  }

  check.expect(seconds_since(start) < 10.0, "quota suite under 10 s");
}

// ---------------------------------------------------------------------------
// 4. Slot arithmetic
// ---------------------------------------------------------------------------

void criterion_slots(Check& check) {
  {  // the worked example
    slots::SlotPool pool;
    (void)pool.init(100000, at(0));
    (void)pool.carve("tweet_analyzer", 30000, "analytics-proj", at(0));
    check.expect(pool.default_capacity() == 70000 &&
                     pool.dedicated().at("tweet_analyzer").capacity == 30000 &&
                     pool.total_purchased() == 100000,
                 "init 100000, carve 30000, default 70000");
  }
  {  // conservation across 1000 random operations
    oracles::PathGenerator gen(0xacce5504);
    slots::SlotPool pool;
    (void)pool.init(50000, at(0));
    int violations = 0;
    int names = 0;
    int jobs = 0;
    Timestamp now = 0;
    for (int i = 0; i < 1000; ++i) {
      now += 1;
      const auto roll = gen.uniform(0, 99);
      if (roll < 20) {
        (void)pool.carve("r" + std::to_string(names++),
                         static_cast<std::int64_t>(gen.uniform(0, 5000)),
                         "p" + std::to_string(names), at(now));
      } else if (roll < 30 && !pool.dedicated().empty()) {
        auto it = pool.dedicated().begin();
        std::advance(it, gen.uniform(0, pool.dedicated().size() - 1));
        (void)pool.release(it->first, at(now));
      } else if (roll < 40) {
        (void)pool.purchase(static_cast<std::int64_t>(gen.uniform(0, 1000)), at(now));
      } else if (roll < 80) {
        (void)pool.schedule({"j" + std::to_string(jobs++), "shared",
                             static_cast<std::int64_t>(gen.uniform(1, 2000)), slots::JobKind::query,
                             static_cast<Duration>(gen.uniform(1, 50))},
                            at(now));
      } else {
        (void)pool.finish_due_jobs(at(now));
      }
      if (!pool.conservation_holds()) ++violations;
    }
    check.expect(violations == 0, "conservation held across 1000 random operations");
  }
  {  // noisy neighbor: two-run comparison
    const auto run = [&](bool carve) -> Duration {
      slots::SlotPool pool;
      (void)pool.init(10000, at(0));
      if (carve) (void)pool.carve("small-lane", 2000, "small-proj", at(0));
      (void)pool.schedule(
          {"noisy", "big-proj", carve ? std::int64_t{8000} : std::int64_t{10000},
           slots::JobKind::analytics, 5000},
          at(0));
      for (int i = 0; i < 10; ++i) {
        (void)pool.schedule({"small-" + std::to_string(i), "small-proj", 400,
                             slots::JobKind::query, 20},
                            at(5 + i));
      }
      while (pool.next_finish_due()) {
        (void)pool.finish_due_jobs(at(*pool.next_finish_due()));
      }
      Duration wait = 0;
      for (int i = 0; i < 10; ++i) {
        const slots::SlotJob* job = pool.find_job("small-" + std::to_string(i));
        if (job == nullptr || job->state != slots::JobState::succeeded) return -1;
        wait += job->started_at - job->submitted_at;
      }
      return wait;
    };
    const Duration shared = run(false);
    const Duration carved = run(true);
    check.expect(shared >= 0 && carved >= 0 && carved < shared,
                 "dedicated jobs are not starved by a saturating default workload");
  }
}

// ---------------------------------------------------------------------------
// 5. Ingestion tool capability fidelity
// ---------------------------------------------------------------------------

void criterion_capability_matrix(Check& check) {
  using ingest::Format;
  using ingest::Tool;
  const auto& blaster = ingest::capability(Tool::blaster);
  const auto& bid = ingest::capability(Tool::bid);
  const auto& dataflow = ingest::capability(Tool::dataflow);

  int cells = 0;
  const auto cell = [&](bool condition) {
    ++cells;
    return condition;
  };
  const bool all_cells =
      cell(blaster.formats == std::set<Format>{Format::parquet, Format::lzo}) &&
      cell(bid.formats == std::set<Format>{Format::parquet, Format::csv, Format::tsv}) &&
      cell(dataflow.formats == std::set<Format>{Format::lzo}) && cell(blaster.idempotent) &&
      cell(bid.idempotent) && cell(!dataflow.idempotent) && cell(blaster.requires_slots) &&
      cell(bid.requires_slots) && cell(dataflow.requires_slots) && cell(blaster.backfill) &&
      cell(bid.backfill) && cell(dataflow.backfill) && cell(blaster.partitioned) &&
      cell(bid.partitioned) && cell(!dataflow.partitioned);
  check.expect(all_cells && cells == 15, "all 15 capability cells match");

  // behavioral consequences
  sim::CloudSim cloud;
  slots::SlotPool pool;
  ingest::LoadService load;
  (void)pool.init(4000, at(0));
  (void)pool.carve("lane", 2000, load.config.load_project, at(0));
  (void)cloud.create_project(load.config.load_project, {}, at(0));
  (void)cloud.create_project("dest", {}, at(0));
  (void)cloud.create_dataset("dest", "d", at(0));
  (void)cloud.bind("projects/dest/datasets/d", "loader", sim::Role::writer, at(0));
  ingest::SubmitOptions options;
  options.submitter = "loader";
  const paths::PhysicalBucketPath src{"user.h.dp.twitter.domain", "part-1"};

  auto rejected = load.submit(ingest::Tool::dataflow, src, "dest", "d", "t",
                              ingest::Format::parquet, options, cloud, nullptr, at(0));
  check.expect(!rejected.ok() && rejected.error().code == Errc::unsupported_format,
               "dataflow+parquet rejected");

  auto b1 = load.submit(ingest::Tool::bid, src, "dest", "d", "t", ingest::Format::csv, options,
                        cloud, nullptr, at(0));
  auto b2 = load.submit(ingest::Tool::bid, src, "dest", "d", "t", ingest::Format::csv, options,
                        cloud, nullptr, at(1));
  check.expect(b1.ok() && b2.ok() && b1.value() == b2.value(), "BID duplicate deduped");

  auto d1 = load.submit(ingest::Tool::dataflow, src, "dest", "d", "t", ingest::Format::lzo,
                        options, cloud, nullptr, at(2));
  auto d2 = load.submit(ingest::Tool::dataflow, src, "dest", "d", "t", ingest::Format::lzo,
                        options, cloud, nullptr, at(3));
  check.expect(d1.ok() && d2.ok() && d1.value() != d2.value(), "dataflow duplicate not deduped");
}

// ---------------------------------------------------------------------------
// 6. Audit completeness
// ---------------------------------------------------------------------------

void criterion_audit(Check& check) {
  const std::string audit_path =
      (std::filesystem::temp_directory_path() / "bigbird-acceptance-audit.ndjson").string();
  const std::string state_path =
      (std::filesystem::temp_directory_path() / "bigbird-acceptance-state.json").string();
  std::filesystem::remove(audit_path);
  std::filesystem::remove(state_path);

  Config config;
  audit::Sink sink;
  if (!sink.open(audit_path).ok()) {
    check.expect(false, "audit file opens");
    return;
  }
  System system(config, &sink);
  auto& s = system.state();

  // Every step plays one control-plane call and predicts its event yield
  // from the documented emission contract; the observed sink delta must
  // match after every single call.
  std::size_t predicted = 0;
  int ops = 0;
  bool deltas_ok = true;
  const auto play = [&](std::size_t expected_delta, const std::function<void()>& fn) {
    const std::size_t before = sink.events().size();
    fn();
    ++ops;
    predicted += expected_delta;
    if (sink.events().size() != before + expected_delta) deltas_ok = false;
  };

  play(1, [&] { (void)s.pool.init(100000, system.ctx()); });
  play(1, [&] { (void)s.cloud.create_project("pa", {}, system.ctx()); });
  play(0, [&] { (void)s.cloud.create_project("pa", {}, system.ctx()); });  // AlreadyExists
  play(1, [&] { (void)s.cloud.create_dataset("pa", "d", system.ctx()); });
  play(1, [&] { (void)s.cloud.create_table("pa", "d", "t", 4, false, system.ctx()); });
  play(1, [&] {
    (void)s.ids.ensure_shadow_account("helen", identity::PrincipalKind::service_account_user,
                                      system.ctx());
  });
  play(0, [&] {
    (void)s.ids.ensure_shadow_account("helen", identity::PrincipalKind::service_account_user,
                                      system.ctx());
  });
  play(1, [&] {
    (void)s.cloud.bind("projects/pa/datasets/d", "helen@gserviceaccount.com", sim::Role::owner,
                       system.ctx());
  });
  play(2, [&] {  // group creation + read-only binding install
    (void)s.ids.ensure_reader_group("projects/pa/datasets/d", s.cloud, system.ctx());
  });

  const std::string group =
      s.ids.group_for_subject("projects/pa/datasets/d")->group_email;
  oracles::PathGenerator gen(0xacce5506);
  int job_counter = 0;
  int user_counter = 0;

  while (ops < 994) {
    const auto roll = gen.uniform(0, 99);
    if (roll < 12) {
      const std::string name = "u-" + std::to_string(user_counter++);
      play(1, [&] {
        (void)s.ids.ensure_shadow_account(name, identity::PrincipalKind::service_account_user,
                                          system.ctx());
      });
    } else if (roll < 20) {
      play(1, [&] {
        (void)s.ids.rotate_key("helen@gserviceaccount.com", system.ctx());
      });
    } else if (roll < 30) {
      const bool member = s.ids.is_member(group, "guest@x");
      if (gen.coin()) {
        play(member ? 0 : 1, [&] { (void)s.ids.add_member(group, "guest@x", system.ctx()); });
      } else {
        play(member ? 1 : 0, [&] { (void)s.ids.remove_member(group, "guest@x", system.ctx()); });
      }
    } else if (roll < 45) {
      // audited read check: one event whether allowed or denied
      const std::string who = gen.coin() ? "helen@gserviceaccount.com" : "stranger@x";
      play(1, [&] {
        (void)s.cloud.check_access(who, "projects/pa/datasets/d", sim::AccessAction::read,
                                   &s.ids, system.ctx());
      });
    } else if (roll < 50) {
      // administer checks are not audited
      play(0, [&] {
        (void)s.cloud.check_access("stranger@x", "projects/pa/datasets/d",
                                   sim::AccessAction::administer, &s.ids, system.ctx());
      });
    } else if (roll < 65) {
      play(1, [&] {
        (void)s.cloud.table_operation("projects/pa/datasets/d/tables/t",
                                      sim::TableOpKind::data_write, gen.coin(), system.ctx());
      });
    } else if (roll < 75) {
      play(1, [&] {
        (void)s.cloud.record_api_call("helen", "pa", sim::ApiCallKind::read_rows, system.ctx());
      });
    } else if (roll < 85) {
      const std::string job = "job-" + std::to_string(job_counter++);
      play(1, [&] {
        (void)s.pool.schedule({job, "pa", 10, slots::JobKind::query, 0}, system.ctx());
      });
    } else {
      // complete the oldest running job, if any
      std::string victim;
      for (const auto& [id, job] : s.pool.jobs()) {
        if (job.state == slots::JobState::running) {
          victim = id;
          break;
        }
      }
      if (victim.empty()) continue;
      play(1, [&] { (void)s.pool.complete(victim, gen.coin(), system.ctx()); });
    }
  }
  // top up to exactly 1000 ops with audited creations
  while (ops < 1000) {
    const std::string name = "pad-" + std::to_string(ops);
    play(1, [&] { (void)s.cloud.create_project(name, {}, system.ctx()); });
  }

  check.expect(ops == 1000, "exactly 1000 scripted operations");
  check.expect(deltas_ok, "every operation produced exactly its predicted events");
  check.expect(sink.events().size() == predicted, "event count equals the replay prediction");
  bool dense = true;
  for (std::size_t i = 0; i < sink.events().size(); ++i) {
    if (sink.events()[i].sequence != i + 1) dense = false;
  }
  check.expect(dense, "sequence numbers are dense 1..N");

  // snapshot/restore plus log re-read yield identical events
  check.expect(system.save_state(state_path).ok(), "state snapshot saves");
  audit::Sink reread;
  check.expect(reread.open(audit_path).ok(), "audit log re-opens");
  check.expect(reread.events() == sink.events(), "re-read events identical");

  System restored(config, &sink);
  check.expect(restored.load_state(state_path).ok(), "state restores");
  check.expect(restored.snapshot_string() == system.snapshot_string(),
               "snapshot identical after restore");

  std::filesystem::remove(audit_path);
  std::filesystem::remove(state_path);
}

// ---------------------------------------------------------------------------
// 7. Observability correctness
// ---------------------------------------------------------------------------

void criterion_observability(Check& check) {
  Config config;
  config.collector.poll_interval = 600;
  config.collector.cooldown_polls = 3;
  obs::AlertRule rule;
  rule.name = "live-jobs";
  rule.metric = obs::MetricName::current_total_jobs;
  rule.comparator = obs::Comparator::ge;
  rule.threshold = 20;
  rule.pager = "oncall";
  config.alerts = {rule};

  System system(config);
  auto& s = system.state();
  (void)s.pool.init(20000, system.ctx());
  (void)s.pool.carve("lane", 4000, config.naming.load_project, system.ctx());
  (void)s.cloud.create_project(config.naming.load_project, {}, system.ctx());
  (void)s.cloud.create_project("pa", {}, system.ctx());
  (void)s.cloud.create_project("pb", {}, system.ctx());
  (void)s.cloud.create_dataset("pa", "d", system.ctx());
  (void)s.cloud.bind("projects/pa/datasets/d", "loader", sim::Role::writer, system.ctx());

  oracles::PathGenerator gen(0xacce5507);
  int jobs = 0;
  while (jobs < 500) {
    // jobs arrive in bursts between clock advances
    const int burst = static_cast<int>(gen.uniform(1, 12));
    for (int b = 0; b < burst && jobs < 500; ++b, ++jobs) {
      if (gen.uniform(0, 9) < 7) {
        (void)s.pool.schedule({"j" + std::to_string(jobs), gen.coin() ? "pa" : "pb",
                               static_cast<std::int64_t>(gen.uniform(1, 800)),
                               gen.coin() ? slots::JobKind::query : slots::JobKind::analytics,
                               static_cast<Duration>(gen.uniform(30, 4000))},
                              system.ctx());
      } else {
        ingest::SubmitOptions options;
        options.submitter = "loader";
        options.duration = static_cast<Duration>(gen.uniform(30, 4000));
        (void)system.load_submit(
            ingest::Tool::dataflow,
            {"user.h.dp.twitter.domain", "k" + std::to_string(jobs)}, "pa", "d", "t",
            ingest::Format::lzo, options, "loader");
      }
    }
    // occasionally fail a running job, slot- or transfer-side
    if (gen.uniform(0, 4) == 0) {
      for (const auto& [id, job] : s.pool.jobs()) {
        if (job.state == slots::JobState::running) {
          (void)s.pool.complete(id, true, system.ctx());
          break;
        }
      }
    }
    if (gen.uniform(0, 5) == 0) {
      for (const auto& [id, job] : s.load.jobs()) {
        if (job.state == slots::JobState::running) {
          (void)s.load.fail_job(id, system.ctx());
          break;
        }
      }
    }
    (void)system.advance_clock(static_cast<Duration>(gen.uniform(60, 1800)));
  }
  (void)system.advance_clock(6000);

  const oracles::MetricOracle oracle{s.pool, s.load, s.cloud};
  std::size_t points = 0;
  std::size_t mismatches = 0;
  for (const auto& [key, series] : s.collector.series()) {
    for (const auto& point : series.points) {
      ++points;
      if (point.value != oracle.point_value(series, point.ts)) ++mismatches;
    }
  }
  check.expect(points > 500, "a meaningful number of points was collected");
  check.expect(mismatches == 0, "every metric point equals the brute-force aggregation (" +
                                    std::to_string(mismatches) + " mismatches in " +
                                    std::to_string(points) + ")");

  // alert firings equal an independent replay with cooldown
  const auto* heartbeat = s.collector.find_series(obs::MetricName::current_total_jobs, {});
  check.expect(heartbeat != nullptr, "heartbeat series exists");
  std::vector<Timestamp> poll_times;
  for (const auto& p : heartbeat->points) poll_times.push_back(p.ts);
  const auto replay =
      oracles::replay_alerts(s.collector.series(), config.alerts, poll_times,
                             config.collector.cooldown_polls * config.collector.poll_interval);
  check.expect(replay == s.collector.firings(),
               "alert firings match the reference replay (got " +
                   std::to_string(s.collector.firings().size()) + ", replay " +
                   std::to_string(replay.size()) + ")");
  check.expect(!s.collector.firings().empty(), "the workload actually fired alerts");
}

// ---------------------------------------------------------------------------
// 8. Watchdog attribution
// ---------------------------------------------------------------------------

void criterion_watchdog(Check& check) {
  const Timestamp now = 1000000;
  const ingest::WatchdogThresholds thresholds{3600, 7200};
  oracles::PathGenerator gen(0xacce5508);

  std::vector<ingest::DatasetStatus> corpus;
  std::set<std::string> expected_repl;
  std::set<std::string> expected_load;

  for (int i = 0; i < 100; ++i) {
    ingest::DatasetStatus s;
    s.logical_path = "gcs/user/corpus/" + std::to_string(i);
    if (i < 4) {  // stuck before replication
      s.exists_hdfs = true;
      s.last_changed_hdfs = now - thresholds.hdfs_to_gcs * 2 -
                            static_cast<Timestamp>(gen.uniform(0, 1000));
      expected_repl.insert(s.logical_path);
    } else if (i < 7) {  // stuck before the warehouse
      s.exists_hdfs = true;
      s.last_changed_hdfs = now - 100;
      s.exists_gcs = true;
      s.last_changed_gcs = now - thresholds.gcs_to_bq * 2 -
                           static_cast<Timestamp>(gen.uniform(0, 1000));
      expected_load.insert(s.logical_path);
    } else if (i % 3 == 0) {  // fully replicated
      s.exists_hdfs = s.exists_gcs = s.exists_bq = true;
      s.last_changed_hdfs = now - static_cast<Timestamp>(gen.uniform(0, 100000));
      s.last_changed_gcs = now - static_cast<Timestamp>(gen.uniform(0, 100000));
      s.last_changed_bq = now - static_cast<Timestamp>(gen.uniform(0, 100000));
    } else if (i % 3 == 1) {  // young upload, not yet replicated
      s.exists_hdfs = true;
      s.last_changed_hdfs = now - static_cast<Timestamp>(gen.uniform(0, thresholds.hdfs_to_gcs));
    } else {  // replicated, recently changed, warehouse pending but fresh
      s.exists_hdfs = true;
      s.last_changed_hdfs = now - 50;
      s.exists_gcs = true;
      s.last_changed_gcs = now - static_cast<Timestamp>(gen.uniform(0, thresholds.gcs_to_bq));
    }
    corpus.push_back(s);
  }

  const auto findings = ingest::watchdog_scan(corpus, now, thresholds);
  check.expect(findings.size() == 7, "exactly the 7 injected datasets are reported (got " +
                                         std::to_string(findings.size()) + ")");
  std::set<std::string> got_repl;
  std::set<std::string> got_load;
  for (const auto& f : findings) {
    (f.stage == ingest::Stage::hdfs_to_gcs ? got_repl : got_load).insert(f.logical_path);
  }
  check.expect(got_repl == expected_repl, "replication-stage attribution is exact");
  check.expect(got_load == expected_load, "warehouse-stage attribution is exact");
}

// ---------------------------------------------------------------------------
// 9. End-to-end determinism
// ---------------------------------------------------------------------------

void criterion_determinism(Check& check) {
  const auto scenario = [&](audit::Sink* sink) -> std::string {
    Config config;
    config.collector.poll_interval = 3600;
    System system(config, sink);
    auto& s = system.state();

    std::vector<provision::TenantSpec> tenants;
    for (int i = 0; i < 5; ++i) {
      tenants.push_back({"svc-" + std::to_string(i),
                         provision::TenantKind::service_account_user});
    }
    tenants.push_back({"events", provision::TenantKind::log_category});
    tenants.push_back({"clicks", provision::TenantKind::log_category});
    if (!system.reconcile(tenants, false).failed.empty()) return "reconcile failed";

    (void)s.pool.init(100000, system.ctx());
    (void)s.pool.carve("tweet_analyzer", 30000, "compute-a", system.ctx());
    (void)s.pool.schedule({"an-1", "compute-a", 30000, slots::JobKind::analytics, 2 * kDay},
                          system.ctx());
    (void)s.pool.schedule({"q-1", "compute-b", 500, slots::JobKind::query, 5 * 3600},
                          system.ctx());

    ingest::SubmitOptions options;
    options.duration = 3 * 3600;
    for (int i = 0; i < 5; ++i) {
      auto job = system.load_submit(
          ingest::Tool::blaster,
          {"user.svc-" + std::to_string(i) + ".dp.twitter.domain", "part-1.lzo"},
          "twitter-svc-" + std::to_string(i) + "-bq-project", "user", "events",
          ingest::Format::lzo, options, "svc-" + std::to_string(i) + "@gserviceaccount.com");
      if (!job.ok()) return "submit failed: " + job.error().message;
    }
    if (!system.advance_clock(30 * kDay).ok()) return "advance failed";
    return system.snapshot_string();
  };

  audit::Sink first_sink;
  const std::string first = scenario(&first_sink);
  const std::string second = scenario(nullptr);
  check.expect(first.size() > 1000, "scenario produced a real snapshot");
  check.expect(first == second, "two independent runs snapshot bit-identically");

  // four rotations per account over 30 days at the default 7-day interval
  std::map<std::string, int> rotations;
  for (const auto& e : first_sink.events()) {
    if (e.action == audit::Action::key_rotate && e.detail.count("op") > 0 &&
        e.detail.at("op") == "rotate") {
      ++rotations[e.resource];
    }
  }
  // 5 users + 2 log categories + 1 replication account
  check.expect(rotations.size() == 8, "every shadow account rotated (got " +
                                          std::to_string(rotations.size()) + ")");
  bool all_four = !rotations.empty();
  for (const auto& [account, n] : rotations) {
    if (n != 4) all_four = false;
  }
  check.expect(all_four, "exactly 4 rotations per account");
}

struct Criterion {
  int number;
  std::string title;
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "path mapping fidelity", criterion_paths},
      {2, "provisioning at desk scale", criterion_provisioning},
      {3, "quota threshold suite", criterion_quotas},
      {4, "slot arithmetic", criterion_slots},
      {5, "ingestion capability fidelity", criterion_capability_matrix},
      {6, "audit completeness", criterion_audit},
      {7, "observability correctness", criterion_observability},
      {8, "watchdog attribution", criterion_watchdog},
      {9, "end-to-end determinism", criterion_determinism},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    criterion.body(check);
    const double elapsed = seconds_since(start);
    if (check.failures == 0) {
      std::printf("criterion %d: PASS — %s (%.2fs)\n", criterion.number,
                  criterion.title.c_str(), elapsed);
    } else {
      ++failed;
      std::printf("criterion %d: FAIL — %s (%.2fs)\n", criterion.number,
                  criterion.title.c_str(), elapsed);
      for (const auto& note : check.notes) {
        std::printf("    failed: %s\n", note.c_str());
      }
    }
  }
  if (failed == 0) {
    std::printf("all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("%d criteria FAILED\n", failed);
  }
  return failed;
}
