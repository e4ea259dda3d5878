#include "bigbird/cloudsim.hpp"

#include "doctest.h"

using namespace bigbird;
using sim::ApiCallKind;
using sim::CloudSim;
using sim::TableOpKind;

namespace {

OpContext at(Timestamp t) { return OpContext{t, nullptr, "system"}; }

CloudSim with_table() {
  CloudSim cloud;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  REQUIRE(cloud.create_dataset("p", "d", at(0)).ok());
  REQUIRE(cloud.create_table("p", "d", "t", 4, false, at(0)).ok());
  return cloud;
}

}  // namespace

TEST_CASE("the shipped rule table is exactly the ten limits") {
  const auto rules = sim::quota_rules(sim::QuotaTable{});
  REQUIRE(rules.size() == 10);
  const auto find = [&](std::string_view name) -> const sim::QuotaRule& {
    for (const auto& r : rules) {
      if (r.name == name) return r;
    }
    REQUIRE_MESSAGE(false, "missing rule " << name);
    return rules[0];
  };
  CHECK(find("datasets-per-project").limit == 1000);
  CHECK(find("datasets-per-project").behavior == "warn");
  CHECK(find("authorized-views-per-dataset").limit == 2500);
  CHECK(find("authorized-views-per-dataset").behavior == "reject");
  CHECK(find("columns-per-table").limit == 10000);
  CHECK(find("table-ops-per-day").limit == 1000);
  CHECK(find("table-ops-per-day").window == "per-day");
  CHECK(find("table-metadata-rate").limit == 5);
  CHECK(find("table-metadata-rate").window == "per-10-seconds");
  CHECK(find("read-rows-per-minute").limit == 5000);
  CHECK(find("read-rows-per-minute").scope_kind == "user-project");
  CHECK(find("storage-api-per-minute").limit == 1000);
  CHECK(find("streaming-rps").limit == 10000000);
  CHECK(find("streaming-rps").window == "per-second");
  CHECK(find("load-jobs-per-day").limit == 100000);
  CHECK(find("concurrent-load-jobs").limit == 50);
  CHECK(find("concurrent-load-jobs").behavior == "queue");
}

TEST_CASE("metadata rate: five per fixed 10-second window, reset at the boundary") {
  CloudSim cloud = with_table();
  const std::string table = "projects/p/datasets/d/tables/t";
  for (int i = 0; i < 5; ++i) {
    REQUIRE(cloud.table_operation(table, TableOpKind::metadata, false, at(0)).ok());
  }
  auto sixth = cloud.table_operation(table, TableOpKind::metadata, false, at(9));
  REQUIRE_FALSE(sixth.ok());
  CHECK(sixth.error().code == Errc::quota_exceeded);
  CHECK(sixth.error().message.find("table-metadata-rate") != std::string::npos);

  // the next fixed window admits again
  REQUIRE(cloud.table_operation(table, TableOpKind::metadata, false, at(10)).ok());
}

TEST_CASE("table ops per day count downstream failures") {
  CloudSim cloud = with_table();
  cloud.quota.table_ops_per_day = 20;  // scaled via the configurable table
  const std::string table = "projects/p/datasets/d/tables/t";
  REQUIRE(cloud.table_operation(table, TableOpKind::data_write, /*downstream_failure=*/true,
                                at(0))
              .ok());
  for (int i = 0; i < 19; ++i) {
    REQUIRE(cloud.table_operation(table, TableOpKind::data_write, false, at(1 + i)).ok());
  }
  auto over = cloud.table_operation(table, TableOpKind::data_write, false, at(100));
  REQUIRE_FALSE(over.ok());
  CHECK(over.error().message.find("table-ops-per-day") != std::string::npos);

  // next day's window is fresh
  REQUIRE(cloud.table_operation(table, TableOpKind::data_write, false, at(kDay)).ok());
}

TEST_CASE("windows are tumbling and aligned to epoch boundaries, not to first use") {
  CloudSim cloud = with_table();
  cloud.quota.table_ops_per_day = 1;
  const std::string table = "projects/p/datasets/d/tables/t";
  // one op just before the day boundary fills that day's window
  REQUIRE(cloud.table_operation(table, TableOpKind::data_write, false, at(kDay - 1)).ok());
  REQUIRE_FALSE(cloud.table_operation(table, TableOpKind::data_write, false, at(kDay - 1)).ok());
  // one second later a fresh window opens: the window did not slide from
  // the first operation
  REQUIRE(cloud.table_operation(table, TableOpKind::data_write, false, at(kDay)).ok());
}

TEST_CASE("per-minute api quotas are scoped per user and project") {
  CloudSim cloud;
  cloud.quota.read_rows_calls_per_minute = 5;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  REQUIRE(cloud.create_project("q", {}, at(0)).ok());
  for (int i = 0; i < 5; ++i) {
    REQUIRE(cloud.record_api_call("alice", "p", ApiCallKind::read_rows, at(i)).ok());
  }
  auto over = cloud.record_api_call("alice", "p", ApiCallKind::read_rows, at(30));
  REQUIRE_FALSE(over.ok());
  CHECK(over.error().code == Errc::quota_exceeded);

  // same project, different user: full budget
  for (int i = 0; i < 5; ++i) {
    REQUIRE(cloud.record_api_call("bob", "p", ApiCallKind::read_rows, at(30 + i)).ok());
  }
  // same user, different project: full budget
  REQUIRE(cloud.record_api_call("alice", "q", ApiCallKind::read_rows, at(31)).ok());
  // next minute window resets
  REQUIRE(cloud.record_api_call("alice", "p", ApiCallKind::read_rows, at(60)).ok());
}

TEST_CASE("other storage api calls have their own per-minute budget") {
  CloudSim cloud;
  cloud.quota.storage_api_calls_per_minute = 3;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  for (int i = 0; i < 3; ++i) {
    REQUIRE(cloud.record_api_call("alice", "p", ApiCallKind::other_storage_api, at(0)).ok());
  }
  auto over = cloud.record_api_call("alice", "p", ApiCallKind::other_storage_api, at(59));
  REQUIRE_FALSE(over.ok());
  CHECK(over.error().message.find("storage-api-per-minute") != std::string::npos);
  // read-rows budget is unaffected
  REQUIRE(cloud.record_api_call("alice", "p", ApiCallKind::read_rows, at(59)).ok());
}

TEST_CASE("streaming inserts run against a scaled per-second project limit") {
  CloudSim cloud;
  cloud.quota.streaming_rps_per_project = 4;  // desk-scale limit, same code path
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  for (int i = 0; i < 4; ++i) {
    REQUIRE(cloud.record_api_call("svc", "p", ApiCallKind::streaming_insert, at(7)).ok());
  }
  auto over = cloud.record_api_call("svc", "p", ApiCallKind::streaming_insert, at(7));
  REQUIRE_FALSE(over.ok());
  CHECK(over.error().message.find("streaming-rps") != std::string::npos);
  REQUIRE(cloud.record_api_call("svc", "p", ApiCallKind::streaming_insert, at(8)).ok());
}

TEST_CASE("dataset count beyond the limit warns but succeeds") {
  CloudSim cloud;
  cloud.quota.datasets_per_project = 3;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  for (int i = 0; i < 3; ++i) {
    auto r = cloud.create_dataset("p", "d" + std::to_string(i), at(0));
    REQUIRE(r.ok());
    CHECK_FALSE(r.value().degradation_warning);
  }
  auto fourth = cloud.create_dataset("p", "d3", at(5));
  REQUIRE(fourth.ok());
  CHECK(fourth.value().degradation_warning);
  REQUIRE(cloud.warnings().size() == 1);
  CHECK(cloud.warnings()[0].rule == "datasets-per-project");
  CHECK(cloud.warnings()[0].at == 5);
}

TEST_CASE("table count beyond the degradation threshold warns but succeeds") {
  CloudSim cloud;
  cloud.quota.tables_per_dataset = 2;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  REQUIRE(cloud.create_dataset("p", "d", at(0)).ok());
  REQUIRE_FALSE(cloud.create_table("p", "d", "t1", 1, false, at(0)).value().degradation_warning);
  REQUIRE_FALSE(cloud.create_table("p", "d", "t2", 1, false, at(0)).value().degradation_warning);
  auto third = cloud.create_table("p", "d", "t3", 1, false, at(0));
  REQUIRE(third.ok());
  CHECK(third.value().degradation_warning);
}

TEST_CASE("authorized views reject on the threshold, plain views do not count") {
  CloudSim cloud;
  cloud.quota.authorized_views_per_dataset = 2;
  REQUIRE(cloud.create_project("p", {}, at(0)).ok());
  REQUIRE(cloud.create_dataset("p", "d", at(0)).ok());
  REQUIRE(cloud.create_dataset("p", "backing", at(0)).ok());
  const std::string backing = "projects/p/datasets/backing";
  REQUIRE(cloud.create_view("p", "d", "v1", backing, true, at(0)).ok());
  REQUIRE(cloud.create_view("p", "d", "v2", backing, true, at(0)).ok());
  auto third = cloud.create_view("p", "d", "v3", backing, true, at(0));
  REQUIRE_FALSE(third.ok());
  CHECK(third.error().code == Errc::quota_exceeded);
  // unauthorized views are not limited by this rule
  REQUIRE(cloud.create_view("p", "d", "v4", backing, false, at(0)).ok());
}

TEST_CASE("load jobs per day charge the project window") {
  CloudSim cloud;
  cloud.quota.load_jobs_per_project_per_day = 3;
  REQUIRE(cloud.create_project("loadp", {}, at(0)).ok());
  for (int i = 0; i < 3; ++i) REQUIRE(cloud.charge_load_job("loadp", 100).ok());
  auto over = cloud.charge_load_job("loadp", 20000);
  REQUIRE_FALSE(over.ok());
  CHECK(over.error().message.find("load-jobs-per-day") != std::string::npos);
  REQUIRE(cloud.charge_load_job("loadp", kDay).ok());  // next day admits
}

TEST_CASE("quota status reports counters for a scope") {
  CloudSim cloud = with_table();
  const std::string table = "projects/p/datasets/d/tables/t";
  REQUIRE(cloud.table_operation(table, TableOpKind::metadata, false, at(0)).ok());
  bool found = false;
  for (const auto& row : cloud.quota_status(table)) {
    if (row.rule == "table-metadata-rate") {
      found = true;
      CHECK(row.count == 1);
      CHECK(row.limit == 5);
    }
  }
  CHECK(found);
}
