#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bigbird/http_api.hpp"
#include "bigbird/system.hpp"
#include "json.hpp"

namespace {

using namespace bigbird;
using ordered_json = nlohmann::ordered_json;

int exit_code_for(const Error& e) {
  switch (e.code) {
    case Errc::malformed_path:
    case Errc::foreign_bucket:
    case Errc::owner_name_unmappable:
    case Errc::config_invalid:
      return 2;
    case Errc::version_mismatch:
    case Errc::corrupt_snapshot:
      return 3;
    default:
      return 1;
  }
}

int fail(const Error& e) {
  std::cerr << "error: " << errc_name(e.code) << ": " << e.message << "\n";
  return exit_code_for(e);
}

struct CliOptions {
  std::string config_path;
  std::string format = "text";
  std::string principal = "system";
};

bool json_output(const CliOptions& o) { return o.format == "json"; }

// Loads config (explicit flag, then BIGBIRD_CONFIG, then ./bigbird.conf if
// present, then built-in defaults) and brings up the system with persisted
// state when the state file exists.
Result<Config> resolve_config(const CliOptions& options) {
  std::string path = options.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("BIGBIRD_CONFIG"); env != nullptr) path = env;
  }
  if (path.empty() && std::filesystem::exists("bigbird.conf")) path = "bigbird.conf";
  if (path.empty()) return Config{};
  return load_config_file(path);
}

struct Session {
  Config config;
  audit::Sink sink;
  std::optional<System> system;

  Status open(const CliOptions& options) {
    auto cfg = resolve_config(options);
    if (!cfg) return cfg.error();
    config = std::move(cfg.value());
    if (auto r = sink.open(config.audit_log_path); !r) return r;
    system.emplace(config, &sink);
    if (std::filesystem::exists(config.state_path)) {
      if (auto r = system->load_state(config.state_path); !r) return r;
    }
    return ok_status();
  }

  Status save() { return system->save_state(config.state_path); }
};

void print_report(const provision::ReconcileReport& report, bool as_json) {
  if (as_json) {
    ordered_json j;
    const auto tenants_json = [](const std::vector<provision::TenantOutcome>& list) {
      ordered_json arr = ordered_json::array();
      for (const auto& t : list) {
        arr.push_back({{"tenant", t.tenant},
                       {"created", t.created},
                       {"unchanged", t.unchanged},
                       {"error", t.error}});
      }
      return arr;
    };
    j["created"] = tenants_json(report.created);
    j["unchanged"] = tenants_json(report.unchanged);
    j["failed"] = tenants_json(report.failed);
    std::cout << j.dump(2) << "\n";
    return;
  }
  for (const auto& t : report.created) {
    for (const auto& id : t.created) std::cout << "CREATED " << id << "\n";
  }
  for (const auto& t : report.unchanged) {
    for (const auto& id : t.unchanged) std::cout << "UNCHANGED " << id << "\n";
  }
  for (const auto& t : report.failed) {
    std::cout << "FAILED " << t.tenant << " (" << t.error << ")\n";
  }
  std::cout << "tenants: " << report.created.size() << " created, " << report.unchanged.size()
            << " unchanged, " << report.failed.size() << " failed\n";
}

Result<std::vector<std::string>> split_dest(const std::string& dest) {
  std::vector<std::string> parts = split(dest, '.');
  if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty()) {
    return Error{Errc::config_invalid, "--dest must be <project>.<dataset>.<table>"};
  }
  return parts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bigbird - big data storage control plane"};
  app.require_subcommand(1);
  CliOptions options;
  app.add_option("--config", options.config_path, "configuration file path");
  app.add_option("--format", options.format, "output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--as", options.principal, "principal recorded for this invocation");

  // ---- path ----------------------------------------------------------------
  auto* path_cmd = app.add_subcommand("path", "path mapping");
  std::string path_arg;
  std::string suffix = std::string(paths::kDefaultDomainSuffix);
  auto* path_map = path_cmd->add_subcommand("map", "on-prem path to logical and bucket forms");
  path_map->add_option("path", path_arg, "on-prem path")->required();
  path_map->add_option("--suffix", suffix, "bucket domain suffix");
  auto* path_unmap = path_cmd->add_subcommand("unmap", "bucket URI to logical form");
  path_unmap->add_option("uri", path_arg, "gs:// URI")->required();
  path_unmap->add_option("--suffix", suffix, "bucket domain suffix");

  // ---- identity / group ----------------------------------------------------
  auto* identity_cmd = app.add_subcommand("identity", "identity management");
  std::string identity_name;
  std::string identity_kind = "service_account_user";
  auto* identity_ensure = identity_cmd->add_subcommand("ensure", "ensure a shadow account");
  identity_ensure->add_option("name", identity_name, "unix name")->required();
  identity_ensure->add_option("--kind", identity_kind, "principal kind");
  auto* identity_rotate = identity_cmd->add_subcommand("rotate", "rotate a shadow key");
  identity_rotate->add_option("shadow-email", identity_name, "shadow account email")->required();

  auto* group_cmd = app.add_subcommand("group", "reader group membership");
  std::string group_email;
  std::string group_principal;
  auto* group_add = group_cmd->add_subcommand("add", "add a member");
  group_add->add_option("group", group_email)->required();
  group_add->add_option("principal", group_principal)->required();
  auto* group_remove = group_cmd->add_subcommand("remove", "remove a member");
  group_remove->add_option("group", group_email)->required();
  group_remove->add_option("principal", group_principal)->required();

  // ---- sim -------------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("sim", "simulated provider inspection");
  auto* sim_dump = sim_cmd->add_subcommand("dump", "dump the resource tree");
  std::string quota_scope;
  auto* sim_quota = sim_cmd->add_subcommand("quota-status", "counters for a scope");
  sim_quota->add_option("scope", quota_scope, "resource id or user|project key")->required();

  // ---- provision -------------------------------------------------------------
  auto* provision_cmd = app.add_subcommand("provision", "reconcile the tenant list");
  std::string tenants_path;
  bool dry_run = false;
  provision_cmd->add_option("--tenants", tenants_path, "tenant list file")->required();
  provision_cmd->add_flag("--dry-run", dry_run, "print the diff without mutating");

  auto* precondition_cmd = app.add_subcommand("precondition", "run the ensure-phase only");
  std::string pre_kind;
  std::string pre_name;
  precondition_cmd->add_option("kind", pre_kind, "user|log")->required();
  precondition_cmd->add_option("name", pre_name, "tenant name")->required();

  // ---- load ------------------------------------------------------------------
  auto* load_cmd = app.add_subcommand("load", "warehouse ingestion");
  auto* load_submit = load_cmd->add_subcommand("submit", "submit a transfer job");
  std::string load_tool;
  std::string load_src;
  std::string load_dest;
  std::string load_format;
  bool load_partitioned = false;
  std::string load_backfill;
  std::int64_t load_duration = 0;
  load_submit->add_option("--tool", load_tool, "blaster|bid|dataflow")->required();
  load_submit->add_option("--src", load_src, "gs:// source URI")->required();
  load_submit->add_option("--dest", load_dest, "<project>.<dataset>.<table>")->required();
  load_submit->add_option("--format", load_format, "parquet|lzo|csv|tsv")->required();
  load_submit->add_flag("--partitioned", load_partitioned, "partitioned destination");
  load_submit->add_option("--backfill", load_backfill, "historical range <from>..<to>");
  load_submit->add_option("--duration", load_duration, "simulated duration seconds");
  auto* load_tick = load_cmd->add_subcommand("tick", "advance the load queue");
  std::int64_t tick_until = -1;
  load_tick->add_option("--until", tick_until, "advance the clock to this timestamp first");

  // ---- watchdog ----------------------------------------------------------------
  auto* watchdog_cmd = app.add_subcommand("watchdog", "pipeline latency scanner");
  std::string statuses_path;
  auto* watchdog_load = watchdog_cmd->add_subcommand("load", "ingest dataset status records");
  watchdog_load->add_option("file", statuses_path, "NDJSON status file")->required();
  auto* watchdog_scan = watchdog_cmd->add_subcommand("scan", "report stuck datasets");
  std::string thresholds_arg;
  watchdog_scan->add_option("--thresholds", thresholds_arg, "seconds as <t1>,<t2>");

  // ---- slots -------------------------------------------------------------------
  auto* slots_cmd = app.add_subcommand("slots", "slot capacity management");
  std::int64_t slot_count = -1;
  std::string reservation_name;
  std::string reservation_project;
  auto* slots_init = slots_cmd->add_subcommand("init", "initialize the pool");
  slots_init->add_option("total", slot_count, "total slots (default from config)");
  auto* slots_carve = slots_cmd->add_subcommand("carve", "carve a dedicated reservation");
  slots_carve->add_option("name", reservation_name)->required();
  slots_carve->add_option("slots", slot_count)->required();
  slots_carve->add_option("--project", reservation_project, "project assigned to it");
  auto* slots_release = slots_cmd->add_subcommand("release", "release a reservation");
  slots_release->add_option("name", reservation_name)->required();
  auto* slots_purchase = slots_cmd->add_subcommand("purchase", "purchase extra slots");
  slots_purchase->add_option("extra", slot_count)->required();
  auto* slots_status = slots_cmd->add_subcommand("status", "print pool status");

  // ---- metrics / alerts / audit ---------------------------------------------
  auto* metrics_cmd = app.add_subcommand("metrics", "metric series");
  auto* metrics_dump = metrics_cmd->add_subcommand("dump", "print collected series");
  std::string metric_filter;
  std::string project_filter;
  metrics_dump->add_option("--metric", metric_filter, "metric name filter");
  metrics_dump->add_option("--project", project_filter, "project dimension filter");

  auto* alerts_cmd = app.add_subcommand("alerts", "alerting");
  auto* alerts_eval = alerts_cmd->add_subcommand("eval", "evaluate alert rules now");

  auto* audit_cmd = app.add_subcommand("audit", "audit log");
  auto* audit_query = audit_cmd->add_subcommand("query", "filter audit events");
  std::string audit_principal;
  std::string audit_action;
  std::int64_t audit_from = -1;
  std::int64_t audit_to = -1;
  audit_query->add_option("--principal", audit_principal);
  audit_query->add_option("--action", audit_action);
  audit_query->add_option("--from", audit_from, "timestamp lower bound");
  audit_query->add_option("--to", audit_to, "timestamp upper bound");

  // ---- clock / state / serve ---------------------------------------------------
  auto* clock_cmd = app.add_subcommand("clock", "virtual clock");
  auto* clock_advance = clock_cmd->add_subcommand("advance", "move the clock forward");
  std::int64_t advance_secs = 0;
  std::int64_t advance_days = 0;
  clock_advance->add_option("seconds", advance_secs, "seconds to advance");
  clock_advance->add_option("--days", advance_days, "days to advance");
  auto* clock_show = clock_cmd->add_subcommand("show", "print the current virtual time");

  auto* state_cmd = app.add_subcommand("state", "state persistence");
  std::string state_path_arg;
  auto* state_snapshot = state_cmd->add_subcommand("snapshot", "write a snapshot");
  state_snapshot->add_option("path", state_path_arg, "target path (default: state_path)");
  auto* state_restore = state_cmd->add_subcommand("restore", "restore from a snapshot");
  state_restore->add_option("path", state_path_arg, "source path")->required();

  auto* serve_cmd = app.add_subcommand("serve", "read-only admin API");
  std::string listen_addr = "127.0.0.1:8080";
  serve_cmd->add_option("--listen", listen_addr, "host:port");

  CLI11_PARSE(app, argc, argv);

  // Pure path commands need no state.
  if (path_map->parsed() || path_unmap->parsed()) {
    if (path_map->parsed()) {
      auto parsed = paths::parse_onprem(path_arg);
      if (!parsed) return fail(parsed.error());
      const paths::LogicalPath logical = paths::to_logical(parsed.value());
      auto physical = paths::to_physical(logical, suffix);
      if (!physical) return fail(physical.error());
      if (json_output(options)) {
        ordered_json j{{"logical", logical.str()}, {"physical", physical.value().str()}};
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << logical.str() << "\n" << physical.value().str() << "\n";
      }
      return 0;
    }
    auto uri = paths::parse_gs_uri(path_arg);
    if (!uri) return fail(uri.error());
    auto logical = paths::from_physical(uri.value(), suffix);
    if (!logical) return fail(logical.error());
    if (json_output(options)) {
      std::cout << ordered_json{{"logical", logical.value().str()}}.dump(2) << "\n";
    } else {
      std::cout << logical.value().str() << "\n";
    }
    return 0;
  }

  Session session;
  if (auto r = session.open(options); !r) return fail(r.error());
  System& system = *session.system;
  const auto save_or_fail = [&]() -> int {
    if (auto r = session.save(); !r) return fail(r.error());
    return 0;
  };

  if (identity_ensure->parsed()) {
    const auto kind = identity::parse_principal_kind(identity_kind);
    if (!kind) return fail({Errc::config_invalid, "unknown kind " + identity_kind});
    auto id = system.state().ids.ensure_shadow_account(identity_name, *kind,
                                                       system.ctx(options.principal));
    if (!id) return fail(id.error());
    if (json_output(options)) {
      ordered_json j{{"unix_name", id.value().unix_name},
                     {"interactive_email", id.value().interactive_email},
                     {"shadow_email", id.value().shadow_email},
                     {"kind", std::string(identity::kind_name(id.value().kind))}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << id.value().shadow_email << "\n";
    }
    return save_or_fail();
  }
  if (identity_rotate->parsed()) {
    auto key = system.state().ids.rotate_key(identity_name, system.ctx(options.principal));
    if (!key) return fail(key.error());
    std::cout << key.value().key_id << "\n";
    return save_or_fail();
  }
  if (group_add->parsed() || group_remove->parsed()) {
    auto r = group_add->parsed()
                 ? system.state().ids.add_member(group_email, group_principal,
                                                 system.ctx(options.principal))
                 : system.state().ids.remove_member(group_email, group_principal,
                                                    system.ctx(options.principal));
    if (!r) return fail(r.error());
    return save_or_fail();
  }

  if (sim_dump->parsed()) {
    if (json_output(options)) {
      std::cout << system.state().cloud.to_json().dump(2) << "\n";
    } else {
      for (const auto& [id, node] : system.state().cloud.nodes()) {
        std::cout << sim::kind_name(node.kind) << " " << id;
        if (!node.labels.empty()) {
          std::cout << " [";
          bool first = true;
          for (const auto& [k, v] : node.labels) {
            std::cout << (first ? "" : ",") << k << "=" << v;
            first = false;
          }
          std::cout << "]";
        }
        std::cout << "\n";
      }
      for (const auto& b : system.state().cloud.bindings()) {
        std::cout << "binding " << b.resource << " " << sim::role_name(b.role) << " "
                  << b.principal << "\n";
      }
    }
    return 0;
  }
  if (sim_quota->parsed()) {
    ordered_json arr = ordered_json::array();
    for (const auto& row : system.state().cloud.quota_status(quota_scope)) {
      if (json_output(options)) {
        arr.push_back({{"rule", row.rule},
                       {"scope", row.scope},
                       {"window_start", row.window_start},
                       {"count", row.count},
                       {"limit", row.limit}});
      } else {
        std::cout << row.rule << " " << row.scope << " " << row.count << "/" << row.limit << "\n";
      }
    }
    if (json_output(options)) std::cout << arr.dump(2) << "\n";
    return 0;
  }

  if (provision_cmd->parsed()) {
    auto specs = provision::load_tenant_file(tenants_path);
    if (!specs) return fail(specs.error());
    const provision::ReconcileReport report = system.reconcile(specs.value(), dry_run);
    print_report(report, json_output(options));
    if (dry_run) return 0;
    if (auto r = session.save(); !r) return fail(r.error());
    return report.failed.empty() ? 0 : 1;
  }
  if (precondition_cmd->parsed()) {
    const auto kind = provision::parse_tenant_kind(pre_kind);
    if (!kind) return fail({Errc::config_invalid, "kind must be user or log"});
    const bool ok = system.precondition({pre_name, *kind});
    std::cout << (ok ? "true" : "false") << "\n";
    if (auto r = session.save(); !r) return fail(r.error());
    return ok ? 0 : 1;
  }

  if (load_submit->parsed()) {
    const auto tool = ingest::parse_tool(load_tool);
    if (!tool) return fail({Errc::config_invalid, "unknown tool " + load_tool});
    const auto format = ingest::parse_format(load_format);
    if (!format) return fail({Errc::config_invalid, "unknown format " + load_format});
    auto src = paths::parse_gs_uri(load_src);
    if (!src) return fail(src.error());
    auto dest = split_dest(load_dest);
    if (!dest) return fail(dest.error());
    ingest::SubmitOptions submit_options;
    submit_options.partitioned_dest = load_partitioned;
    submit_options.submitter = options.principal;
    if (load_duration > 0) submit_options.duration = load_duration;
    if (!load_backfill.empty()) {
      const std::size_t sep = load_backfill.find("..");
      if (sep == std::string::npos) {
        return fail({Errc::config_invalid, "--backfill must be <from>..<to>"});
      }
      try {
        submit_options.backfill =
            ingest::BackfillRange{std::stoll(load_backfill.substr(0, sep)),
                                  std::stoll(load_backfill.substr(sep + 2))};
      } catch (const std::exception&) {
        return fail({Errc::config_invalid, "bad --backfill timestamps"});
      }
    }
    auto job = system.load_submit(*tool, src.value(), dest.value()[0], dest.value()[1],
                                  dest.value()[2], *format, submit_options, options.principal);
    if (!job) return fail(job.error());
    std::cout << job.value() << "\n";
    return save_or_fail();
  }
  if (load_tick->parsed()) {
    if (tick_until >= 0) {
      const Duration delta = tick_until - system.state().now;
      if (delta < 0) return fail({Errc::config_invalid, "--until is in the past"});
      if (auto r = system.advance_clock(delta); !r) return fail(r.error());
    }
    auto transitions = system.load_tick();
    if (!transitions) return fail(transitions.error());
    for (const auto& t : transitions.value()) {
      std::cout << t.job_id << " -> " << slots::job_state_name(t.to) << " @" << t.at << "\n";
    }
    return save_or_fail();
  }

  if (watchdog_load->parsed()) {
    if (auto r = system.state().statuses.load_ndjson_file(statuses_path); !r) {
      return fail(r.error());
    }
    return save_or_fail();
  }
  if (watchdog_scan->parsed()) {
    std::optional<ingest::WatchdogThresholds> thresholds;
    if (!thresholds_arg.empty()) {
      const std::vector<std::string> parts = split(thresholds_arg, ',');
      if (parts.size() != 2) return fail({Errc::config_invalid, "--thresholds needs <t1>,<t2>"});
      try {
        thresholds = ingest::WatchdogThresholds{std::stoll(parts[0]), std::stoll(parts[1])};
      } catch (const std::exception&) {
        return fail({Errc::config_invalid, "bad threshold values"});
      }
    }
    ordered_json arr = ordered_json::array();
    for (const auto& f : system.watchdog_scan(thresholds)) {
      if (json_output(options)) {
        arr.push_back({{"logical_path", f.logical_path},
                       {"stage", std::string(ingest::stage_name(f.stage))},
                       {"stalled_for", f.stalled_for}});
      } else {
        std::cout << "STUCK " << ingest::stage_name(f.stage) << " " << f.logical_path
                  << " stalled " << f.stalled_for << "s\n";
      }
    }
    if (json_output(options)) std::cout << arr.dump(2) << "\n";
    return 0;
  }

  if (slots_init->parsed()) {
    const std::int64_t total = slot_count >= 0 ? slot_count : session.config.total_slots;
    if (auto r = system.state().pool.init(total, system.ctx(options.principal)); !r) {
      return fail(r.error());
    }
    return save_or_fail();
  }
  if (slots_carve->parsed()) {
    if (auto r = system.state().pool.carve(reservation_name, slot_count, reservation_project,
                                           system.ctx(options.principal));
        !r) {
      return fail(r.error());
    }
    return save_or_fail();
  }
  if (slots_release->parsed()) {
    if (auto r = system.state().pool.release(reservation_name, system.ctx(options.principal));
        !r) {
      return fail(r.error());
    }
    return save_or_fail();
  }
  if (slots_purchase->parsed()) {
    if (auto r = system.state().pool.purchase(slot_count, system.ctx(options.principal)); !r) {
      return fail(r.error());
    }
    return save_or_fail();
  }
  if (slots_status->parsed()) {
    const slots::PoolStatus s = system.state().pool.status();
    if (json_output(options)) {
      std::cout << system.state().pool.to_json().dump(2) << "\n";
    } else {
      std::cout << "total " << s.total << "\n";
      for (const auto& res : s.reservations) {
        std::cout << res.name << " capacity " << res.capacity << " free " << res.free()
                  << " queued " << res.queue.size() << "\n";
      }
      std::cout << "running " << s.running_jobs << " queued " << s.queued_jobs << "\n";
    }
    return 0;
  }

  if (metrics_dump->parsed()) {
    api::AdminServer reader(system);
    std::cout << reader.metrics_json(metric_filter, project_filter) << "\n";
    return 0;
  }
  if (alerts_eval->parsed()) {
    const auto firings = system.state().collector.evaluate_alerts(system.state().now);
    for (const auto& f : firings) {
      std::cout << "FIRING " << f.rule << " " << f.series_key << " value " << f.value << " -> "
                << f.pager << "\n";
    }
    return save_or_fail();
  }
  if (audit_query->parsed()) {
    audit::Sink::Filter filter;
    if (!audit_principal.empty()) filter.principal = audit_principal;
    if (!audit_action.empty()) {
      const auto a = audit::parse_action(audit_action);
      if (!a) return fail({Errc::config_invalid, "unknown action " + audit_action});
      filter.action = *a;
    }
    if (audit_from >= 0) filter.from = audit_from;
    if (audit_to >= 0) filter.to = audit_to;
    for (const auto& e : session.sink.query(filter)) {
      std::cout << audit::to_json_line(e) << "\n";
    }
    return 0;
  }

  if (clock_advance->parsed()) {
    const Duration delta = advance_secs + advance_days * kDay;
    if (auto r = system.advance_clock(delta); !r) return fail(r.error());
    std::cout << system.state().now << "\n";
    return save_or_fail();
  }
  if (clock_show->parsed()) {
    std::cout << system.state().now << "\n";
    return 0;
  }

  if (state_snapshot->parsed()) {
    const std::string target = state_path_arg.empty() ? session.config.state_path : state_path_arg;
    if (auto r = system.save_state(target); !r) return fail(r.error());
    std::cout << target << "\n";
    return 0;
  }
  if (state_restore->parsed()) {
    if (auto r = system.load_state(state_path_arg); !r) return fail(r.error());
    return save_or_fail();
  }

  if (serve_cmd->parsed()) {
    const std::size_t colon = listen_addr.rfind(':');
    if (colon == std::string::npos) return fail({Errc::config_invalid, "--listen needs host:port"});
    int port = 0;
    try {
      port = std::stoi(listen_addr.substr(colon + 1));
    } catch (const std::exception&) {
      return fail({Errc::config_invalid, "bad port"});
    }
    api::AdminServer server(system);
    std::cerr << "listening on " << listen_addr << "\n";
    if (auto r = server.serve(listen_addr.substr(0, colon), port); !r) return fail(r.error());
    return 0;
  }

  std::cerr << "error: no command\n";
  return 2;
}
