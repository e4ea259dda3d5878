#pragma once

#include <string>
#include <vector>

#include "bigbird/common.hpp"
#include "bigbird/identity.hpp"
#include "bigbird/ingestion.hpp"
#include "bigbird/observability.hpp"
#include "bigbird/provisioner.hpp"

namespace bigbird {

// Flat `key = value` text format, one key per line, `#` comments. Every key
// has a default; absent keys keep it. Values below are the shipped limit
// table and naming scheme.
struct Config {
  identity::IdentityConfig identity;
  provision::NamingPolicy naming;
  sim::QuotaTable quota;
  obs::CollectorConfig collector;
  std::vector<obs::AlertRule> alerts;
  ingest::WatchdogThresholds watchdog;

  Duration load_job_duration = 300;
  std::int64_t load_job_slots = 40;
  std::int64_t total_slots = 100000;
  bool audit_denied = true;
  std::string audit_log_path = "bigbird-audit.ndjson";
  std::string state_path = "bigbird-state.json";

  bool operator==(const Config&) const = default;
};

Result<Config> parse_config(const std::string& text);
Result<Config> load_config_file(const std::string& path);

// Canonical form: parse(serialize(c)) == c.
std::string serialize_config(const Config& c);

}  // namespace bigbird
