#include "bigbird/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace bigbird {

namespace {

std::string trim(std::string_view s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const std::size_t last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

Error invalid(std::string_view key, std::string_view why) {
  return Error{Errc::config_invalid, std::string(key) + ": " + std::string(why)};
}

Result<std::int64_t> parse_int(std::string_view key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t n = std::stoll(value, &used);
    if (used != value.size()) return invalid(key, "not an integer: " + value);
    return n;
  } catch (const std::exception&) {
    return invalid(key, "not an integer: " + value);
  }
}

Result<bool> parse_bool(std::string_view key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  return Result<bool>(invalid(key, "expected true or false"));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// alert.<name> = <metric> <comparator> <threshold> <pager> [dim=value ...]
Result<obs::AlertRule> parse_alert_rule(const std::string& name, const std::string& value) {
  std::istringstream in(value);
  std::string metric_token;
  std::string cmp_token;
  std::string threshold_token;
  std::string pager;
  if (!(in >> metric_token >> cmp_token >> threshold_token >> pager)) {
    return invalid("alert." + name, "expected '<metric> <cmp> <threshold> <pager> [dim=value]'");
  }
  obs::AlertRule rule;
  rule.name = name;
  const auto metric = obs::parse_metric(metric_token);
  if (!metric) return invalid("alert." + name, "unknown metric " + metric_token);
  rule.metric = *metric;
  const auto cmp = obs::parse_comparator(cmp_token);
  if (!cmp) return invalid("alert." + name, "unknown comparator " + cmp_token);
  rule.comparator = *cmp;
  try {
    rule.threshold = std::stod(threshold_token);
  } catch (const std::exception&) {
    return invalid("alert." + name, "bad threshold " + threshold_token);
  }
  rule.pager = pager;
  std::string dim;
  while (in >> dim) {
    const std::size_t eq = dim.find('=');
    if (eq == std::string::npos) return invalid("alert." + name, "bad dimension " + dim);
    rule.dim_filter[dim.substr(0, eq)] = dim.substr(eq + 1);
  }
  return rule;
}

std::string serialize_alert_rule(const obs::AlertRule& r) {
  std::string out = std::string(obs::metric_name(r.metric)) + " " +
                    std::string(obs::comparator_name(r.comparator)) + " " +
                    format_double(r.threshold) + " " + r.pager;
  for (const auto& [k, v] : r.dim_filter) out += " " + k + "=" + v;
  return out;
}

Status validate(const Config& c) {
  if (c.identity.rotation_interval <= 0) return invalid("rotation_interval_days", "must be positive");
  if (c.identity.grace_period <= 0) return invalid("grace_period_days", "must be positive");
  if (c.collector.poll_interval <= 0) return invalid("poll_interval_secs", "must be positive");
  if (c.collector.cooldown_polls < 0) return invalid("alert_cooldown_polls", "must be >= 0");
  if (c.watchdog.hdfs_to_gcs <= 0 || c.watchdog.gcs_to_bq <= 0) {
    return invalid("watchdog thresholds", "must be positive");
  }
  if (c.load_job_duration <= 0) return invalid("load_job_duration_secs", "must be positive");
  if (c.total_slots < 0) return invalid("total_slots", "must be >= 0");
  if (c.identity.gsuite_domain.empty() || c.identity.service_account_domain.empty()) {
    return invalid("identity domains", "must be non-empty");
  }
  if (c.naming.domain_suffix.empty()) return invalid("domain_suffix", "must be non-empty");
  const auto check_template = [&](std::string_view key, const std::string& tmpl) -> Status {
    const std::string rendered = provision::render_template(tmpl, "x0");
    if (!is_identifier(rendered)) return invalid(key, "renders an invalid project id: " + rendered);
    return ok_status();
  };
  if (auto r = check_template("user_project_template", c.naming.user_project_template); !r) return r;
  if (auto r = check_template("log_project_template", c.naming.log_project_template); !r) return r;
  for (const std::string& name :
       {c.naming.central_logs_project, c.naming.gcs_project, c.naming.load_project}) {
    if (!is_identifier(name)) return invalid("project name", "invalid project id: " + name);
  }
  if (!is_identifier(c.naming.replication_account)) {
    return invalid("replication_account", "must be [a-z0-9-]");
  }
  const std::string user_render = c.naming.render_user_project("same");
  const std::string log_render = c.naming.render_log_project("same");
  if (user_render == log_render) {
    return invalid("log_project_template", "must render distinct from user template");
  }
  return ok_status();
}

}  // namespace

Result<Config> parse_config(const std::string& text) {
  Config c;

  const std::map<std::string, std::function<Status(const std::string&)>> setters = {
      {"gsuite_domain", [&](const std::string& v) { c.identity.gsuite_domain = v; return ok_status(); }},
      {"service_account_domain",
       [&](const std::string& v) { c.identity.service_account_domain = v; return ok_status(); }},
      {"rotation_interval_days",
       [&](const std::string& v) -> Status {
         auto n = parse_int("rotation_interval_days", v);
         if (!n) return n.error();
         c.identity.rotation_interval = n.value() * kDay;
         return ok_status();
       }},
      {"grace_period_days",
       [&](const std::string& v) -> Status {
         auto n = parse_int("grace_period_days", v);
         if (!n) return n.error();
         c.identity.grace_period = n.value() * kDay;
         return ok_status();
       }},
      {"domain_suffix", [&](const std::string& v) { c.naming.domain_suffix = v; return ok_status(); }},
      {"user_project_template",
       [&](const std::string& v) { c.naming.user_project_template = v; return ok_status(); }},
      {"log_project_template",
       [&](const std::string& v) { c.naming.log_project_template = v; return ok_status(); }},
      {"central_logs_project",
       [&](const std::string& v) { c.naming.central_logs_project = v; return ok_status(); }},
      {"gcs_project", [&](const std::string& v) { c.naming.gcs_project = v; return ok_status(); }},
      {"load_project", [&](const std::string& v) { c.naming.load_project = v; return ok_status(); }},
      {"storage_label_key",
       [&](const std::string& v) { c.naming.storage_label_key = v; return ok_status(); }},
      {"storage_label_value",
       [&](const std::string& v) { c.naming.storage_label_value = v; return ok_status(); }},
      {"replication_account",
       [&](const std::string& v) { c.naming.replication_account = v; return ok_status(); }},
      {"poll_interval_secs",
       [&](const std::string& v) -> Status {
         auto n = parse_int("poll_interval_secs", v);
         if (!n) return n.error();
         c.collector.poll_interval = n.value();
         return ok_status();
       }},
      {"alert_cooldown_polls",
       [&](const std::string& v) -> Status {
         auto n = parse_int("alert_cooldown_polls", v);
         if (!n) return n.error();
         c.collector.cooldown_polls = n.value();
         return ok_status();
       }},
      {"watchdog_threshold_hdfs_gcs_secs",
       [&](const std::string& v) -> Status {
         auto n = parse_int("watchdog_threshold_hdfs_gcs_secs", v);
         if (!n) return n.error();
         c.watchdog.hdfs_to_gcs = n.value();
         return ok_status();
       }},
      {"watchdog_threshold_gcs_bq_secs",
       [&](const std::string& v) -> Status {
         auto n = parse_int("watchdog_threshold_gcs_bq_secs", v);
         if (!n) return n.error();
         c.watchdog.gcs_to_bq = n.value();
         return ok_status();
       }},
      {"load_job_duration_secs",
       [&](const std::string& v) -> Status {
         auto n = parse_int("load_job_duration_secs", v);
         if (!n) return n.error();
         c.load_job_duration = n.value();
         return ok_status();
       }},
      {"load_job_slots",
       [&](const std::string& v) -> Status {
         auto n = parse_int("load_job_slots", v);
         if (!n) return n.error();
         c.load_job_slots = n.value();
         return ok_status();
       }},
      {"total_slots",
       [&](const std::string& v) -> Status {
         auto n = parse_int("total_slots", v);
         if (!n) return n.error();
         c.total_slots = n.value();
         return ok_status();
       }},
      {"audit_denied",
       [&](const std::string& v) -> Status {
         auto b = parse_bool("audit_denied", v);
         if (!b) return b.error();
         c.audit_denied = b.value();
         return ok_status();
       }},
      {"audit_log_path", [&](const std::string& v) { c.audit_log_path = v; return ok_status(); }},
      {"state_path", [&](const std::string& v) { c.state_path = v; return ok_status(); }},
  };

  const std::map<std::string, std::int64_t*> quota_keys = {
      {"quota.datasets_per_project", &c.quota.datasets_per_project},
      {"quota.authorized_views_per_dataset", &c.quota.authorized_views_per_dataset},
      {"quota.columns_per_table", &c.quota.columns_per_table},
      {"quota.table_ops_per_day", &c.quota.table_ops_per_day},
      {"quota.table_metadata_ops_per_10s", &c.quota.table_metadata_ops_per_10s},
      {"quota.read_rows_calls_per_minute", &c.quota.read_rows_calls_per_minute},
      {"quota.storage_api_calls_per_minute", &c.quota.storage_api_calls_per_minute},
      {"quota.streaming_rps_per_project", &c.quota.streaming_rps_per_project},
      {"quota.load_jobs_per_project_per_day", &c.quota.load_jobs_per_project_per_day},
      {"quota.concurrent_load_jobs_per_unit", &c.quota.concurrent_load_jobs_per_unit},
      {"quota.slots_per_concurrency_unit", &c.quota.slots_per_concurrency_unit},
      {"quota.tables_per_dataset", &c.quota.tables_per_dataset},
  };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      return invalid("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (const auto setter = setters.find(key); setter != setters.end()) {
      if (auto r = setter->second(value); !r) return r.error();
      continue;
    }
    if (const auto qk = quota_keys.find(key); qk != quota_keys.end()) {
      auto n = parse_int(key, value);
      if (!n) return n.error();
      if (n.value() < 0) return invalid(key, "must be >= 0");
      *qk->second = n.value();
      continue;
    }
    if (key.starts_with("alert.")) {
      auto rule = parse_alert_rule(key.substr(6), value);
      if (!rule) return rule.error();
      c.alerts.push_back(std::move(rule.value()));
      continue;
    }
    return invalid(key, "unknown configuration key");
  }

  if (auto r = validate(c); !r) return r.error();
  return c;
}

Result<Config> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_error, "cannot open config " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const Config& c) {
  std::ostringstream out;
  out << "# bigbird configuration\n";
  out << "gsuite_domain = " << c.identity.gsuite_domain << "\n";
  out << "service_account_domain = " << c.identity.service_account_domain << "\n";
  out << "rotation_interval_days = " << c.identity.rotation_interval / kDay << "\n";
  out << "grace_period_days = " << c.identity.grace_period / kDay << "\n";
  out << "domain_suffix = " << c.naming.domain_suffix << "\n";
  out << "user_project_template = " << c.naming.user_project_template << "\n";
  out << "log_project_template = " << c.naming.log_project_template << "\n";
  out << "central_logs_project = " << c.naming.central_logs_project << "\n";
  out << "gcs_project = " << c.naming.gcs_project << "\n";
  out << "load_project = " << c.naming.load_project << "\n";
  out << "storage_label_key = " << c.naming.storage_label_key << "\n";
  out << "storage_label_value = " << c.naming.storage_label_value << "\n";
  out << "replication_account = " << c.naming.replication_account << "\n";
  out << "quota.datasets_per_project = " << c.quota.datasets_per_project << "\n";
  out << "quota.authorized_views_per_dataset = " << c.quota.authorized_views_per_dataset << "\n";
  out << "quota.columns_per_table = " << c.quota.columns_per_table << "\n";
  out << "quota.table_ops_per_day = " << c.quota.table_ops_per_day << "\n";
  out << "quota.table_metadata_ops_per_10s = " << c.quota.table_metadata_ops_per_10s << "\n";
  out << "quota.read_rows_calls_per_minute = " << c.quota.read_rows_calls_per_minute << "\n";
  out << "quota.storage_api_calls_per_minute = " << c.quota.storage_api_calls_per_minute << "\n";
  out << "quota.streaming_rps_per_project = " << c.quota.streaming_rps_per_project << "\n";
  out << "quota.load_jobs_per_project_per_day = " << c.quota.load_jobs_per_project_per_day << "\n";
  out << "quota.concurrent_load_jobs_per_unit = " << c.quota.concurrent_load_jobs_per_unit << "\n";
  out << "quota.slots_per_concurrency_unit = " << c.quota.slots_per_concurrency_unit << "\n";
  out << "quota.tables_per_dataset = " << c.quota.tables_per_dataset << "\n";
  out << "poll_interval_secs = " << c.collector.poll_interval << "\n";
  out << "alert_cooldown_polls = " << c.collector.cooldown_polls << "\n";
  out << "watchdog_threshold_hdfs_gcs_secs = " << c.watchdog.hdfs_to_gcs << "\n";
  out << "watchdog_threshold_gcs_bq_secs = " << c.watchdog.gcs_to_bq << "\n";
  out << "load_job_duration_secs = " << c.load_job_duration << "\n";
  out << "load_job_slots = " << c.load_job_slots << "\n";
  out << "total_slots = " << c.total_slots << "\n";
  out << "audit_denied = " << (c.audit_denied ? "true" : "false") << "\n";
  out << "audit_log_path = " << c.audit_log_path << "\n";
  out << "state_path = " << c.state_path << "\n";
  for (const obs::AlertRule& r : c.alerts) {
    out << "alert." << r.name << " = " << serialize_alert_rule(r) << "\n";
  }
  return out.str();
}

}  // namespace bigbird
