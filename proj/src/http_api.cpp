#include "bigbird/http_api.hpp"

#include "httplib.h"
#include "json.hpp"

namespace bigbird::api {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json series_json(const obs::MetricSeries& s) {
  ordered_json points = ordered_json::array();
  for (const obs::MetricPoint& p : s.points) points.push_back({p.ts, p.value});
  return {{"metric", std::string(obs::metric_name(s.name))},
          {"dimensions", s.dimensions},
          {"points", std::move(points)}};
}

ordered_json row_json(const obs::JobStatsRow& r) {
  ordered_json j;
  j["project"] = r.project;
  j["job_id"] = r.job_id;
  j["type"] = slots::job_kind_name(r.job_type);
  j["state"] = slots::job_state_name(r.state);
  j["submitted_at"] = r.submitted_at;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["reservation"] = r.reservation_name;
  j["slots"] = r.slots_consumed;
  if (r.execution_time) j["execution_time"] = *r.execution_time;
  return j;
}

}  // namespace

std::string AdminServer::metrics_json(const std::string& metric_filter,
                                      const std::string& project_filter) const {
  ordered_json out = ordered_json::array();
  for (const auto& [key, series] : system_.state().collector.series()) {
    if (!metric_filter.empty() && obs::metric_name(series.name) != metric_filter) continue;
    if (!project_filter.empty()) {
      const auto it = series.dimensions.find("project");
      if (it == series.dimensions.end() || it->second != project_filter) continue;
    }
    out.push_back(series_json(series));
  }
  return out.dump(2);
}

Result<std::string> AdminServer::jobs_json(const std::string& project, const std::string& state,
                                           const std::string& type) const {
  obs::InfoSchemaFilter filter;
  if (!project.empty()) filter.project = project;
  if (!state.empty()) {
    const auto s = slots::parse_job_state(state);
    if (!s) return Error{Errc::config_invalid, "unknown state " + state};
    filter.state = *s;
  }
  if (!type.empty()) {
    const auto t = slots::parse_job_kind(type);
    if (!t) return Error{Errc::config_invalid, "unknown type " + type};
    filter.type = *t;
  }
  auto rows = obs::info_schema_query(system_.state().cloud, system_.state().pool,
                                     system_.state().load, sim::kOrganizationId, filter);
  if (!rows) return rows.error();
  ordered_json out = ordered_json::array();
  for (const obs::JobStatsRow& r : rows.value()) out.push_back(row_json(r));
  return out.dump(2);
}

Result<std::string> AdminServer::audit_json(const std::string& principal,
                                            const std::string& action, const std::string& from,
                                            const std::string& to) const {
  if (system_.sink() == nullptr) return std::string("[]");
  audit::Sink::Filter filter;
  if (!principal.empty()) filter.principal = principal;
  if (!action.empty()) {
    const auto a = audit::parse_action(action);
    if (!a) return Error{Errc::config_invalid, "unknown action " + action};
    filter.action = *a;
  }
  try {
    if (!from.empty()) filter.from = std::stoll(from);
    if (!to.empty()) filter.to = std::stoll(to);
  } catch (const std::exception&) {
    return Error{Errc::config_invalid, "bad timestamp filter"};
  }
  ordered_json out = ordered_json::array();
  for (const audit::Event& e : system_.sink()->query(filter)) {
    out.push_back(ordered_json::parse(audit::to_json_line(e)));
  }
  return out.dump(2);
}

Status AdminServer::serve(const std::string& host, int port) {
  httplib::Server server;
  server_ = &server;

  server.Get("/v1/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(metrics_json(req.get_param_value("metric"), req.get_param_value("project")),
                    "application/json");
  });
  server.Get("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = jobs_json(req.get_param_value("project"), req.get_param_value("state"),
                          req.get_param_value("type"));
    if (!body) {
      res.status = 400;
      res.set_content(body.error().message, "text/plain");
      return;
    }
    res.set_content(body.value(), "application/json");
  });
  server.Get("/v1/audit", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = audit_json(req.get_param_value("principal"), req.get_param_value("action"),
                           req.get_param_value("from"), req.get_param_value("to"));
    if (!body) {
      res.status = 400;
      res.set_content(body.error().message, "text/plain");
      return;
    }
    res.set_content(body.value(), "application/json");
  });

  const bool ok = server.listen(host, port);
  server_ = nullptr;
  if (!ok) return Error{Errc::io_error, "cannot listen on " + host + ":" + std::to_string(port)};
  return ok_status();
}

void AdminServer::stop() {
  if (server_ != nullptr) static_cast<httplib::Server*>(server_)->stop();
}

}  // namespace bigbird::api
