#include "bigbird/audit.hpp"

#include <filesystem>

#include "json.hpp"

namespace bigbird::audit {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::pair<Action, std::string_view> kActionNames[] = {
    {Action::project_create, "project_create"},
    {Action::bucket_create, "bucket_create"},
    {Action::dataset_create, "dataset_create"},
    {Action::dataset_delete, "dataset_delete"},
    {Action::table_create, "table_create"},
    {Action::view_create, "view_create"},
    {Action::data_read, "data_read"},
    {Action::data_write, "data_write"},
    {Action::acl_change, "acl_change"},
    {Action::group_change, "group_change"},
    {Action::label_change, "label_change"},
    {Action::identity_create, "identity_create"},
    {Action::key_rotate, "key_rotate"},
    {Action::job_transition, "job_transition"},
    {Action::reservation_change, "reservation_change"},
};

}  // namespace

std::string_view action_name(Action a) {
  for (const auto& [action, name] : kActionNames) {
    if (action == a) return name;
  }
  return "unknown";
}

std::optional<Action> parse_action(std::string_view s) {
  for (const auto& [action, name] : kActionNames) {
    if (name == s) return action;
  }
  return std::nullopt;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::denied: return "denied";
    case Outcome::failed: return "failed";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "denied") return Outcome::denied;
  if (s == "failed") return Outcome::failed;
  return std::nullopt;
}

std::string to_json_line(const Event& e) {
  ordered_json j;
  j["seq"] = e.sequence;
  j["ts"] = e.timestamp;
  j["principal"] = e.principal;
  j["action"] = action_name(e.action);
  j["resource"] = e.resource;
  j["outcome"] = outcome_name(e.outcome);
  j["detail"] = e.detail;
  return j.dump();
}

Result<Event> parse_json_line(const std::string& line) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Error{Errc::corrupt_snapshot, "unparsable audit line"};
  }
  Event e;
  try {
    e.sequence = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.at("ts").get<Timestamp>();
    e.principal = j.at("principal").get<std::string>();
    const auto action = parse_action(j.at("action").get<std::string>());
    const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (!action || !outcome) {
      return Error{Errc::corrupt_snapshot, "unknown audit action or outcome"};
    }
    e.action = *action;
    e.outcome = *outcome;
    e.resource = j.at("resource").get<std::string>();
    e.detail = j.at("detail").get<std::map<std::string, std::string>>();
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("bad audit line: ") + ex.what()};
  }
  return e;
}

Status Sink::open(const std::string& path) {
  path_ = path;
  std::ifstream in(path);
  if (in) {
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto parsed = parse_json_line(line);
      if (!parsed) {
        return Error{Errc::corrupt_snapshot,
                     "audit log line " + std::to_string(line_no) + ": " + parsed.error().message};
      }
      if (parsed.value().sequence != events_.size() + 1) {
        return Error{Errc::corrupt_snapshot,
                     "audit log sequence gap at line " + std::to_string(line_no)};
      }
      events_.push_back(std::move(parsed.value()));
    }
    next_seq_ = events_.size() + 1;
  }
  out_.open(path, std::ios::app);
  if (!out_) {
    return Error{Errc::sink_unavailable, "cannot open audit log " + path};
  }
  return ok_status();
}

Result<std::uint64_t> Sink::append(Event e) {
  if (fail_appends_) {
    return Error{Errc::sink_unavailable, "audit sink unavailable"};
  }
  e.sequence = next_seq_;
  if (out_.is_open()) {
    out_ << to_json_line(e) << '\n';
    out_.flush();
    if (!out_) {
      return Error{Errc::sink_unavailable, "audit log write failed"};
    }
  }
  events_.push_back(std::move(e));
  return next_seq_++;
}

std::vector<Event> Sink::query(const Filter& f) const {
  std::vector<Event> out;
  for (const Event& e : events_) {
    if (f.principal && e.principal != *f.principal) continue;
    if (f.action && e.action != *f.action) continue;
    if (f.resource && e.resource != *f.resource) continue;
    if (f.from && e.timestamp < *f.from) continue;
    if (f.to && e.timestamp > *f.to) continue;
    out.push_back(e);
  }
  return out;
}

Status emit(const OpContext& ctx, Action action, std::string resource, Outcome outcome,
            std::map<std::string, std::string> detail) {
  if (ctx.sink == nullptr) return ok_status();
  Event e;
  e.timestamp = ctx.now;
  e.principal = ctx.principal;
  e.action = action;
  e.resource = std::move(resource);
  e.outcome = outcome;
  e.detail = std::move(detail);
  auto r = ctx.sink->append(std::move(e));
  if (!r) return r.error();
  return ok_status();
}

}  // namespace bigbird::audit
