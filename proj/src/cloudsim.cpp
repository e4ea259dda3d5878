#include "bigbird/cloudsim.hpp"

#include <algorithm>

namespace bigbird::sim {

using ordered_json = nlohmann::ordered_json;

std::string_view kind_name(ResourceKind k) {
  switch (k) {
    case ResourceKind::organization: return "organization";
    case ResourceKind::folder: return "folder";
    case ResourceKind::project: return "project";
    case ResourceKind::bucket: return "bucket";
    case ResourceKind::dataset: return "dataset";
    case ResourceKind::table: return "table";
    case ResourceKind::view: return "view";
    case ResourceKind::reservation: return "reservation";
  }
  return "unknown";
}

std::optional<ResourceKind> parse_kind(std::string_view s) {
  for (ResourceKind k : {ResourceKind::organization, ResourceKind::folder, ResourceKind::project,
                         ResourceKind::bucket, ResourceKind::dataset, ResourceKind::table,
                         ResourceKind::view, ResourceKind::reservation}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view role_name(Role r) {
  switch (r) {
    case Role::owner: return "owner";
    case Role::writer: return "writer";
    case Role::reader: return "reader";
  }
  return "unknown";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "owner") return Role::owner;
  if (s == "writer") return Role::writer;
  if (s == "reader") return Role::reader;
  return std::nullopt;
}

bool role_covers(Role r, AccessAction a) {
  switch (a) {
    case AccessAction::read: return true;  // every role grants read
    case AccessAction::write: return r == Role::owner || r == Role::writer;
    case AccessAction::administer: return r == Role::owner;
  }
  return false;
}

std::vector<QuotaRule> quota_rules(const QuotaTable& q) {
  return {
      {"datasets-per-project", "project", "instantaneous", q.datasets_per_project, "warn"},
      {"authorized-views-per-dataset", "dataset", "instantaneous", q.authorized_views_per_dataset,
       "reject"},
      {"columns-per-table", "table", "instantaneous", q.columns_per_table, "reject"},
      {"table-ops-per-day", "table", "per-day", q.table_ops_per_day, "reject"},
      {"table-metadata-rate", "table", "per-10-seconds", q.table_metadata_ops_per_10s, "reject"},
      {"read-rows-per-minute", "user-project", "per-minute", q.read_rows_calls_per_minute,
       "reject"},
      {"storage-api-per-minute", "user-project", "per-minute", q.storage_api_calls_per_minute,
       "reject"},
      {"streaming-rps", "project", "per-second", q.streaming_rps_per_project, "reject"},
      {"load-jobs-per-day", "project", "per-day", q.load_jobs_per_project_per_day, "reject"},
      {"concurrent-load-jobs", "project", "concurrent", q.concurrent_load_jobs_per_unit, "queue"},
  };
}

std::string project_rid(std::string_view project_id) {
  return "projects/" + std::string(project_id);
}
std::string bucket_rid(std::string_view bucket_name) {
  return "buckets/" + std::string(bucket_name);
}
std::string dataset_rid(std::string_view project_id, std::string_view dataset) {
  return project_rid(project_id) + "/datasets/" + std::string(dataset);
}
std::string table_rid(std::string_view project_id, std::string_view dataset,
                      std::string_view table) {
  return dataset_rid(project_id, dataset) + "/tables/" + std::string(table);
}
std::string view_rid(std::string_view project_id, std::string_view dataset,
                     std::string_view view) {
  return dataset_rid(project_id, dataset) + "/views/" + std::string(view);
}

namespace {

bool is_bucket_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

bool is_dataset_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

Error quota_error(std::string_view rule, std::string_view scope, std::int64_t limit) {
  return Error{Errc::quota_exceeded, std::string(rule) + ": limit " + std::to_string(limit) +
                                         " exceeded for " + std::string(scope)};
}

}  // namespace

CloudSim::CloudSim() {
  ResourceNode org;
  org.id = std::string(kOrganizationId);
  org.kind = ResourceKind::organization;
  nodes_.emplace(org.id, std::move(org));
}

const ResourceNode* CloudSim::find(std::string_view id) const {
  const auto it = nodes_.find(std::string(id));
  return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<const ResourceNode*> CloudSim::children_of(std::string_view id) const {
  std::vector<const ResourceNode*> out;
  const auto it = children_.find(std::string(id));
  if (it == children_.end()) return out;
  out.reserve(it->second.size());
  for (const std::string& child : it->second) out.push_back(&nodes_.at(child));
  return out;
}

std::int64_t CloudSim::count_children(std::string_view id, ResourceKind kind) const {
  std::int64_t n = 0;
  const auto it = children_.find(std::string(id));
  if (it == children_.end()) return 0;
  for (const std::string& child : it->second) {
    if (nodes_.at(child).kind == kind) ++n;
  }
  return n;
}

Result<Unit> CloudSim::take_failpoint(std::string_view op) {
  const auto it = failpoints_.find(std::string(op));
  if (it != failpoints_.end() && it->second > 0) {
    --it->second;
    return Error{Errc::injected_fault, std::string(op) + ": injected failure"};
  }
  return ok_status();
}

void CloudSim::inject_failure(std::string_view op, int times) {
  failpoints_[std::string(op)] += times;
}

Status CloudSim::add_node(ResourceNode node, audit::Action action, const OpContext& ctx,
                          std::map<std::string, std::string> detail) {
  if (auto r = audit::emit(ctx, action, node.id, audit::Outcome::success, std::move(detail)); !r) {
    return r.error();
  }
  children_[node.parent].insert(node.id);
  nodes_.emplace(node.id, std::move(node));
  return ok_status();
}

Result<CreateResult> CloudSim::create_project(std::string_view project_id,
                                              std::map<std::string, std::string> labels,
                                              const OpContext& ctx) {
  if (auto f = take_failpoint("create_project"); !f) return f.error();
  if (!is_identifier(project_id)) {
    return Error{Errc::invalid_name, "project id must be [a-z0-9-]: " + std::string(project_id)};
  }
  const std::string rid = project_rid(project_id);
  if (exists(rid)) return Error{Errc::already_exists, rid};
  ResourceNode node;
  node.id = rid;
  node.kind = ResourceKind::project;
  node.parent = std::string(kOrganizationId);
  node.labels = std::move(labels);
  node.created_at = ctx.now;
  if (auto r = add_node(std::move(node), audit::Action::project_create, ctx); !r) return r.error();
  return CreateResult{rid, false};
}

Result<CreateResult> CloudSim::create_bucket(std::string_view bucket_name,
                                             std::string_view project_id, const OpContext& ctx) {
  if (auto f = take_failpoint("create_bucket"); !f) return f.error();
  if (!is_bucket_name(bucket_name)) {
    return Error{Errc::invalid_name, "bad bucket name: " + std::string(bucket_name)};
  }
  const std::string parent = project_rid(project_id);
  if (!exists(parent)) return Error{Errc::unknown_parent, parent};
  const std::string rid = bucket_rid(bucket_name);
  if (exists(rid)) return Error{Errc::already_exists, rid};
  ResourceNode node;
  node.id = rid;
  node.kind = ResourceKind::bucket;
  node.parent = parent;
  node.created_at = ctx.now;
  if (auto r = add_node(std::move(node), audit::Action::bucket_create, ctx); !r) return r.error();
  return CreateResult{rid, false};
}

Result<CreateResult> CloudSim::create_dataset(std::string_view project_id, std::string_view name,
                                              const OpContext& ctx) {
  if (auto f = take_failpoint("create_dataset"); !f) return f.error();
  if (!is_dataset_name(name)) {
    return Error{Errc::invalid_name, "bad dataset name: " + std::string(name)};
  }
  const std::string parent = project_rid(project_id);
  if (!exists(parent)) return Error{Errc::unknown_parent, parent};
  const std::string rid = dataset_rid(project_id, name);
  if (exists(rid)) return Error{Errc::already_exists, rid};

  const bool warn = count_children(parent, ResourceKind::dataset) + 1 > quota.datasets_per_project;
  std::map<std::string, std::string> detail;
  if (warn) detail["degradation"] = "datasets-per-project";
  ResourceNode node;
  node.id = rid;
  node.kind = ResourceKind::dataset;
  node.parent = parent;
  node.created_at = ctx.now;
  if (auto r = add_node(std::move(node), audit::Action::dataset_create, ctx, std::move(detail));
      !r) {
    return r.error();
  }
  if (warn) warnings_.push_back({ctx.now, "datasets-per-project", parent});
  return CreateResult{rid, warn};
}

Result<CreateResult> CloudSim::create_table(std::string_view project_id, std::string_view dataset,
                                            std::string_view name, std::int64_t column_count,
                                            bool partitioned, const OpContext& ctx) {
  if (auto f = take_failpoint("create_table"); !f) return f.error();
  if (!is_dataset_name(name)) {
    return Error{Errc::invalid_name, "bad table name: " + std::string(name)};
  }
  const std::string parent = dataset_rid(project_id, dataset);
  if (!exists(parent)) return Error{Errc::unknown_parent, parent};
  const std::string rid = table_rid(project_id, dataset, name);
  if (exists(rid)) return Error{Errc::already_exists, rid};
  if (column_count < 0) return Error{Errc::invalid_name, "negative column count"};
  if (column_count > quota.columns_per_table) {
    if (auto r = audit::emit(ctx, audit::Action::table_create, rid, audit::Outcome::denied,
                             {{"quota", "columns-per-table"}});
        !r) {
      return r.error();
    }
    return quota_error("columns-per-table", rid, quota.columns_per_table);
  }

  const bool warn = count_children(parent, ResourceKind::table) + 1 > quota.tables_per_dataset;
  std::map<std::string, std::string> detail;
  if (warn) detail["degradation"] = "tables-per-dataset";
  ResourceNode node;
  node.id = rid;
  node.kind = ResourceKind::table;
  node.parent = parent;
  node.created_at = ctx.now;
  node.table = TableMeta{column_count, partitioned, 0};
  if (auto r = add_node(std::move(node), audit::Action::table_create, ctx, std::move(detail));
      !r) {
    return r.error();
  }
  if (warn) warnings_.push_back({ctx.now, "tables-per-dataset", parent});
  return CreateResult{rid, warn};
}

Result<CreateResult> CloudSim::create_view(std::string_view project_id, std::string_view dataset,
                                           std::string_view name,
                                           std::string_view backing_dataset_id, bool authorized,
                                           const OpContext& ctx) {
  if (auto f = take_failpoint("create_view"); !f) return f.error();
  if (!is_dataset_name(name)) {
    return Error{Errc::invalid_name, "bad view name: " + std::string(name)};
  }
  const std::string parent = dataset_rid(project_id, dataset);
  if (!exists(parent)) return Error{Errc::unknown_parent, parent};
  const std::string rid = view_rid(project_id, dataset, name);
  if (exists(rid)) return Error{Errc::already_exists, rid};
  const ResourceNode* backing = find(backing_dataset_id);
  if (backing == nullptr || backing->kind != ResourceKind::dataset) {
    return Error{Errc::unknown_resource, "backing dataset " + std::string(backing_dataset_id)};
  }
  if (authorized) {
    std::int64_t authorized_count = 0;
    for (const ResourceNode* child : children_of(parent)) {
      if (child->kind == ResourceKind::view && child->view && child->view->authorized) {
        ++authorized_count;
      }
    }
    if (authorized_count + 1 > quota.authorized_views_per_dataset) {
      if (auto r = audit::emit(ctx, audit::Action::view_create, rid, audit::Outcome::denied,
                               {{"quota", "authorized-views-per-dataset"}});
          !r) {
        return r.error();
      }
      return quota_error("authorized-views-per-dataset", parent,
                         quota.authorized_views_per_dataset);
    }
  }
  ResourceNode node;
  node.id = rid;
  node.kind = ResourceKind::view;
  node.parent = parent;
  node.created_at = ctx.now;
  node.view = ViewMeta{std::string(backing_dataset_id), authorized};
  if (auto r = add_node(std::move(node), audit::Action::view_create, ctx,
                        {{"backing", std::string(backing_dataset_id)}});
      !r) {
    return r.error();
  }
  return CreateResult{rid, false};
}

Status CloudSim::delete_dataset(std::string_view project_id, std::string_view name,
                                const OpContext& ctx) {
  const std::string rid = dataset_rid(project_id, name);
  if (!exists(rid)) return Error{Errc::unknown_resource, rid};
  if (auto r = audit::emit(ctx, audit::Action::dataset_delete, rid, audit::Outcome::success); !r) {
    return r.error();
  }
  std::vector<std::string> doomed{rid};
  const auto kids = children_.find(rid);
  if (kids != children_.end()) {
    doomed.insert(doomed.end(), kids->second.begin(), kids->second.end());
  }
  for (const std::string& id : doomed) {
    const auto node = nodes_.find(id);
    if (node == nodes_.end()) continue;
    children_[node->second.parent].erase(id);
    children_.erase(id);
    nodes_.erase(node);
    std::erase_if(bindings_, [&](const AclBinding& b) { return b.resource == id; });
  }
  return ok_status();
}

Status CloudSim::set_labels(std::string_view id, std::map<std::string, std::string> labels,
                            const OpContext& ctx) {
  const auto it = nodes_.find(std::string(id));
  if (it == nodes_.end()) return Error{Errc::unknown_resource, std::string(id)};
  if (it->second.labels == labels) return ok_status();
  if (auto r = audit::emit(ctx, audit::Action::label_change, it->first, audit::Outcome::success);
      !r) {
    return r.error();
  }
  it->second.labels = std::move(labels);
  return ok_status();
}

std::int64_t CloudSim::window_count(const std::string& key, Duration window, Timestamp now) const {
  const Timestamp ws = now - (now % window);
  const auto it = counters_.find(key);
  if (it == counters_.end() || it->second.window_start != ws) return 0;
  return it->second.count;
}

void CloudSim::window_increment(const std::string& key, Duration window, Timestamp now) {
  const Timestamp ws = now - (now % window);
  WindowCounter& c = counters_[key];
  if (c.window_start != ws) {
    c.window_start = ws;
    c.count = 0;
  }
  ++c.count;
}

Status CloudSim::table_operation(std::string_view table_id, TableOpKind kind,
                                 bool downstream_failure, const OpContext& ctx) {
  const ResourceNode* node = find(table_id);
  if (node == nullptr || node->kind != ResourceKind::table) {
    return Error{Errc::unknown_resource, std::string(table_id)};
  }
  const std::string day_key = "table-ops-per-day|" + std::string(table_id);
  const std::string meta_key = "table-metadata-rate|" + std::string(table_id);
  const char* op_kind = kind == TableOpKind::metadata ? "metadata" : "data_write";

  if (window_count(day_key, kDay, ctx.now) + 1 > quota.table_ops_per_day) {
    if (auto r = audit::emit(ctx, audit::Action::data_write, std::string(table_id),
                             audit::Outcome::denied,
                             {{"op_kind", op_kind}, {"quota", "table-ops-per-day"}});
        !r) {
      return r.error();
    }
    return quota_error("table-ops-per-day", table_id, quota.table_ops_per_day);
  }
  if (kind == TableOpKind::metadata &&
      window_count(meta_key, 10, ctx.now) + 1 > quota.table_metadata_ops_per_10s) {
    if (auto r = audit::emit(ctx, audit::Action::data_write, std::string(table_id),
                             audit::Outcome::denied,
                             {{"op_kind", op_kind}, {"quota", "table-metadata-rate"}});
        !r) {
      return r.error();
    }
    return quota_error("table-metadata-rate", table_id, quota.table_metadata_ops_per_10s);
  }
  if (auto r = audit::emit(ctx, audit::Action::data_write, std::string(table_id),
                           downstream_failure ? audit::Outcome::failed : audit::Outcome::success,
                           {{"op_kind", op_kind}});
      !r) {
    return r.error();
  }
  window_increment(day_key, kDay, ctx.now);
  if (kind == TableOpKind::metadata) window_increment(meta_key, 10, ctx.now);
  return ok_status();
}

Status CloudSim::record_api_call(std::string_view user, std::string_view project_id,
                                 ApiCallKind kind, const OpContext& ctx) {
  const std::string rid = project_rid(project_id);
  if (!exists(rid)) return Error{Errc::unknown_resource, rid};

  std::string rule;
  std::string key;
  Duration window = 0;
  std::int64_t limit = 0;
  audit::Action action = audit::Action::data_read;
  switch (kind) {
    case ApiCallKind::read_rows:
      rule = "read-rows-per-minute";
      key = rule + "|" + std::string(user) + "|" + rid;
      window = kMinute;
      limit = quota.read_rows_calls_per_minute;
      break;
    case ApiCallKind::other_storage_api:
      rule = "storage-api-per-minute";
      key = rule + "|" + std::string(user) + "|" + rid;
      window = kMinute;
      limit = quota.storage_api_calls_per_minute;
      break;
    case ApiCallKind::streaming_insert:
      rule = "streaming-rps";
      key = rule + "|" + rid;
      window = kSecond;
      limit = quota.streaming_rps_per_project;
      action = audit::Action::data_write;
      break;
  }
  OpContext call_ctx = ctx;
  call_ctx.principal = std::string(user);
  if (window_count(key, window, ctx.now) + 1 > limit) {
    if (auto r = audit::emit(call_ctx, action, rid, audit::Outcome::denied, {{"quota", rule}});
        !r) {
      return r.error();
    }
    return quota_error(rule, key, limit);
  }
  if (auto r = audit::emit(call_ctx, action, rid, audit::Outcome::success, {{"api", rule}}); !r) {
    return r.error();
  }
  window_increment(key, window, ctx.now);
  return ok_status();
}

Status CloudSim::charge_load_job(std::string_view project_id, Timestamp now) {
  const std::string rid = project_rid(project_id);
  const std::string key = "load-jobs-per-day|" + rid;
  if (window_count(key, kDay, now) + 1 > quota.load_jobs_per_project_per_day) {
    return quota_error("load-jobs-per-day", rid, quota.load_jobs_per_project_per_day);
  }
  window_increment(key, kDay, now);
  return ok_status();
}

Status CloudSim::bind(std::string_view resource, std::string_view principal, Role role,
                      const OpContext& ctx) {
  if (!exists(resource)) return Error{Errc::unknown_resource, std::string(resource)};
  AclBinding b{std::string(resource), std::string(principal), role};
  if (bindings_.contains(b)) return ok_status();  // coalesce duplicates
  if (auto r = audit::emit(ctx, audit::Action::acl_change, b.resource, audit::Outcome::success,
                           {{"principal", b.principal}, {"role", std::string(role_name(role))},
                            {"op", "bind"}});
      !r) {
    return r.error();
  }
  bindings_.insert(std::move(b));
  return ok_status();
}

Status CloudSim::unbind(std::string_view resource, std::string_view principal, Role role,
                        const OpContext& ctx) {
  AclBinding b{std::string(resource), std::string(principal), role};
  if (!bindings_.contains(b)) return ok_status();
  if (auto r = audit::emit(ctx, audit::Action::acl_change, b.resource, audit::Outcome::success,
                           {{"principal", b.principal}, {"role", std::string(role_name(role))},
                            {"op", "unbind"}});
      !r) {
    return r.error();
  }
  bindings_.erase(b);
  return ok_status();
}

bool CloudSim::has_binding(std::string_view resource, std::string_view principal,
                           Role role) const {
  return bindings_.contains(AclBinding{std::string(resource), std::string(principal), role});
}

bool CloudSim::access_allowed(std::string_view principal, std::string_view resource,
                              AccessAction action, const GroupResolver* groups) const {
  std::string current(resource);
  while (true) {
    const ResourceNode* node = find(current);
    if (node == nullptr) return false;
    // Bindings on this node, any principal/role.
    const auto begin = bindings_.lower_bound(AclBinding{current, "", Role::owner});
    for (auto it = begin; it != bindings_.end() && it->resource == current; ++it) {
      if (!role_covers(it->role, action)) continue;
      if (it->principal == principal) return true;
      if (groups != nullptr && groups->is_member(it->principal, principal)) return true;
    }
    if (node->parent.empty()) return false;
    current = node->parent;
  }
}

Result<bool> CloudSim::check_access(std::string_view principal, std::string_view resource,
                                    AccessAction action, const GroupResolver* groups,
                                    const OpContext& ctx) {
  if (!exists(resource)) return Error{Errc::unknown_resource, std::string(resource)};
  const bool allowed = access_allowed(principal, resource, action, groups);
  const bool audit_this = action != AccessAction::administer && (allowed || audit_denied);
  if (audit_this) {
    OpContext check_ctx = ctx;
    check_ctx.principal = std::string(principal);
    const auto audit_action =
        action == AccessAction::read ? audit::Action::data_read : audit::Action::data_write;
    if (auto r = audit::emit(check_ctx, audit_action, std::string(resource),
                             allowed ? audit::Outcome::success : audit::Outcome::denied,
                             {{"check", "access"}});
        !r) {
      return r.error();
    }
  }
  return allowed;
}

std::vector<QuotaStatusRow> CloudSim::quota_status(std::string_view scope) const {
  std::vector<QuotaStatusRow> rows;
  const ResourceNode* node = find(scope);
  if (node != nullptr) {
    if (node->kind == ResourceKind::project) {
      rows.push_back({"datasets-per-project", std::string(scope), 0,
                      count_children(scope, ResourceKind::dataset), quota.datasets_per_project});
    } else if (node->kind == ResourceKind::dataset) {
      std::int64_t authorized_count = 0;
      for (const ResourceNode* child : children_of(scope)) {
        if (child->kind == ResourceKind::view && child->view && child->view->authorized) {
          ++authorized_count;
        }
      }
      rows.push_back({"authorized-views-per-dataset", std::string(scope), 0, authorized_count,
                      quota.authorized_views_per_dataset});
      rows.push_back({"tables-per-dataset", std::string(scope), 0,
                      count_children(scope, ResourceKind::table), quota.tables_per_dataset});
    }
  }
  for (const auto& [key, counter] : counters_) {
    const std::size_t bar = key.find('|');
    if (bar == std::string::npos) continue;
    const std::string rule = key.substr(0, bar);
    const std::string counter_scope = key.substr(bar + 1);
    if (counter_scope != scope && counter_scope.find(std::string(scope)) == std::string::npos) {
      continue;
    }
    std::int64_t limit = 0;
    for (const QuotaRule& r : quota_rules(quota)) {
      if (r.name == rule) limit = r.limit;
    }
    rows.push_back({rule, counter_scope, counter.window_start, counter.count, limit});
  }
  return rows;
}

nlohmann::ordered_json CloudSim::to_json() const {
  ordered_json j;
  ordered_json nodes = ordered_json::array();
  for (const auto& [id, node] : nodes_) {
    ordered_json n;
    n["id"] = node.id;
    n["kind"] = kind_name(node.kind);
    n["parent"] = node.parent;
    n["labels"] = node.labels;
    n["created_at"] = node.created_at;
    if (node.table) {
      n["table"] = {{"column_count", node.table->column_count},
                    {"partitioned", node.table->partitioned},
                    {"row_count", node.table->row_count}};
    }
    if (node.view) {
      n["view"] = {{"backing_dataset", node.view->backing_dataset},
                   {"authorized", node.view->authorized}};
    }
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);

  ordered_json bindings = ordered_json::array();
  for (const AclBinding& b : bindings_) {
    bindings.push_back({b.resource, b.principal, std::string(role_name(b.role))});
  }
  j["bindings"] = std::move(bindings);

  ordered_json counters = ordered_json::object();
  for (const auto& [key, c] : counters_) {
    counters[key] = {{"window_start", c.window_start}, {"count", c.count}};
  }
  j["counters"] = std::move(counters);

  ordered_json warnings = ordered_json::array();
  for (const DegradationWarning& w : warnings_) {
    warnings.push_back({{"at", w.at}, {"rule", w.rule}, {"scope", w.scope}});
  }
  j["warnings"] = std::move(warnings);
  return j;
}

Result<CloudSim> CloudSim::from_json(const nlohmann::ordered_json& j) {
  CloudSim sim;
  sim.nodes_.clear();
  try {
    for (const auto& n : j.at("nodes")) {
      ResourceNode node;
      node.id = n.at("id").get<std::string>();
      const auto kind = parse_kind(n.at("kind").get<std::string>());
      if (!kind) return Error{Errc::corrupt_snapshot, "bad resource kind"};
      node.kind = *kind;
      node.parent = n.at("parent").get<std::string>();
      node.labels = n.at("labels").get<std::map<std::string, std::string>>();
      node.created_at = n.at("created_at").get<Timestamp>();
      if (n.contains("table")) {
        node.table = TableMeta{n["table"].at("column_count").get<std::int64_t>(),
                               n["table"].at("partitioned").get<bool>(),
                               n["table"].at("row_count").get<std::int64_t>()};
      }
      if (n.contains("view")) {
        node.view = ViewMeta{n["view"].at("backing_dataset").get<std::string>(),
                             n["view"].at("authorized").get<bool>()};
      }
      if (!node.parent.empty()) sim.children_[node.parent].insert(node.id);
      sim.nodes_.emplace(node.id, std::move(node));
    }
    for (const auto& b : j.at("bindings")) {
      const auto role = parse_role(b.at(2).get<std::string>());
      if (!role) return Error{Errc::corrupt_snapshot, "bad role"};
      sim.bindings_.insert(
          AclBinding{b.at(0).get<std::string>(), b.at(1).get<std::string>(), *role});
    }
    for (const auto& [key, c] : j.at("counters").items()) {
      sim.counters_[key] = WindowCounter{c.at("window_start").get<Timestamp>(),
                                         c.at("count").get<std::int64_t>()};
    }
    for (const auto& w : j.at("warnings")) {
      sim.warnings_.push_back({w.at("at").get<Timestamp>(), w.at("rule").get<std::string>(),
                               w.at("scope").get<std::string>()});
    }
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("cloud state: ") + ex.what()};
  }
  if (!sim.nodes_.contains(std::string(kOrganizationId))) {
    return Error{Errc::corrupt_snapshot, "missing organization node"};
  }
  return sim;
}

}  // namespace bigbird::sim
