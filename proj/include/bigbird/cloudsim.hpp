#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/common.hpp"
#include "json.hpp"

namespace bigbird::sim {

inline constexpr std::string_view kOrganizationId = "org";

enum class ResourceKind { organization, folder, project, bucket, dataset, table, view, reservation };

std::string_view kind_name(ResourceKind k);
std::optional<ResourceKind> parse_kind(std::string_view s);

struct TableMeta {
  std::int64_t column_count = 0;
  bool partitioned = false;
  std::int64_t row_count = 0;

  bool operator==(const TableMeta&) const = default;
};

struct ViewMeta {
  std::string backing_dataset;
  bool authorized = false;

  bool operator==(const ViewMeta&) const = default;
};

struct ResourceNode {
  std::string id;
  ResourceKind kind = ResourceKind::project;
  std::string parent;  // empty only for the organization
  std::map<std::string, std::string> labels;
  Timestamp created_at = 0;
  std::optional<TableMeta> table;
  std::optional<ViewMeta> view;

  bool operator==(const ResourceNode&) const = default;
};

enum class Role { owner, writer, reader };
enum class AccessAction { read, write, administer };

std::string_view role_name(Role r);
std::optional<Role> parse_role(std::string_view s);

// owner covers writer covers reader.
bool role_covers(Role r, AccessAction a);

struct AclBinding {
  std::string resource;
  std::string principal;  // principal email or group email
  Role role = Role::reader;

  auto operator<=>(const AclBinding&) const = default;
};

// Resolves group emails to member principals; implemented by the identity
// directory and passed into access checks so the simulator stays free of an
// identity dependency.
class GroupResolver {
 public:
  virtual ~GroupResolver() = default;
  virtual bool is_member(std::string_view group_email, std::string_view principal) const = 0;
};

// The shipped limit table. The ten enforced limits are exposed through
// rules(); the tables-per-dataset figure is a degradation threshold checked
// directly by create_table.
struct QuotaTable {
  std::int64_t datasets_per_project = 1000;           // warn
  std::int64_t authorized_views_per_dataset = 2500;   // reject
  std::int64_t columns_per_table = 10000;             // reject
  std::int64_t table_ops_per_day = 1000;              // reject
  std::int64_t table_metadata_ops_per_10s = 5;        // reject
  std::int64_t read_rows_calls_per_minute = 5000;     // reject
  std::int64_t storage_api_calls_per_minute = 1000;   // reject
  std::int64_t streaming_rps_per_project = 10000000;  // reject
  std::int64_t load_jobs_per_project_per_day = 100000;  // reject
  std::int64_t concurrent_load_jobs_per_unit = 50;      // queue
  std::int64_t slots_per_concurrency_unit = 2000;
  std::int64_t tables_per_dataset = 50000;  // degradation threshold, not a rule row

  bool operator==(const QuotaTable&) const = default;
};

struct QuotaRule {
  std::string name;
  std::string scope_kind;  // project | dataset | table | user-project
  std::string window;      // per-day | per-minute | per-10-seconds | per-second | instantaneous | concurrent
  std::int64_t limit = 0;
  std::string behavior;  // reject | queue | warn
};

std::vector<QuotaRule> quota_rules(const QuotaTable& q);

struct DegradationWarning {
  Timestamp at = 0;
  std::string rule;
  std::string scope;

  bool operator==(const DegradationWarning&) const = default;
};

struct CreateResult {
  std::string id;
  bool degradation_warning = false;
};

struct QuotaStatusRow {
  std::string rule;
  std::string scope;
  Timestamp window_start = 0;
  std::int64_t count = 0;
  std::int64_t limit = 0;
};

enum class TableOpKind { data_write, metadata };
enum class ApiCallKind { read_rows, other_storage_api, streaming_insert };

// In-process cloud provider: one organization, a resource tree, role
// bindings, and the windowed quota ledger. Mutations are single-writer;
// quota check-and-increment is atomic with the mutation it guards.
class CloudSim {
 public:
  CloudSim();

  Result<CreateResult> create_project(std::string_view project_id,
                                      std::map<std::string, std::string> labels,
                                      const OpContext& ctx);
  Result<CreateResult> create_bucket(std::string_view bucket_name, std::string_view project_id,
                                     const OpContext& ctx);
  Result<CreateResult> create_dataset(std::string_view project_id, std::string_view name,
                                      const OpContext& ctx);
  Result<CreateResult> create_table(std::string_view project_id, std::string_view dataset,
                                    std::string_view name, std::int64_t column_count,
                                    bool partitioned, const OpContext& ctx);
  Result<CreateResult> create_view(std::string_view project_id, std::string_view dataset,
                                   std::string_view name, std::string_view backing_dataset_id,
                                   bool authorized, const OpContext& ctx);

  // Removes the dataset, its tables and views, and all bindings on the
  // removed nodes, atomically.
  Status delete_dataset(std::string_view project_id, std::string_view name, const OpContext& ctx);

  Status set_labels(std::string_view id, std::map<std::string, std::string> labels,
                    const OpContext& ctx);

  // Counts against the per-day table quota even when the operation fails
  // downstream; metadata operations are additionally rate-checked.
  Status table_operation(std::string_view table_id, TableOpKind kind, bool downstream_failure,
                         const OpContext& ctx);

  Status record_api_call(std::string_view user, std::string_view project_id, ApiCallKind kind,
                         const OpContext& ctx);

  // Charges the load-jobs-per-day window for the given project. Used by the
  // ingestion service as part of its submit path; does not emit audit.
  Status charge_load_job(std::string_view project_id, Timestamp now);

  Status bind(std::string_view resource, std::string_view principal, Role role,
              const OpContext& ctx);
  Status unbind(std::string_view resource, std::string_view principal, Role role,
                const OpContext& ctx);
  bool has_binding(std::string_view resource, std::string_view principal, Role role) const;

  // Pure decision: allow iff a binding on the resource or an ancestor grants
  // a covering role, directly or via group membership. No audit.
  bool access_allowed(std::string_view principal, std::string_view resource, AccessAction action,
                      const GroupResolver* groups) const;

  // Audited variant; read and write checks are logged (denials only when
  // audit_denied). Errors with UnknownResource when the resource is absent.
  Result<bool> check_access(std::string_view principal, std::string_view resource,
                            AccessAction action, const GroupResolver* groups,
                            const OpContext& ctx);

  bool exists(std::string_view id) const { return nodes_.contains(std::string(id)); }
  const ResourceNode* find(std::string_view id) const;
  const std::map<std::string, ResourceNode>& nodes() const { return nodes_; }
  const std::set<AclBinding>& bindings() const { return bindings_; }
  const std::vector<DegradationWarning>& warnings() const { return warnings_; }
  std::vector<const ResourceNode*> children_of(std::string_view id) const;
  std::int64_t count_children(std::string_view id, ResourceKind kind) const;

  std::vector<QuotaStatusRow> quota_status(std::string_view scope) const;

  QuotaTable quota;
  bool audit_denied = true;

  // Fault injection: the next `times` calls of the named op ("create_bucket",
  // "create_project", ...) fail with InjectedFault. Not part of snapshots.
  void inject_failure(std::string_view op, int times);

  nlohmann::ordered_json to_json() const;
  static Result<CloudSim> from_json(const nlohmann::ordered_json& j);

 private:
  struct WindowCounter {
    Timestamp window_start = 0;
    std::int64_t count = 0;
  };

  Result<Unit> take_failpoint(std::string_view op);
  Status add_node(ResourceNode node, audit::Action action, const OpContext& ctx,
                  std::map<std::string, std::string> detail = {});
  // Fixed (tumbling) windows aligned to epoch boundaries.
  std::int64_t window_count(const std::string& key, Duration window, Timestamp now) const;
  void window_increment(const std::string& key, Duration window, Timestamp now);

  std::map<std::string, ResourceNode> nodes_;
  std::map<std::string, std::set<std::string>> children_;  // parent -> child ids
  std::set<AclBinding> bindings_;
  std::map<std::string, WindowCounter> counters_;
  std::vector<DegradationWarning> warnings_;
  std::map<std::string, int> failpoints_;
};

std::string project_rid(std::string_view project_id);
std::string bucket_rid(std::string_view bucket_name);
std::string dataset_rid(std::string_view project_id, std::string_view dataset);
std::string table_rid(std::string_view project_id, std::string_view dataset, std::string_view table);
std::string view_rid(std::string_view project_id, std::string_view dataset, std::string_view view);

}  // namespace bigbird::sim
