#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/cloudsim.hpp"
#include "bigbird/common.hpp"
#include "bigbird/identity.hpp"
#include "bigbird/paths.hpp"

namespace bigbird::provision {

enum class TenantKind { service_account_user, log_category };

std::string_view tenant_kind_name(TenantKind k);
std::optional<TenantKind> parse_tenant_kind(std::string_view s);

struct TenantSpec {
  std::string name;
  TenantKind kind = TenantKind::service_account_user;

  bool operator==(const TenantSpec&) const = default;
};

struct NamingPolicy {
  std::string user_project_template = "twitter-{name}-bq-project";
  std::string log_project_template = "twitter-{name}-bql-project";
  std::string central_logs_project = "twitter-logs-bq-project";
  std::string gcs_project = "twitter-gcs-project";
  std::string load_project = "twitter-gcs-to-bq-project";
  std::string storage_label_key = "purpose";
  std::string storage_label_value = "big-data-storage";
  std::string replication_account = "data-replicator";
  std::string domain_suffix = std::string(paths::kDefaultDomainSuffix);

  std::string render_user_project(std::string_view name) const;
  std::string render_log_project(std::string_view name) const;

  bool operator==(const NamingPolicy&) const = default;
};

// One tenant's reconciliation outcome. A tenant lands in exactly one of the
// report's three lists.
struct TenantOutcome {
  std::string tenant;
  std::vector<std::string> created;    // resource ids created this run
  std::vector<std::string> unchanged;  // resource ids verified in place
  std::string error;                   // set only for failures
};

struct ReconcileReport {
  std::vector<TenantOutcome> created;    // at least one resource created
  std::vector<TenantOutcome> unchanged;  // everything already in place
  std::vector<TenantOutcome> failed;
};

// Turns the declarative tenant list into identities, buckets, projects,
// datasets, views and bindings. Every step is an ensure, so runs are
// idempotent and resumable; failures keep partial progress.
class Provisioner {
 public:
  explicit Provisioner(NamingPolicy policy) : policy_(std::move(policy)) {}

  // Ensure-phase: shadow account, bucket in the shared object-store
  // project, owner binding, reader group. False on any sub-step error,
  // partial state retained.
  bool precondition(const TenantSpec& tenant, sim::CloudSim& sim, identity::IdentityStore& ids,
                    const OpContext& ctx, std::vector<std::string>* created = nullptr,
                    std::vector<std::string>* unchanged = nullptr);

  TenantOutcome provision_user(const TenantSpec& tenant, sim::CloudSim& sim,
                               identity::IdentityStore& ids, const OpContext& ctx);
  TenantOutcome provision_log_category(const TenantSpec& tenant, sim::CloudSim& sim,
                                       identity::IdentityStore& ids, const OpContext& ctx);

  ReconcileReport reconcile(const std::vector<TenantSpec>& specs, sim::CloudSim& sim,
                            identity::IdentityStore& ids, const OpContext& ctx);

  const NamingPolicy& policy() const { return policy_; }

 private:
  struct StepTracker;

  NamingPolicy policy_;
};

// One tenant per line: `<kind> <name>` with kind `user` or `log`.
// `#` comments and blank lines are skipped.
Result<std::vector<TenantSpec>> parse_tenant_lines(const std::string& text);
Result<std::vector<TenantSpec>> load_tenant_file(const std::string& path);

std::string render_template(std::string_view tmpl, std::string_view name);

}  // namespace bigbird::provision
