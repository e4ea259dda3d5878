#include "bigbird/provisioner.hpp"

#include <fstream>
#include <sstream>

namespace bigbird::provision {

std::string_view tenant_kind_name(TenantKind k) {
  return k == TenantKind::service_account_user ? "user" : "log";
}

std::optional<TenantKind> parse_tenant_kind(std::string_view s) {
  if (s == "user" || s == "service_account_user") return TenantKind::service_account_user;
  if (s == "log" || s == "log_category") return TenantKind::log_category;
  return std::nullopt;
}

std::string render_template(std::string_view tmpl, std::string_view name) {
  std::string out(tmpl);
  const std::string token = "{name}";
  const std::size_t pos = out.find(token);
  if (pos != std::string::npos) out.replace(pos, token.size(), std::string(name));
  return out;
}

std::string NamingPolicy::render_user_project(std::string_view name) const {
  return render_template(user_project_template, name);
}

std::string NamingPolicy::render_log_project(std::string_view name) const {
  return render_template(log_project_template, name);
}

// Tracks which ensure-steps created something versus found it in place.
struct Provisioner::StepTracker {
  std::vector<std::string> created;
  std::vector<std::string> unchanged;
  std::optional<Error> failure;

  // Runs one ensure step; `exists` short-circuits, `make` must create.
  template <typename ExistsFn, typename MakeFn>
  bool ensure(const std::string& id, ExistsFn&& exists, MakeFn&& make) {
    if (failure) return false;
    if (exists()) {
      unchanged.push_back(id);
      return true;
    }
    if (auto r = make(); !r) {
      failure = r.error();
      return false;
    }
    created.push_back(id);
    return true;
  }
};

bool Provisioner::precondition(const TenantSpec& tenant, sim::CloudSim& sim,
                               identity::IdentityStore& ids, const OpContext& ctx,
                               std::vector<std::string>* created,
                               std::vector<std::string>* unchanged) {
  StepTracker steps;
  const auto kind = tenant.kind == TenantKind::service_account_user
                        ? identity::PrincipalKind::service_account_user
                        : identity::PrincipalKind::log_category;
  const auto ns_kind = tenant.kind == TenantKind::service_account_user
                           ? paths::NamespaceKind::user
                           : paths::NamespaceKind::log;

  steps.ensure("identities/" + tenant.name,
               [&] { return ids.find(tenant.name) != nullptr; },
               [&] {
                 auto r = ids.ensure_shadow_account(tenant.name, kind, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  const std::string gcs_project_rid = sim::project_rid(policy_.gcs_project);
  steps.ensure(gcs_project_rid, [&] { return sim.exists(gcs_project_rid); },
               [&] {
                 auto r = sim.create_project(
                     policy_.gcs_project,
                     {{policy_.storage_label_key, policy_.storage_label_value}}, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  const std::string bucket =
      paths::bucket_name_for(ns_kind, tenant.name, policy_.domain_suffix);
  const std::string bucket_id = sim::bucket_rid(bucket);
  steps.ensure(bucket_id, [&] { return sim.exists(bucket_id); },
               [&] {
                 auto r = sim.create_bucket(bucket, policy_.gcs_project, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  if (!steps.failure) {
    const identity::PrincipalIdentity* id = ids.find(tenant.name);
    steps.ensure(bucket_id + "#owner",
                 [&] { return sim.has_binding(bucket_id, id->shadow_email, sim::Role::owner); },
                 [&] { return sim.bind(bucket_id, id->shadow_email, sim::Role::owner, ctx); });
    steps.ensure("groups/" + bucket_id,
                 [&] { return ids.group_for_subject(bucket_id) != nullptr; },
                 [&] {
                   auto r = ids.ensure_reader_group(bucket_id, sim, ctx);
                   return r ? ok_status() : Status(r.error());
                 });
  }

  if (created != nullptr) {
    created->insert(created->end(), steps.created.begin(), steps.created.end());
  }
  if (unchanged != nullptr) {
    unchanged->insert(unchanged->end(), steps.unchanged.begin(), steps.unchanged.end());
  }
  return !steps.failure.has_value();
}

namespace {

TenantOutcome outcome_from(const TenantSpec& tenant, std::vector<std::string> created,
                           std::vector<std::string> unchanged, std::optional<Error> failure) {
  TenantOutcome out;
  out.tenant = tenant.name;
  out.created = std::move(created);  // partial progress is kept on failure
  out.unchanged = std::move(unchanged);
  if (failure) {
    out.error = std::string(errc_name(failure->code)) + ": " + failure->message;
  }
  return out;
}

}  // namespace

TenantOutcome Provisioner::provision_user(const TenantSpec& tenant, sim::CloudSim& sim,
                                          identity::IdentityStore& ids, const OpContext& ctx) {
  std::vector<std::string> created;
  std::vector<std::string> unchanged;
  if (!precondition(tenant, sim, ids, ctx, &created, &unchanged)) {
    return outcome_from(tenant, std::move(created), std::move(unchanged),
                        Error{Errc::injected_fault, "precondition failed"});
  }
  StepTracker steps;
  steps.created = std::move(created);
  steps.unchanged = std::move(unchanged);

  const std::string project = policy_.render_user_project(tenant.name);
  const std::string project_id = sim::project_rid(project);
  steps.ensure(project_id, [&] { return sim.exists(project_id); },
               [&] {
                 auto r = sim.create_project(
                     project, {{policy_.storage_label_key, policy_.storage_label_value}}, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  const std::string dataset_id = sim::dataset_rid(project, "user");
  steps.ensure(dataset_id, [&] { return sim.exists(dataset_id); },
               [&] {
                 auto r = sim.create_dataset(project, "user", ctx);
                 return r ? ok_status() : Status(r.error());
               });

  if (!steps.failure) {
    const identity::PrincipalIdentity* id = ids.find(tenant.name);
    steps.ensure(dataset_id + "#owner",
                 [&] { return sim.has_binding(dataset_id, id->shadow_email, sim::Role::owner); },
                 [&] { return sim.bind(dataset_id, id->shadow_email, sim::Role::owner, ctx); });
    steps.ensure("groups/" + dataset_id,
                 [&] { return ids.group_for_subject(dataset_id) != nullptr; },
                 [&] {
                   auto r = ids.ensure_reader_group(dataset_id, sim, ctx);
                   return r ? ok_status() : Status(r.error());
                 });
  }
  return outcome_from(tenant, std::move(steps.created), std::move(steps.unchanged),
                      steps.failure);
}

TenantOutcome Provisioner::provision_log_category(const TenantSpec& tenant, sim::CloudSim& sim,
                                                  identity::IdentityStore& ids,
                                                  const OpContext& ctx) {
  std::vector<std::string> created;
  std::vector<std::string> unchanged;
  if (!precondition(tenant, sim, ids, ctx, &created, &unchanged)) {
    return outcome_from(tenant, std::move(created), std::move(unchanged),
                        Error{Errc::injected_fault, "precondition failed"});
  }
  StepTracker steps;
  steps.created = std::move(created);
  steps.unchanged = std::move(unchanged);

  // Aggregated log data is owned by the replication service's shadow
  // account, not by the category identity.
  steps.ensure("identities/" + policy_.replication_account,
               [&] { return ids.find(policy_.replication_account) != nullptr; },
               [&] {
                 auto r = ids.ensure_shadow_account(
                     policy_.replication_account, identity::PrincipalKind::replication_service,
                     ctx);
                 return r ? ok_status() : Status(r.error());
               });

  const std::string project = policy_.render_log_project(tenant.name);
  const std::string project_id = sim::project_rid(project);
  steps.ensure(project_id, [&] { return sim.exists(project_id); },
               [&] {
                 auto r = sim.create_project(
                     project, {{policy_.storage_label_key, policy_.storage_label_value}}, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  const std::string dataset_id = sim::dataset_rid(project, tenant.name);
  steps.ensure(dataset_id, [&] { return sim.exists(dataset_id); },
               [&] {
                 auto r = sim.create_dataset(project, tenant.name, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  if (!steps.failure) {
    const identity::PrincipalIdentity* repl = ids.find(policy_.replication_account);
    steps.ensure(dataset_id + "#owner",
                 [&] { return sim.has_binding(dataset_id, repl->shadow_email, sim::Role::owner); },
                 [&] { return sim.bind(dataset_id, repl->shadow_email, sim::Role::owner, ctx); });
    steps.ensure("groups/" + dataset_id,
                 [&] { return ids.group_for_subject(dataset_id) != nullptr; },
                 [&] {
                   auto r = ids.ensure_reader_group(dataset_id, sim, ctx);
                   return r ? ok_status() : Status(r.error());
                 });
  }

  // Central logs project fronts every category with a view; the view is
  // created after its backing dataset so it always validates.
  const std::string central_id = sim::project_rid(policy_.central_logs_project);
  steps.ensure(central_id, [&] { return sim.exists(central_id); },
               [&] {
                 auto r = sim.create_project(
                     policy_.central_logs_project,
                     {{policy_.storage_label_key, policy_.storage_label_value}}, ctx);
                 return r ? ok_status() : Status(r.error());
               });
  const std::string logs_dataset_id = sim::dataset_rid(policy_.central_logs_project, "logs");
  steps.ensure(logs_dataset_id, [&] { return sim.exists(logs_dataset_id); },
               [&] {
                 auto r = sim.create_dataset(policy_.central_logs_project, "logs", ctx);
                 return r ? ok_status() : Status(r.error());
               });
  const std::string view_id =
      sim::view_rid(policy_.central_logs_project, "logs", tenant.name);
  steps.ensure(view_id, [&] { return sim.exists(view_id); },
               [&] {
                 auto r = sim.create_view(policy_.central_logs_project, "logs", tenant.name,
                                          dataset_id, /*authorized=*/true, ctx);
                 return r ? ok_status() : Status(r.error());
               });
  steps.ensure("groups/" + view_id,
               [&] { return ids.group_for_subject(view_id) != nullptr; },
               [&] {
                 auto r = ids.ensure_reader_group(view_id, sim, ctx);
                 return r ? ok_status() : Status(r.error());
               });

  return outcome_from(tenant, std::move(steps.created), std::move(steps.unchanged),
                      steps.failure);
}

ReconcileReport Provisioner::reconcile(const std::vector<TenantSpec>& specs, sim::CloudSim& sim,
                                       identity::IdentityStore& ids, const OpContext& ctx) {
  ReconcileReport report;
  // Shared infrastructure projects exist before any tenant is processed.
  if (!sim.exists(sim::project_rid(policy_.load_project))) {
    (void)sim.create_project(policy_.load_project, {}, ctx);
  }
  for (const TenantSpec& tenant : specs) {
    TenantOutcome outcome = tenant.kind == TenantKind::service_account_user
                                ? provision_user(tenant, sim, ids, ctx)
                                : provision_log_category(tenant, sim, ids, ctx);
    if (!outcome.error.empty()) {
      report.failed.push_back(std::move(outcome));
    } else if (!outcome.created.empty()) {
      report.created.push_back(std::move(outcome));
    } else {
      report.unchanged.push_back(std::move(outcome));
    }
  }
  return report;
}

Result<std::vector<TenantSpec>> parse_tenant_lines(const std::string& text) {
  std::vector<TenantSpec> specs;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    std::string kind_token;
    std::string name;
    fields >> kind_token >> name;
    const auto kind = parse_tenant_kind(kind_token);
    if (!kind || name.empty()) {
      return Error{Errc::config_invalid,
                   "tenant line " + std::to_string(line_no) + ": expected '<kind> <name>'"};
    }
    if (!is_identifier(name)) {
      return Error{Errc::config_invalid,
                   "tenant line " + std::to_string(line_no) + ": bad name " + name};
    }
    specs.push_back({name, *kind});
  }
  return specs;
}

Result<std::vector<TenantSpec>> load_tenant_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Error{Errc::io_error, "cannot open " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tenant_lines(buffer.str());
}

}  // namespace bigbird::provision
