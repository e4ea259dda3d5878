#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bigbird/audit.hpp"
#include "bigbird/cloudsim.hpp"
#include "bigbird/common.hpp"
#include "json.hpp"

namespace bigbird::identity {

enum class PrincipalKind { human_user, service_account_user, replication_service, log_category };
enum class KeyState { active, grace, revoked };

std::string_view kind_name(PrincipalKind k);
std::optional<PrincipalKind> parse_principal_kind(std::string_view s);
std::string_view key_state_name(KeyState s);

// Three-way binding: UNIX name, interactive identity, shadow service
// account. Both emails are deterministic functions of the name and the
// configured domains.
struct PrincipalIdentity {
  std::string unix_name;
  std::string interactive_email;
  std::string shadow_email;
  PrincipalKind kind = PrincipalKind::service_account_user;

  bool operator==(const PrincipalIdentity&) const = default;
};

struct ShadowKey {
  std::string key_id;
  std::string shadow_email;
  Timestamp created_at = 0;
  Timestamp graced_at = 0;  // meaningful once state leaves active
  KeyState state = KeyState::active;
  std::string secret_fingerprint;  // secret material lives in the vault only

  bool operator==(const ShadowKey&) const = default;
};

// Grants exactly the read-only role on exactly one subject resource.
struct ReaderGroup {
  std::string group_email;
  std::string subject;
  std::set<std::string> members;

  bool operator==(const ReaderGroup&) const = default;
};

struct IdentityConfig {
  std::string gsuite_domain = "gsuite.domain";
  std::string service_account_domain = "gserviceaccount.com";
  Duration rotation_interval = 7 * kDay;
  Duration grace_period = 7 * kDay;

  bool operator==(const IdentityConfig&) const = default;
};

// Secret storage abstraction; the control plane never holds secret
// material, only fingerprints.
class KeyVault {
 public:
  virtual ~KeyVault() = default;
  virtual void store(const std::string& key_id, const std::string& secret) = 0;
  virtual std::optional<std::string> fetch(const std::string& key_id) const = 0;
};

class InMemoryVault final : public KeyVault {
 public:
  void store(const std::string& key_id, const std::string& secret) override {
    secrets_[key_id] = secret;
  }
  std::optional<std::string> fetch(const std::string& key_id) const override {
    const auto it = secrets_.find(key_id);
    if (it == secrets_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> secrets_;
};

class IdentityStore : public sim::GroupResolver {
 public:
  // Idempotent: an existing identity is returned unchanged and no event is
  // emitted; creation also mints the first active key.
  Result<PrincipalIdentity> ensure_shadow_account(std::string_view unix_name, PrincipalKind kind,
                                                  const OpContext& ctx);

  // active -> grace, prior grace -> revoked, fresh key becomes active.
  Result<ShadowKey> rotate_key(std::string_view shadow_email, const OpContext& ctx);

  // Creates the group and installs the read-only binding on the subject.
  Result<ReaderGroup> ensure_reader_group(std::string_view subject, sim::CloudSim& sim,
                                          const OpContext& ctx);

  Status add_member(std::string_view group_email, std::string_view principal,
                    const OpContext& ctx);
  Status remove_member(std::string_view group_email, std::string_view principal,
                       const OpContext& ctx);

  bool is_member(std::string_view group_email, std::string_view principal) const override;

  const PrincipalIdentity* find(std::string_view unix_name) const;
  const PrincipalIdentity* find_by_shadow(std::string_view shadow_email) const;
  const ReaderGroup* find_group(std::string_view group_email) const;
  const ReaderGroup* group_for_subject(std::string_view subject) const;
  std::vector<ShadowKey> keys(std::string_view shadow_email) const;
  const std::map<std::string, PrincipalIdentity>& identities() const { return identities_; }
  const std::map<std::string, ReaderGroup>& groups() const { return groups_; }

  // Scheduler hooks used by the virtual clock: next instant at which a
  // rotation or grace expiry is due, and the processor for that instant.
  std::optional<Timestamp> next_rotation_due() const;
  Status run_due_rotations(const OpContext& ctx);

  std::string group_email_for(std::string_view subject) const;

  IdentityConfig config;
  KeyVault* vault = nullptr;  // optional; not copied into dry runs

  nlohmann::ordered_json to_json() const;
  static Result<IdentityStore> from_json(const nlohmann::ordered_json& j);

 private:
  Result<ShadowKey> rotate_locked(const std::string& shadow_email, const OpContext& ctx);
  ShadowKey mint_key(const std::string& shadow_email, Timestamp now);

  std::map<std::string, PrincipalIdentity> identities_;      // by unix_name
  std::map<std::string, std::vector<ShadowKey>> keys_;       // by shadow_email
  std::map<std::string, ReaderGroup> groups_;                // by group_email
  std::map<std::string, std::string> group_by_subject_;
  std::uint64_t key_counter_ = 0;
};

}  // namespace bigbird::identity
