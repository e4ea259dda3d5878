#include "bigbird/identity.hpp"

#include <algorithm>

namespace bigbird::identity {

using ordered_json = nlohmann::ordered_json;

std::string_view kind_name(PrincipalKind k) {
  switch (k) {
    case PrincipalKind::human_user: return "human_user";
    case PrincipalKind::service_account_user: return "service_account_user";
    case PrincipalKind::replication_service: return "replication_service";
    case PrincipalKind::log_category: return "log_category";
  }
  return "unknown";
}

std::optional<PrincipalKind> parse_principal_kind(std::string_view s) {
  for (PrincipalKind k : {PrincipalKind::human_user, PrincipalKind::service_account_user,
                          PrincipalKind::replication_service, PrincipalKind::log_category}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view key_state_name(KeyState s) {
  switch (s) {
    case KeyState::active: return "active";
    case KeyState::grace: return "grace";
    case KeyState::revoked: return "revoked";
  }
  return "unknown";
}

namespace {

std::optional<KeyState> parse_key_state(std::string_view s) {
  if (s == "active") return KeyState::active;
  if (s == "grace") return KeyState::grace;
  if (s == "revoked") return KeyState::revoked;
  return std::nullopt;
}

std::string sanitize_for_email(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool last_dash = false;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (keep) {
      out.push_back(c);
      last_dash = false;
    } else if (!last_dash && !out.empty()) {
      out.push_back('-');
      last_dash = true;
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

}  // namespace

ShadowKey IdentityStore::mint_key(const std::string& shadow_email, Timestamp now) {
  ++key_counter_;
  ShadowKey key;
  key.key_id = "key-" + hex64(key_counter_).substr(8);
  key.shadow_email = shadow_email;
  key.created_at = now;
  key.state = KeyState::active;
  const std::string secret =
      hex64(fnv1a(shadow_email + "|" + std::to_string(key_counter_) + "|" + std::to_string(now)));
  key.secret_fingerprint = hex64(fnv1a(secret));
  if (vault != nullptr) vault->store(key.key_id, secret);
  return key;
}

Result<PrincipalIdentity> IdentityStore::ensure_shadow_account(std::string_view unix_name,
                                                               PrincipalKind kind,
                                                               const OpContext& ctx) {
  if (!is_identifier(unix_name)) {
    return Error{Errc::invalid_name, "unix name must be [a-z0-9-]: " + std::string(unix_name)};
  }
  const std::string name(unix_name);
  if (const auto it = identities_.find(name); it != identities_.end()) {
    return it->second;  // idempotent, no event
  }
  PrincipalIdentity id;
  id.unix_name = name;
  id.interactive_email = name + "@" + config.gsuite_domain;
  id.shadow_email = name + "@" + config.service_account_domain;
  id.kind = kind;
  ShadowKey key = mint_key(id.shadow_email, ctx.now);
  if (auto r = audit::emit(ctx, audit::Action::identity_create, id.shadow_email,
                           audit::Outcome::success,
                           {{"unix_name", name},
                            {"kind", std::string(kind_name(kind))},
                            {"key_id", key.key_id}});
      !r) {
    return r.error();
  }
  keys_[id.shadow_email].push_back(std::move(key));
  identities_.emplace(name, id);
  return id;
}

Result<ShadowKey> IdentityStore::rotate_key(std::string_view shadow_email, const OpContext& ctx) {
  const std::string email(shadow_email);
  if (!keys_.contains(email)) return Error{Errc::unknown_account, email};
  return rotate_locked(email, ctx);
}

Result<ShadowKey> IdentityStore::rotate_locked(const std::string& shadow_email,
                                               const OpContext& ctx) {
  std::vector<ShadowKey>& ring = keys_.at(shadow_email);
  ShadowKey* active = nullptr;
  ShadowKey* grace = nullptr;
  for (ShadowKey& k : ring) {
    if (k.state == KeyState::active) active = &k;
    if (k.state == KeyState::grace) grace = &k;
  }
  if (active == nullptr) return Error{Errc::unknown_account, shadow_email + ": no active key"};

  ShadowKey fresh = mint_key(shadow_email, ctx.now);
  std::map<std::string, std::string> detail{{"op", "rotate"}, {"new_key", fresh.key_id},
                                            {"graced", active->key_id}};
  if (grace != nullptr) detail["revoked"] = grace->key_id;
  if (auto r = audit::emit(ctx, audit::Action::key_rotate, shadow_email, audit::Outcome::success,
                           std::move(detail));
      !r) {
    return r.error();
  }
  if (grace != nullptr) grace->state = KeyState::revoked;
  active->state = KeyState::grace;
  active->graced_at = ctx.now;
  ShadowKey out = fresh;
  ring.push_back(std::move(fresh));
  return out;
}

std::string IdentityStore::group_email_for(std::string_view subject) const {
  return "readers-" + sanitize_for_email(subject) + "-" + short_hash(subject) + "@" +
         config.gsuite_domain;
}

Result<ReaderGroup> IdentityStore::ensure_reader_group(std::string_view subject,
                                                       sim::CloudSim& sim, const OpContext& ctx) {
  const std::string subj(subject);
  if (const auto it = group_by_subject_.find(subj); it != group_by_subject_.end()) {
    // Idempotent; the read-only binding is re-ensured (a no-op when present).
    if (auto r = sim.bind(subj, it->second, sim::Role::reader, ctx); !r) return r.error();
    return groups_.at(it->second);
  }
  if (!sim.exists(subj)) return Error{Errc::unknown_resource, subj};
  ReaderGroup group;
  group.group_email = group_email_for(subj);
  group.subject = subj;
  if (groups_.contains(group.group_email)) {
    return Error{Errc::already_exists, "group email collision: " + group.group_email};
  }
  if (auto r = audit::emit(ctx, audit::Action::group_change, group.group_email,
                           audit::Outcome::success, {{"op", "create"}, {"subject", subj}});
      !r) {
    return r.error();
  }
  groups_.emplace(group.group_email, group);
  group_by_subject_.emplace(subj, group.group_email);
  if (auto r = sim.bind(subj, group.group_email, sim::Role::reader, ctx); !r) return r.error();
  return group;
}

Status IdentityStore::add_member(std::string_view group_email, std::string_view principal,
                                 const OpContext& ctx) {
  const auto it = groups_.find(std::string(group_email));
  if (it == groups_.end()) return Error{Errc::unknown_group, std::string(group_email)};
  if (it->second.members.contains(std::string(principal))) return ok_status();
  if (auto r = audit::emit(ctx, audit::Action::group_change, it->first, audit::Outcome::success,
                           {{"op", "add_member"}, {"principal", std::string(principal)}});
      !r) {
    return r.error();
  }
  it->second.members.insert(std::string(principal));
  return ok_status();
}

Status IdentityStore::remove_member(std::string_view group_email, std::string_view principal,
                                    const OpContext& ctx) {
  const auto it = groups_.find(std::string(group_email));
  if (it == groups_.end()) return Error{Errc::unknown_group, std::string(group_email)};
  if (!it->second.members.contains(std::string(principal))) return ok_status();
  if (auto r = audit::emit(ctx, audit::Action::group_change, it->first, audit::Outcome::success,
                           {{"op", "remove_member"}, {"principal", std::string(principal)}});
      !r) {
    return r.error();
  }
  it->second.members.erase(std::string(principal));
  return ok_status();
}

bool IdentityStore::is_member(std::string_view group_email, std::string_view principal) const {
  const auto it = groups_.find(std::string(group_email));
  if (it == groups_.end()) return false;
  return it->second.members.contains(std::string(principal));
}

const PrincipalIdentity* IdentityStore::find(std::string_view unix_name) const {
  const auto it = identities_.find(std::string(unix_name));
  return it == identities_.end() ? nullptr : &it->second;
}

const PrincipalIdentity* IdentityStore::find_by_shadow(std::string_view shadow_email) const {
  for (const auto& [name, id] : identities_) {
    if (id.shadow_email == shadow_email) return &id;
  }
  return nullptr;
}

const ReaderGroup* IdentityStore::find_group(std::string_view group_email) const {
  const auto it = groups_.find(std::string(group_email));
  return it == groups_.end() ? nullptr : &it->second;
}

const ReaderGroup* IdentityStore::group_for_subject(std::string_view subject) const {
  const auto it = group_by_subject_.find(std::string(subject));
  return it == group_by_subject_.end() ? nullptr : &groups_.at(it->second);
}

std::vector<ShadowKey> IdentityStore::keys(std::string_view shadow_email) const {
  const auto it = keys_.find(std::string(shadow_email));
  return it == keys_.end() ? std::vector<ShadowKey>{} : it->second;
}

std::optional<Timestamp> IdentityStore::next_rotation_due() const {
  std::optional<Timestamp> due;
  const auto consider = [&](Timestamp t) {
    if (!due || t < *due) due = t;
  };
  for (const auto& [email, ring] : keys_) {
    for (const ShadowKey& k : ring) {
      if (k.state == KeyState::active) consider(k.created_at + config.rotation_interval);
      if (k.state == KeyState::grace) consider(k.graced_at + config.grace_period);
    }
  }
  return due;
}

Status IdentityStore::run_due_rotations(const OpContext& ctx) {
  // Rotations first: a rotation revokes the prior grace key itself, so a
  // coincident grace expiry collapses into the same event.
  std::vector<std::string> due_rotation;
  for (const auto& [email, ring] : keys_) {
    for (const ShadowKey& k : ring) {
      if (k.state == KeyState::active && k.created_at + config.rotation_interval <= ctx.now) {
        due_rotation.push_back(email);
      }
    }
  }
  for (const std::string& email : due_rotation) {
    if (auto r = rotate_locked(email, ctx); !r) return r.error();
  }
  for (auto& [email, ring] : keys_) {
    for (ShadowKey& k : ring) {
      if (k.state == KeyState::grace && k.graced_at + config.grace_period <= ctx.now) {
        if (auto r = audit::emit(ctx, audit::Action::key_rotate, email, audit::Outcome::success,
                                 {{"op", "revoke_grace"}, {"key_id", k.key_id}});
            !r) {
          return r.error();
        }
        k.state = KeyState::revoked;
      }
    }
  }
  return ok_status();
}

nlohmann::ordered_json IdentityStore::to_json() const {
  ordered_json j;
  ordered_json ids = ordered_json::array();
  for (const auto& [name, id] : identities_) {
    ids.push_back({{"unix_name", id.unix_name},
                   {"interactive_email", id.interactive_email},
                   {"shadow_email", id.shadow_email},
                   {"kind", std::string(kind_name(id.kind))}});
  }
  j["identities"] = std::move(ids);

  ordered_json keys = ordered_json::object();
  for (const auto& [email, ring] : keys_) {
    ordered_json arr = ordered_json::array();
    for (const ShadowKey& k : ring) {
      arr.push_back({{"key_id", k.key_id},
                     {"created_at", k.created_at},
                     {"graced_at", k.graced_at},
                     {"state", std::string(key_state_name(k.state))},
                     {"fingerprint", k.secret_fingerprint}});
    }
    keys[email] = std::move(arr);
  }
  j["keys"] = std::move(keys);

  ordered_json groups = ordered_json::array();
  for (const auto& [email, g] : groups_) {
    groups.push_back({{"group_email", g.group_email},
                      {"subject", g.subject},
                      {"members", g.members}});
  }
  j["groups"] = std::move(groups);
  j["key_counter"] = key_counter_;
  return j;
}

Result<IdentityStore> IdentityStore::from_json(const nlohmann::ordered_json& j) {
  IdentityStore store;
  try {
    for (const auto& n : j.at("identities")) {
      PrincipalIdentity id;
      id.unix_name = n.at("unix_name").get<std::string>();
      id.interactive_email = n.at("interactive_email").get<std::string>();
      id.shadow_email = n.at("shadow_email").get<std::string>();
      const auto kind = parse_principal_kind(n.at("kind").get<std::string>());
      if (!kind) return Error{Errc::corrupt_snapshot, "bad principal kind"};
      id.kind = *kind;
      store.identities_.emplace(id.unix_name, std::move(id));
    }
    for (const auto& [email, arr] : j.at("keys").items()) {
      std::vector<ShadowKey>& ring = store.keys_[email];
      for (const auto& n : arr) {
        ShadowKey k;
        k.key_id = n.at("key_id").get<std::string>();
        k.shadow_email = email;
        k.created_at = n.at("created_at").get<Timestamp>();
        k.graced_at = n.at("graced_at").get<Timestamp>();
        const auto state = parse_key_state(n.at("state").get<std::string>());
        if (!state) return Error{Errc::corrupt_snapshot, "bad key state"};
        k.state = *state;
        k.secret_fingerprint = n.at("fingerprint").get<std::string>();
        ring.push_back(std::move(k));
      }
    }
    for (const auto& n : j.at("groups")) {
      ReaderGroup g;
      g.group_email = n.at("group_email").get<std::string>();
      g.subject = n.at("subject").get<std::string>();
      g.members = n.at("members").get<std::set<std::string>>();
      store.group_by_subject_.emplace(g.subject, g.group_email);
      store.groups_.emplace(g.group_email, std::move(g));
    }
    store.key_counter_ = j.at("key_counter").get<std::uint64_t>();
  } catch (const ordered_json::exception& ex) {
    return Error{Errc::corrupt_snapshot, std::string("identity state: ") + ex.what()};
  }
  return store;
}

}  // namespace bigbird::identity
