#include "bigbird/paths.hpp"

namespace bigbird::paths {

std::string_view to_string(NamespaceKind k) {
  return k == NamespaceKind::user ? "user" : "log";
}

std::optional<NamespaceKind> parse_namespace_kind(std::string_view s) {
  if (s == "user") return NamespaceKind::user;
  if (s == "log") return NamespaceKind::log;
  return std::nullopt;
}

std::string OnPremPath::str() const {
  std::string out = "/" + datacenter + "/" + cluster + "/" + std::string(to_string(kind)) + "/" + owner;
  for (const std::string& seg : relative) {
    out += "/";
    out += seg;
  }
  return out;
}

std::string LogicalPath::str() const {
  std::string out = "gcs/" + std::string(to_string(kind)) + "/" + owner;
  for (const std::string& seg : relative) {
    out += "/";
    out += seg;
  }
  return out;
}

std::string PhysicalBucketPath::str() const {
  return "gs://" + bucket_name + "/" + object_key;
}

namespace {

Error malformed(std::string_view text, std::string_view why) {
  return Error{Errc::malformed_path, std::string(text) + ": " + std::string(why)};
}

// Shared tail of the on-prem and logical grammars: kind / owner / relative...
Result<Unit> check_segments(std::string_view text, const std::vector<std::string>& relative) {
  for (const std::string& seg : relative) {
    if (seg.empty()) return malformed(text, "empty path segment");
  }
  return ok_status();
}

}  // namespace

Result<OnPremPath> parse_onprem(std::string_view text) {
  if (text.empty() || text[0] != '/') return malformed(text, "must begin with '/'");
  std::vector<std::string> segs = split(text.substr(1), '/');
  if (segs.size() < 4) return malformed(text, "need at least /dc/cluster/kind/owner");
  OnPremPath p;
  p.datacenter = segs[0];
  p.cluster = segs[1];
  const auto kind = parse_namespace_kind(segs[2]);
  if (!kind) return malformed(text, "unknown namespace kind '" + segs[2] + "'");
  p.kind = *kind;
  p.owner = segs[3];
  if (!is_identifier(p.datacenter) || !is_identifier(p.cluster)) {
    return malformed(text, "datacenter and cluster must be [a-z0-9-]");
  }
  if (!is_identifier(p.owner)) return malformed(text, "owner must be [a-z0-9-]");
  p.relative.assign(segs.begin() + 4, segs.end());
  if (auto r = check_segments(text, p.relative); !r) return r.error();
  return p;
}

Result<LogicalPath> parse_logical(std::string_view text) {
  std::vector<std::string> segs = split(text, '/');
  if (segs.size() < 3 || segs[0] != "gcs") {
    return malformed(text, "expected gcs/<kind>/<owner>/...");
  }
  LogicalPath l;
  const auto kind = parse_namespace_kind(segs[1]);
  if (!kind) return malformed(text, "unknown namespace kind '" + segs[1] + "'");
  l.kind = *kind;
  l.owner = segs[2];
  if (!is_identifier(l.owner)) return malformed(text, "owner must be [a-z0-9-]");
  l.relative.assign(segs.begin() + 3, segs.end());
  if (auto r = check_segments(text, l.relative); !r) return r.error();
  return l;
}

Result<PhysicalBucketPath> parse_gs_uri(std::string_view uri) {
  constexpr std::string_view scheme = "gs://";
  if (uri.substr(0, scheme.size()) != scheme) return malformed(uri, "expected gs:// scheme");
  const std::string_view rest = uri.substr(scheme.size());
  const std::size_t slash = rest.find('/');
  PhysicalBucketPath p;
  if (slash == std::string_view::npos) {
    p.bucket_name = std::string(rest);
  } else {
    p.bucket_name = std::string(rest.substr(0, slash));
    p.object_key = std::string(rest.substr(slash + 1));
  }
  if (p.bucket_name.empty()) return malformed(uri, "empty bucket name");
  return p;
}

LogicalPath to_logical(const OnPremPath& p) {
  return LogicalPath{p.kind, p.owner, p.relative};
}

std::string bucket_name_for(NamespaceKind kind, std::string_view owner,
                            std::string_view domain_suffix) {
  return std::string(to_string(kind)) + "." + std::string(owner) + ".dp." +
         std::string(domain_suffix);
}

Result<PhysicalBucketPath> to_physical(const LogicalPath& l, std::string_view domain_suffix) {
  if (!is_identifier(l.owner)) {
    return Error{Errc::owner_name_unmappable,
                 "owner '" + l.owner + "' contains characters illegal in bucket names"};
  }
  PhysicalBucketPath p;
  p.bucket_name = bucket_name_for(l.kind, l.owner, domain_suffix);
  p.object_key = join(l.relative, '/');
  return p;
}

Result<LogicalPath> from_physical(const PhysicalBucketPath& p, std::string_view domain_suffix) {
  const std::string tail = ".dp." + std::string(domain_suffix);
  const auto foreign = [&](std::string_view why) {
    return Error{Errc::foreign_bucket, p.bucket_name + ": " + std::string(why)};
  };
  if (p.bucket_name.size() <= tail.size() ||
      p.bucket_name.substr(p.bucket_name.size() - tail.size()) != tail) {
    return foreign("does not end with " + tail);
  }
  const std::string head = p.bucket_name.substr(0, p.bucket_name.size() - tail.size());
  const std::size_t dot = head.find('.');
  if (dot == std::string::npos) return foreign("missing <kind>.<owner> prefix");
  const auto kind = parse_namespace_kind(head.substr(0, dot));
  if (!kind) return foreign("unknown namespace kind");
  const std::string owner = head.substr(dot + 1);
  if (!is_identifier(owner)) return foreign("owner is not [a-z0-9-]");
  LogicalPath l;
  l.kind = *kind;
  l.owner = owner;
  if (!p.object_key.empty()) l.relative = split(p.object_key, '/');
  return l;
}

}  // namespace bigbird::paths
