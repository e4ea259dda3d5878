#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigbird/common.hpp"

namespace bigbird::paths {

inline constexpr std::string_view kDefaultDomainSuffix = "twitter.domain";

enum class NamespaceKind { user, log };

std::string_view to_string(NamespaceKind k);
std::optional<NamespaceKind> parse_namespace_kind(std::string_view s);

// On-premise HDFS address: /<datacenter>/<cluster>/<kind>/<owner>/<relative...>
struct OnPremPath {
  std::string datacenter;
  std::string cluster;
  NamespaceKind kind = NamespaceKind::user;
  std::string owner;
  std::vector<std::string> relative;

  std::string str() const;
  bool operator==(const OnPremPath&) const = default;
};

// Cluster-independent intermediate address: gcs/<kind>/<owner>/<relative...>
struct LogicalPath {
  NamespaceKind kind = NamespaceKind::user;
  std::string owner;
  std::vector<std::string> relative;

  std::string str() const;
  bool operator==(const LogicalPath&) const = default;
};

// Bucket address: gs://<kind>.<owner>.dp.<domain_suffix>/<object_key>
struct PhysicalBucketPath {
  std::string bucket_name;
  std::string object_key;

  std::string str() const;
  bool operator==(const PhysicalBucketPath&) const = default;
};

// Datacenter, cluster and owner are [a-z0-9-]; relative segments are taken
// verbatim but must be non-empty (no doubled or trailing slashes).
Result<OnPremPath> parse_onprem(std::string_view text);

Result<LogicalPath> parse_logical(std::string_view text);

Result<PhysicalBucketPath> parse_gs_uri(std::string_view uri);

LogicalPath to_logical(const OnPremPath& p);

Result<PhysicalBucketPath> to_physical(const LogicalPath& l,
                                       std::string_view domain_suffix = kDefaultDomainSuffix);

Result<LogicalPath> from_physical(const PhysicalBucketPath& p,
                                  std::string_view domain_suffix = kDefaultDomainSuffix);

std::string bucket_name_for(NamespaceKind kind, std::string_view owner,
                            std::string_view domain_suffix = kDefaultDomainSuffix);

}  // namespace bigbird::paths
