#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bigbird {

// All control-plane time is virtual: seconds on a deterministic clock.
using Timestamp = std::int64_t;
using Duration = std::int64_t;

inline constexpr Duration kSecond = 1;
inline constexpr Duration kMinute = 60;
inline constexpr Duration kDay = 86400;

enum class Errc {
  malformed_path,
  owner_name_unmappable,
  foreign_bucket,
  invalid_name,
  unknown_account,
  unknown_resource,
  unknown_group,
  already_exists,
  unknown_parent,
  quota_exceeded,
  access_denied,
  unsupported_format,
  partitioned_unsupported,
  insufficient_default_capacity,
  duplicate_reservation,
  unknown_reservation,
  reservation_busy,
  request_exceeds_reservation,
  unknown_scope,
  unknown_job,
  config_invalid,
  version_mismatch,
  corrupt_snapshot,
  sink_unavailable,
  injected_fault,
  io_error,
};

std::string_view errc_name(Errc c);

struct Error {
  Errc code;
  std::string message;
};

template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    assert(ok());
    return std::get<T>(v_);
  }
  T& value() {
    assert(ok());
    return std::get<T>(v_);
  }
  const Error& error() const {
    assert(!ok());
    return std::get<Error>(v_);
  }

 private:
  std::variant<T, Error> v_;
};

struct Unit {
  bool operator==(const Unit&) const = default;
};
using Status = Result<Unit>;

inline Status ok_status() { return Status(Unit{}); }

// FNV-1a, used wherever the control plane needs an opaque but
// reproducible identifier (key fingerprints, group-name suffixes).
std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);
std::string short_hash(std::string_view s);

// Lowercase alphanumerics and hyphens; the character set shared by
// datacenter, cluster and owner names as well as project ids.
bool is_identifier(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

}  // namespace bigbird
