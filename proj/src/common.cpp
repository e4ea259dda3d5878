#include "bigbird/common.hpp"

#include <array>

namespace bigbird {

std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::malformed_path: return "MalformedPath";
    case Errc::owner_name_unmappable: return "OwnerNameUnmappable";
    case Errc::foreign_bucket: return "ForeignBucket";
    case Errc::invalid_name: return "InvalidName";
    case Errc::unknown_account: return "UnknownAccount";
    case Errc::unknown_resource: return "UnknownResource";
    case Errc::unknown_group: return "UnknownGroup";
    case Errc::already_exists: return "AlreadyExists";
    case Errc::unknown_parent: return "UnknownParent";
    case Errc::quota_exceeded: return "QuotaExceeded";
    case Errc::access_denied: return "AccessDenied";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::partitioned_unsupported: return "PartitionedUnsupported";
    case Errc::insufficient_default_capacity: return "InsufficientDefaultCapacity";
    case Errc::duplicate_reservation: return "DuplicateReservation";
    case Errc::unknown_reservation: return "UnknownReservation";
    case Errc::reservation_busy: return "ReservationBusy";
    case Errc::request_exceeds_reservation: return "RequestExceedsReservation";
    case Errc::unknown_scope: return "UnknownScope";
    case Errc::unknown_job: return "UnknownJob";
    case Errc::config_invalid: return "ConfigInvalid";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_snapshot: return "CorruptSnapshot";
    case Errc::sink_unavailable: return "SinkUnavailable";
    case Errc::injected_fault: return "InjectedFault";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string short_hash(std::string_view s) { return hex64(fnv1a(s)).substr(0, 8); }

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace bigbird
