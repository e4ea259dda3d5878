#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigbird/common.hpp"

namespace bigbird::audit {

enum class Action {
  project_create,
  bucket_create,
  dataset_create,
  dataset_delete,
  table_create,
  view_create,
  data_read,
  data_write,
  acl_change,
  group_change,
  label_change,
  identity_create,
  key_rotate,
  job_transition,
  reservation_change,
};

enum class Outcome { success, denied, failed };

std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view s);
std::string_view outcome_name(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

struct Event {
  std::uint64_t sequence = 0;
  Timestamp timestamp = 0;
  std::string principal;
  Action action = Action::project_create;
  std::string resource;
  Outcome outcome = Outcome::success;
  std::map<std::string, std::string> detail;

  bool operator==(const Event&) const = default;
};

std::string to_json_line(const Event& e);
Result<Event> parse_json_line(const std::string& line);

// Append-only organization sink. Entries are never modified or deleted;
// sequence numbers are dense, starting at 1. When file-backed, each append
// is flushed before the originating operation is allowed to acknowledge
// (write-ahead contract).
class Sink {
 public:
  Sink() = default;  // in-memory only

  // Attach an NDJSON file. Existing entries are loaded and the sequence
  // continues from the last persisted number.
  Status open(const std::string& path);

  // Assigns the next sequence number, persists, and returns it.
  Result<std::uint64_t> append(Event e);

  const std::vector<Event>& events() const { return events_; }
  std::uint64_t next_sequence() const { return next_seq_; }
  const std::string& path() const { return path_; }

  struct Filter {
    std::optional<std::string> principal;
    std::optional<Action> action;
    std::optional<std::string> resource;
    std::optional<Timestamp> from;
    std::optional<Timestamp> to;
  };
  std::vector<Event> query(const Filter& f) const;

  // Fault injection: makes append() fail with SinkUnavailable.
  void set_fail_appends(bool fail) { fail_appends_ = fail; }

 private:
  std::string path_;
  std::ofstream out_;
  std::vector<Event> events_;
  std::uint64_t next_seq_ = 1;
  bool fail_appends_ = false;
};

// Everything a mutating operation needs to know about its invocation.
// A null sink drops events; dry runs use that to stay side-effect free.
struct OpContext {
  Timestamp now = 0;
  Sink* sink = nullptr;
  std::string principal = "system";
};

// One event per control-plane operation invocation:
//   - successful mutations log outcome=success,
//   - quota rejections and access denials log outcome=denied,
//   - simulated downstream failures log outcome=failed,
//   - validation errors (AlreadyExists, Unknown*) and idempotent no-ops
//     log nothing.
Status emit(const OpContext& ctx, Action action, std::string resource, Outcome outcome,
            std::map<std::string, std::string> detail = {});

}  // namespace bigbird::audit

namespace bigbird {
using audit::OpContext;
}  // namespace bigbird
