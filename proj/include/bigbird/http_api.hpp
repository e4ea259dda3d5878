#pragma once

#include <string>

#include "bigbird/common.hpp"
#include "bigbird/system.hpp"

namespace bigbird::api {

// Read-only admin API:
//   GET /v1/metrics?metric=<m>&project=<p>
//   GET /v1/jobs?project=<p>&state=<s>&type=<t>
//   GET /v1/audit?principal=<p>&action=<a>&from=<ts>&to=<ts>
// Server state is a snapshot of the system at start; mutating commands run
// out-of-process and are not reflected until restart.
class AdminServer {
 public:
  explicit AdminServer(const System& system) : system_(system) {}

  // Blocks serving requests; returns on stop() or bind failure.
  Status serve(const std::string& host, int port);
  void stop();

  // Request handlers, exposed for in-process tests.
  std::string metrics_json(const std::string& metric_filter,
                           const std::string& project_filter) const;
  Result<std::string> jobs_json(const std::string& project, const std::string& state,
                                const std::string& type) const;
  Result<std::string> audit_json(const std::string& principal, const std::string& action,
                                 const std::string& from, const std::string& to) const;

 private:
  const System& system_;
  void* server_ = nullptr;  // httplib::Server, kept out of the header
};

}  // namespace bigbird::api
