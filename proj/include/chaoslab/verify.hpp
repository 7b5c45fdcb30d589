#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chaoslab/records.hpp"

namespace chaoslab {

/// warn marks a documented disagreement between a printed formula and an
/// independent oracle; it never fails a run.
enum class CheckStatus { pass, fail, warn };
std::string_view to_string(CheckStatus status);

struct CheckResult {
  std::string suite;
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double value = 0.0;
  double reference = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  int threads = 0;  // 0: default_threads()
};

std::vector<std::string> suite_names();

/// Throws DomainError for an unknown suite.
std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& options);

/// One line per check: "STATUS suite/name: detail".
std::string format_check(const CheckResult& result);

Table checks_table(const std::vector<CheckResult>& results);

}  // namespace chaoslab
