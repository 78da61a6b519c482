#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paracr/report.hpp"

namespace paracr::cli {

inline constexpr const char* kToolName = "paracr";
inline constexpr const char* kToolVersion = "1.0.0";

/// Malformed job file or invalid job parameters (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One `key = value` line. Values are a quoted string, a bare token, or a
/// bracketed list of numbers.
struct ConfigEntry {
  std::string key;
  std::string text;
  bool quoted = false;
  bool is_list = false;
  std::vector<double> list;
  int line = 0;
};

struct JobConfig {
  std::string kind;
  std::uint64_t seed = 42;
  std::string output;
  /// Entries of each section in file order ([job] without kind/seed/output).
  std::vector<ConfigEntry> job, exprs, domain, tolerances;
};

const std::vector<std::string>& job_kinds();

/// Parses the job-file text; throws ConfigError with the offending line.
JobConfig parse_config(std::string_view text);
JobConfig load_config(const std::string& path);

struct JobResult {
  Report report;
  /// Effective parameters (defaults filled in), rendered as the job echo.
  nlohmann::ordered_json echo;
  std::uint64_t seed = 42;
};

/// Dispatches to the pipeline for cfg.kind. Throws ConfigError on missing,
/// unknown or unparsable fields.
JobResult run_job(const JobConfig& cfg);

enum class Format { Json, Text };

nlohmann::ordered_json report_json(const JobResult& r);
std::string render_report(const JobResult& r, Format fmt);

/// 0 all pass, 1 any fail, 3 inconclusive without failures.
int exit_status(const Report& r);

/// Parse, canonical print and first derivatives of one expression.
std::string check_expr(std::string_view text);

}  // namespace paracr::cli
