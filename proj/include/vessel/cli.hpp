#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vessel/numeric.hpp"

namespace vessel::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Input document and run options for one batch command.
struct RunConfig {
  std::string command;
  std::string input_path;
  std::string output_path;  // empty: stdout
  ToleranceProfile tol;
  unsigned seed = 0;
  std::string format = "text";  // "text" | "structured"
  json input;
};

struct Report {
  std::string command;
  std::string status;  // "pass" | "fail" | "error"
  json payload;
  unsigned seed = 0;
  ToleranceProfile tol;
  std::string version = kVersion;

  json to_json() const;
  static Report from_json(const json& j);
  int exit_code() const {
    if (status == "pass") return 0;
    if (status == "fail") return 1;
    return 2;
  }
};

/// Itemized schema/flag errors collected during parsing.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& items);
  std::vector<std::string> items;
};

/// Parses command-line arguments (without the program name) and loads the
/// input document. Unknown commands, flags, and document fields are rejected.
RunConfig parse_config(const std::vector<std::string>& args);

/// Same, but with the document supplied directly (for tests).
RunConfig parse_config(const std::vector<std::string>& args, const json& document);

/// Routes the command to the underlying operation; exceptions from the
/// modules come back as an "error" report rather than propagating.
Report dispatch(const RunConfig& config);

/// Renders the report: aligned text or the structured JSON document.
std::string emit_report(const Report& r, const std::string& format);

// JSON (de)serialization helpers shared with the test suite.
json complex_to_json(Complex z);
Complex complex_from_json(const json& j, const std::string& where);
json matrix_to_json(const CMat& m);
CMat matrix_from_json(const json& j, const std::string& where);

}  // namespace vessel::cli
