#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sepmin/harness.hpp"

namespace sepmin {

// One row of the config schema; the same table drives validation, --help and
// the docs, so they cannot drift apart.
struct ConfigKeyDoc {
  const char* path;
  const char* type;
  const char* desc;
};

const std::vector<ConfigKeyDoc>& config_schema();
std::string config_schema_text();

// Parses and validates a config document. Unknown keys are rejected and every
// error names the offending key. The canonical-form hash of the document is
// carried into the parsed experiment and every trace written from it.
ExperimentSpec parse_config(const nlohmann::json& doc);
ExperimentSpec load_config_file(const std::string& path);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iters;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  int threads = 1;
};

void apply_overrides(ExperimentSpec& spec, const CliOverrides& ov);

}  // namespace sepmin
