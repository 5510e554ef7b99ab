#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wpolab/agent.hpp"

namespace wpolab {

inline constexpr const char* kVersion = "wpolab-0.1.0";

// Grid-flow experiment settings (cmd flow).
struct FlowConfig {
  std::string q = "neg_quadratic";  // neg_quadratic | paper_quartic | constant
  std::string kind = "wasserstein";  // wasserstein | fisher_rao
  double mean = 1.0;
  double stddev = 1.0;
  double lo = -15.0;
  double hi = 15.0;
  int cells = 4096;
  double dt = 1e-3;
  long steps = 200;
  long log_every = 10;
  std::string squash = "identity";
  double squash_scale = 1.0;
};

// Everything a run needs: agent settings plus experiment and output keys.
struct RunConfig {
  AgentConfig agent;
  MogConfig mog;
  FlowConfig flow;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "runs";
  std::string version = kVersion;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string doc;
};

// Registry of every accepted key with its default and one-line doc.
const std::vector<ConfigKey>& config_keys();

using ConfigMap = std::map<std::string, std::string>;

ConfigMap default_config_map();

// Flat key=value text, "#" starts a comment, blank lines ignored. Unknown
// keys and malformed lines raise with the line number. Returns defaults
// overlaid with the file's assignments.
ConfigMap parse_config_text(const std::string& text, const std::string& source_name);
ConfigMap parse_config_file(const std::string& path);

// One "key=value" override (the --set flag). Unknown keys raise.
void apply_override(ConfigMap& map, const std::string& assignment);

// Typed view of a map; raises on type mismatches or out-of-range values,
// naming the key and the valid options for enums.
RunConfig config_from_map(const ConfigMap& map);

// Full snapshot; round-trips through parse_config_text to an equal map.
ConfigMap config_to_map(const RunConfig& cfg);

std::string render_config(const ConfigMap& map);
void write_manifest(const std::string& path, const ConfigMap& map);

std::vector<std::uint64_t> parse_seed_list(const std::string& csv);

}  // namespace wpolab
