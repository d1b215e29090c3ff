#pragma once

#include <string>

#include "mdpde/experiment.hpp"

namespace mdpde {

/// Loads an ExperimentConfig from a JSON or TOML file; the format is chosen
/// by extension (.json / .toml), falling back to content sniffing. Absent
/// keys keep their defaults. Keys mirror the ExperimentConfig field names.
ExperimentConfig load_config_file(const std::string& filename);

ExperimentConfig config_from_json(const std::string& text);

/// Flat TOML subset: `key = value` lines, numbers, quoted strings and
/// (nested) arrays; comments with '#'. Tables are not supported.
ExperimentConfig config_from_toml(const std::string& text);

std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);

/// Config echo plus RNG algorithm name, code version and the replication
/// conventions, written next to the experiment CSVs.
std::string experiment_metadata_json(const ExperimentConfig& cfg);

}  // namespace mdpde
