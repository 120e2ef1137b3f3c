#pragma once

// Flat dotted-key configuration ("stage1.learning_rate" -> "0.001").
//
// Two file syntaxes are accepted:
//   * JSON: nested objects are flattened with '.', arrays become
//     comma-separated lists;
//   * key = value lines with optional [section] headers that prefix the
//     following keys, '#' comments and optionally quoted string values.
// Values set later (e.g. from command-line flags) override earlier ones.

#include "pcc/experiment.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace pcc {

class ConfigMap {
public:
    /// Throws ParseError with the offending line.
    static ConfigMap parse(std::string_view text, const std::string& source_name = "<config>");
    static ConfigMap load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Parses "key=value"; throws InvalidInput without '='.
    void set_assignment(std::string_view assignment);
    void merge(const ConfigMap& overrides);

    bool contains(const std::string& key) const { return values_.contains(key); }
    std::optional<std::string> get(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    /// Canonical JSON (sorted keys, string values), for provenance.
    std::string to_json() const;

private:
    std::map<std::string, std::string> values_;
};

/// Applies recognised keys on top of default_experiment_config(). Unknown
/// keys and malformed numbers throw InvalidInput.
ExperimentConfig experiment_config_from(const ConfigMap& config);

/// Every key experiment_config_from understands, with its effective value.
ConfigMap to_config_map(const ExperimentConfig& config);

/// Synth-only subset ("synth.*" keys plus "seed").
SynthConfig synth_config_from(const ConfigMap& config, SynthConfig base = {});

/// Applies "<prefix>.<field>" keys onto `base`.
StageConfig stage_config_from(const ConfigMap& config, const std::string& prefix, StageConfig base);

} // namespace pcc
