#pragma once

#include "nesdf/backbone.hpp"
#include "nesdf/head.hpp"
#include "nesdf/planner.hpp"
#include "nesdf/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace nesdf::cli {

/// Bad config file, unknown key or invalid value. Exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `section.key -> value` store over a fixed schema with defaults.
/// Top-level keys (seed, out) have no section.
class ConfigMap {
public:
    ConfigMap(); // all defaults

    /// `key = value` lines, `[section]` headers, `#` or `;` comments.
    void loadFile(const std::filesystem::path& path);
    void parseText(const std::string& text, const std::string& origin = "<config>");
    /// Unknown key -> ConfigError naming it.
    void set(const std::string& key, const std::string& value);

    bool isSet(const std::string& key) const; // non-empty value
    const std::string& raw(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string str(const std::string& key) const;
    double real(const std::string& key) const;
    long long integer(const std::string& key, long long lo, long long hi) const;
    bool flag(const std::string& key) const;
    Vec3 point(const std::string& key) const;
    std::uint64_t seed() const;

private:
    std::map<std::string, std::string> values_;
};

/// Built-in names (sphere_box, sphere, clutter) or a primitive list.
AnalyticScene parseSceneSpec(const std::string& spec);
/// scene.spec if set; nullopt otherwise.
std::optional<AnalyticScene> sceneFrom(const ConfigMap& cfg);
/// Same, but a missing spec is a ConfigError naming scene.spec.
AnalyticScene requireScene(const ConfigMap& cfg);

BackboneConfig backboneConfig(const ConfigMap& cfg);
PretrainConfig pretrainConfig(const ConfigMap& cfg, std::uint64_t seed);
HeadConfig headConfig(const ConfigMap& cfg);
HeadTrainConfig headTrainConfig(const ConfigMap& cfg, std::uint64_t seed);
GradientTarget gradientTarget(const ConfigMap& cfg);
RolloutConfig rolloutConfig(const ConfigMap& cfg);
SlicePlane evalPlane(const ConfigMap& cfg);

} // namespace nesdf::cli
