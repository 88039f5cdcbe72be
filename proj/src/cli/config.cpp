#include "nesdf/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nesdf::cli {

namespace {

const std::map<std::string, std::string>& schema()
{
    static const std::map<std::string, std::string> defaults = {
        {"seed", "0"},
        {"out", "run"},
        {"scene.spec", ""},
        {"backbone.frequencies", "2"},
        {"backbone.depth", "8"},
        {"backbone.width", "128"},
        {"backbone.skip", "0"},
        {"backbone.steps", "2000"},
        {"backbone.batch", "256"},
        {"backbone.learning_rate", "0.001"},
        {"backbone.supervision_resolution", "128"},
        {"oracle.resolution", "128"},
        {"oracle.threshold", "auto"},
        {"oracle.source", "backbone"},
        {"oracle.import", ""},
        {"head.depth", "2"},
        {"head.embed_dim", "16"},
        {"head.r_fixed", "0.05"},
        {"head.hidden_width", "0"},
        {"head.epochs", "300"},
        {"head.batch", "1000"},
        {"head.learning_rate", "0.01"},
        {"head.gradient", "logit"},
        {"eval.axis", "z"},
        {"eval.offset", "0"},
        {"eval.resolution", "64"},
        {"eval.naive_epochs", "300"},
        {"eval.naive_batch", "1000"},
        {"plan.start", "-0.8,0.3,0.1"},
        {"plan.goal", "0.8,-0.2,0"},
        {"plan.field", "head"},
        {"plan.dt", "0.01"},
        {"plan.max_steps", "5000"},
        {"plan.tolerance", "0.05"},
        {"plan.goal_gain", "1"},
        {"plan.goal_damping", "2"},
        {"plan.goal_softening", "0.05"},
        {"plan.obstacle_gain", "8"},
        {"plan.obstacle_length_scale", "0.15"},
        {"plan.obstacle_damping", "2"},
        {"plan.epsilon", "1e-6"},
        {"plan.robot_radius", "0.02"},
        {"plan.calibration_probes", "5000"},
        {"plan.overlay", "true"},
    };
    return defaults;
}

std::string trim(std::string s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parseReal(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + text + "'");
    return v;
}

} // namespace

ConfigMap::ConfigMap() : values_(schema()) {}

void ConfigMap::loadFile(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    parseText(ss.str(), path.string());
}

void ConfigMap::parseText(const std::string& text, const std::string& origin)
{
    std::istringstream in(text);
    std::string line, section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto comment = line.find_first_of("#;");
        // ';' also separates scene primitives, so only treat it as a comment at line start
        if (comment != std::string::npos && (line[comment] == '#' || trim(line.substr(0, comment)).empty()))
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineNo) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineNo) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
    }
}

void ConfigMap::set(const std::string& key, const std::string& value)
{
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

bool ConfigMap::isSet(const std::string& key) const { return !trim(raw(key)).empty(); }

const std::string& ConfigMap::raw(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

std::string ConfigMap::str(const std::string& key) const { return trim(raw(key)); }

double ConfigMap::real(const std::string& key) const { return parseReal(key, raw(key)); }

long long ConfigMap::integer(const std::string& key, long long lo, long long hi) const
{
    const std::string t = str(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected an integer, got '" + t + "'");
    if (v < lo || v > hi)
        throw ConfigError(key + ": " + t + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

bool ConfigMap::flag(const std::string& key) const
{
    const std::string t = str(key);
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + t + "'");
}

Vec3 ConfigMap::point(const std::string& key) const
{
    std::istringstream in(str(key));
    std::string part;
    Vec3 p;
    int n = 0;
    while (std::getline(in, part, ',')) {
        if (n == 3)
            throw ConfigError(key + ": expected x,y,z");
        p[n++] = parseReal(key, part);
    }
    if (n != 3)
        throw ConfigError(key + ": expected x,y,z");
    if ((p.array().abs() > 1.0).any())
        throw ConfigError(key + ": point outside [-1,1]^3");
    return p;
}

std::uint64_t ConfigMap::seed() const
{
    const std::string t = str("seed");
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("seed: expected an unsigned 64-bit integer, got '" + t + "'");
    return v;
}

AnalyticScene parseSceneSpec(const std::string& spec)
{
    if (spec == "sphere_box")
        return sphereBoxScene();
    if (spec == "sphere")
        return centeredSphereScene();
    if (spec == "clutter")
        return clutterScene();
    try {
        return AnalyticScene::parse(spec);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scene.spec: ") + e.what());
    }
}

std::optional<AnalyticScene> sceneFrom(const ConfigMap& cfg)
{
    if (!cfg.isSet("scene.spec"))
        return std::nullopt;
    return parseSceneSpec(cfg.str("scene.spec"));
}

AnalyticScene requireScene(const ConfigMap& cfg)
{
    auto scene = sceneFrom(cfg);
    if (!scene)
        throw ConfigError("missing required config field scene.spec");
    return *scene;
}

BackboneConfig backboneConfig(const ConfigMap& cfg)
{
    BackboneConfig b;
    b.encoding.numFrequencies = static_cast<int>(cfg.integer("backbone.frequencies", 0, 16));
    b.depth = static_cast<int>(cfg.integer("backbone.depth", 1, 64));
    b.width = static_cast<int>(cfg.integer("backbone.width", 1, 4096));
    const auto skip = cfg.integer("backbone.skip", 0, b.depth);
    if (skip == 1)
        throw ConfigError("backbone.skip: must be 0 (none) or in [2, depth]");
    if (skip > 0)
        b.skipLayer = static_cast<int>(skip);
    return b;
}

PretrainConfig pretrainConfig(const ConfigMap& cfg, std::uint64_t seed)
{
    PretrainConfig p;
    p.steps = static_cast<int>(cfg.integer("backbone.steps", 0, 10'000'000));
    p.batch = static_cast<int>(cfg.integer("backbone.batch", 1, 1'000'000));
    p.learningRate = cfg.real("backbone.learning_rate");
    if (!(p.learningRate > 0.0))
        throw ConfigError("backbone.learning_rate: must be positive");
    p.supervisionResolution = static_cast<int>(cfg.integer("backbone.supervision_resolution", 2, 4096));
    p.seed = seed;
    return p;
}

HeadConfig headConfig(const ConfigMap& cfg)
{
    HeadConfig h;
    h.depth = static_cast<int>(cfg.integer("head.depth", 1, 8));
    h.embedDim = static_cast<int>(cfg.integer("head.embed_dim", 1, 4096));
    h.rFixed = cfg.real("head.r_fixed");
    if (!(h.rFixed > 0.0 && h.rFixed <= 0.5))
        throw ConfigError("head.r_fixed: must lie in (0, 0.5]");
    h.hiddenWidth = static_cast<int>(cfg.integer("head.hidden_width", 0, 4096));
    return h;
}

HeadTrainConfig headTrainConfig(const ConfigMap& cfg, std::uint64_t seed)
{
    HeadTrainConfig t;
    t.epochs = static_cast<int>(cfg.integer("head.epochs", 1, 10'000'000));
    t.batch = static_cast<int>(cfg.integer("head.batch", 1, 10'000'000));
    t.learningRate = cfg.real("head.learning_rate");
    if (!(t.learningRate > 0.0))
        throw ConfigError("head.learning_rate: must be positive");
    t.seed = seed;
    return t;
}

GradientTarget gradientTarget(const ConfigMap& cfg)
{
    const std::string g = cfg.str("head.gradient");
    if (g == "logit")
        return GradientTarget::Logit;
    if (g == "lambda")
        return GradientTarget::Lambda;
    throw ConfigError("head.gradient: expected logit or lambda, got '" + g + "'");
}

RolloutConfig rolloutConfig(const ConfigMap& cfg)
{
    auto positive = [&](const std::string& key) {
        const double v = cfg.real(key);
        if (!(v > 0.0))
            throw ConfigError(key + ": must be positive");
        return v;
    };
    RolloutConfig r;
    r.start = cfg.point("plan.start");
    r.goal = cfg.point("plan.goal");
    r.dt = positive("plan.dt");
    r.maxSteps = static_cast<int>(cfg.integer("plan.max_steps", 1, 100'000'000));
    r.tolerance = positive("plan.tolerance");
    r.goalParams = {positive("plan.goal_gain"), positive("plan.goal_damping"), positive("plan.goal_softening")};
    r.obstacleParams = {positive("plan.obstacle_gain"), positive("plan.obstacle_length_scale"),
                        positive("plan.obstacle_damping"), positive("plan.epsilon")};
    return r;
}

SlicePlane evalPlane(const ConfigMap& cfg)
{
    const std::string a = cfg.str("eval.axis");
    SlicePlane p;
    if (a == "x")
        p.axis = Axis::X;
    else if (a == "y")
        p.axis = Axis::Y;
    else if (a == "z")
        p.axis = Axis::Z;
    else
        throw ConfigError("eval.axis: expected x, y or z");
    p.offset = cfg.real("eval.offset");
    if (std::abs(p.offset) > 1.0)
        throw ConfigError("eval.offset: must lie in [-1, 1]");
    return p;
}

} // namespace nesdf::cli
