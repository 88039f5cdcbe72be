#include "nesdf/backbone.hpp"
#include "nesdf/cli/commands.hpp"
#include "nesdf/cli/config.hpp"
#include "nesdf/cli/manifest.hpp"
#include "nesdf/rng.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace nesdf;
using namespace nesdf::cli;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("nesdf_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult runCli(std::vector<std::string> args)
{
    args.insert(args.begin(), "nesdf");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string readFile(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void writeFile(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::map<std::string, std::string> readKeyValues(const fs::path& p)
{
    std::map<std::string, std::string> kv;
    std::ifstream f(p);
    std::string line;
    while (std::getline(f, line))
        if (const auto eq = line.find('='); eq != std::string::npos)
            kv[line.substr(0, eq)] = line.substr(eq + 1);
    return kv;
}

/// Small budgets so a whole pipeline runs in seconds.
const char* kSmallConfig = R"(seed = 5
[scene]
spec = sphere
[backbone]
depth = 4
width = 32
steps = 150
batch = 128
supervision_resolution = 32
[oracle]
resolution = 32
[head]
epochs = 40
batch = 300
[eval]
resolution = 24
naive_epochs = 20
naive_batch = 200
[plan]
calibration_probes = 500
max_steps = 3000
)";

/// Writes the small config into dir and runs pretrain, build-oracle and train-head there.
fs::path smallPipeline(const TempDir& dir)
{
    const fs::path cfg = dir / "run.cfg";
    writeFile(cfg, kSmallConfig);
    const std::string out = dir.path.string();
    for (const char* stage : {"pretrain", "build-oracle", "train-head"}) {
        const auto r = runCli({stage, "--config", cfg.string(), "--out", out});
        REQUIRE_MESSAGE(r.code == 0, stage << ": " << r.err);
    }
    return cfg;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("config parsing with sections, comments and overrides")
    {
        ConfigMap cfg;
        cfg.parseText("; leading comment\nseed = 42\n[head]\ndepth = 3  # inline\nembed_dim=8\n[plan]\nstart = 0.1, "
                      "-0.2, 0.3\n");
        CHECK(cfg.seed() == 42);
        CHECK(cfg.integer("head.depth", 1, 8) == 3);
        CHECK(cfg.integer("head.embed_dim", 1, 100) == 8);
        CHECK(cfg.point("plan.start").isApprox(Vec3(0.1, -0.2, 0.3)));
        CHECK(cfg.str("out") == "run");
        CHECK(cfg.real("head.r_fixed") == 0.05);
        CHECK_THROWS_AS(cfg.parseText("[head]\nwidth = 3\n"), ConfigError);
        CHECK_THROWS_AS(cfg.set("nope.key", "1"), ConfigError);
    }

    TEST_CASE("config validation errors name the key")
    {
        ConfigMap cfg;
        try {
            cfg.set("head.bogus", "1");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("head.bogus") != std::string::npos);
        }
        cfg.set("head.depth", "9");
        CHECK_THROWS_AS(headConfig(cfg), ConfigError);
        cfg.set("head.depth", "x");
        CHECK_THROWS_AS(headConfig(cfg), ConfigError);
        cfg.set("head.depth", "2");
        cfg.set("plan.start", "2,0,0");
        CHECK_THROWS_AS(rolloutConfig(cfg), ConfigError);
        CHECK_THROWS_AS(requireScene(cfg), ConfigError);
        cfg.set("scene.spec", "sphere:0,0,0,0.3; box:0.5,0.5,0.5,0.1,0.1,0.1");
        CHECK(requireScene(cfg).primitives().size() == 2);
    }

    TEST_CASE("usage errors exit with code 2")
    {
        CHECK(runCli({}).code == 2);
        CHECK(runCli({"frobnicate"}).code == 2);
        TempDir dir;
        CHECK(runCli({"pretrain", "--out", dir.path.string(), "--no-such-key", "1"}).code == 2);
        CHECK(runCli({"pretrain", "--out", dir.path.string(), "--seed", "abc"}).code == 2);
        CHECK(runCli({"pretrain", "--config", (dir / "missing.cfg").string()}).code == 2);
        CHECK(runCli({"pretrain", "--help"}).code == 0);
    }

    TEST_CASE("missing scene is reported by name")
    {
        TempDir dir;
        const auto r = runCli({"pretrain", "--out", dir.path.string()});
        CHECK(r.code == 2);
        CHECK(r.err.find("scene.spec") != std::string::npos);
    }

    TEST_CASE("pretrain writes a checkpoint that reloads bit-identically and replays")
    {
        TempDir a;
        TempDir b;
        const std::vector<std::string> common{"--scene.spec",  "sphere", "--backbone.depth", "3",
                                              "--backbone.width", "16", "--backbone.steps", "40",
                                              "--seed", "9"};
        auto argsFor = [&](const TempDir& d) {
            std::vector<std::string> v{"pretrain", "--out", d.path.string()};
            v.insert(v.end(), common.begin(), common.end());
            return v;
        };
        REQUIRE(runCli(argsFor(a)).code == 0);
        REQUIRE(runCli(argsFor(b)).code == 0);
        const fs::path ck = a / "backbone.nwts";
        REQUIRE(fs::exists(ck));
        CHECK(fs::exists(a / "pretrain_loss.csv"));
        CHECK(fs::exists(manifestPath(a.path, "pretrain")));

        const auto bb = loadBackbone(ck);
        CHECK(bb.config().depth == 3);
        const fs::path again = a / "again.nwts";
        saveBackbone(again, bb);
        CHECK(readFile(again) == readFile(ck));
        CHECK(sha256File(ck) == sha256File(b / "backbone.nwts"));
        CHECK(readFile(a / "pretrain_loss.csv") == readFile(b / "pretrain_loss.csv"));

        const auto m = readManifest(manifestPath(a.path, "pretrain"));
        CHECK(m.stage == "pretrain");
        CHECK(m.toolVersion == kToolVersion);
        CHECK(m.outputs.at("backbone.nwts") == sha256File(ck));
        CHECK(m.config.at("seed") == "9");
        CHECK(m.wallSeconds.count("total") == 1);
    }

    TEST_CASE("dry run reports the sample count")
    {
        const auto r = runCli({"build-oracle", "--dry-run", "--oracle.resolution", "500"});
        CHECK(r.code == 0);
        CHECK(r.out.find("125000000") != std::string::npos);
    }

    TEST_CASE("scene-sampled oracle matches the sphere volume")
    {
        TempDir dir;
        const auto r = runCli({"build-oracle", "--out", dir.path.string(), "--oracle.source", "scene",
                               "--oracle.resolution", "64", "--scene.spec", "sphere"});
        REQUIRE(r.code == 0);
        const auto stats = readKeyValues(dir / "oracle_stats.txt");
        const double fraction = std::stod(stats.at("occupied_fraction"));
        const double expected = (4.0 / 3.0) * M_PI * 0.2 * 0.2 * 0.2 / 8.0;
        CHECK(fraction == doctest::Approx(expected).epsilon(0.05));
        CHECK(stats.at("samples") == "262144");
        CHECK(stats.at("empty_scene") == "false");
    }

    TEST_CASE("empty oracle is a warning, not a failure")
    {
        TempDir dir;
        const auto r = runCli({"build-oracle", "--out", dir.path.string(), "--oracle.source", "scene",
                               "--oracle.resolution", "8", "--scene.spec", "sphere", "--oracle.threshold", "100"});
        CHECK(r.code == 0);
        CHECK(r.err.find("empty") != std::string::npos);
        CHECK(readKeyValues(dir / "oracle_stats.txt").at("empty_scene") == "true");
    }

    TEST_CASE("corrupt inputs exit with code 4")
    {
        TempDir dir;
        const fs::path bad = dir / "import.dgrd";
        writeFile(bad, "XXXX0000000000000000000000000000");
        CHECK(runCli({"build-oracle", "--out", dir.path.string(), "--oracle.import", bad.string()}).code == 4);

        // a backbone without a manifest is accepted as external input, but its bytes must parse
        writeFile(dir / "backbone.nwts", "NOPE");
        CHECK(runCli({"build-oracle", "--out", dir.path.string()}).code == 4);
    }

    TEST_CASE("pipeline stages, tamper detection and reruns")
    {
        TempDir dir;
        const fs::path cfg = smallPipeline(dir);
        const std::string out = dir.path.string();
        CHECK(fs::exists(dir / "grid.dgrd"));
        CHECK(fs::exists(dir / "head.nwts"));
        CHECK(fs::exists(dir / "train_report.csv"));
        CHECK(fs::exists(manifestPath(dir.path, "train-head")));
        CHECK_FALSE(fs::exists(dir / ".nesdf.lock"));

        SUBCASE("eval writes slices and metrics")
        {
            const auto r = runCli({"eval-esdf", "--config", cfg.string(), "--out", out});
            REQUIRE(r.code == 0);
            CHECK(r.out.find("0.039") != std::string::npos);
            CHECK(r.out.find("0.175") != std::string::npos);
            for (const char* f : {"esdf_predicted.pgm", "esdf_ground_truth.pgm", "esdf_error.pgm", "esdf_metrics.txt",
                                  "esdf_probes.csv"})
                CHECK_MESSAGE(fs::exists(dir / f), f);
            const std::string pgm = readFile(dir / "esdf_error.pgm");
            CHECK(pgm.rfind("P5\n24 24\n255\n", 0) == 0);
            CHECK(pgm.size() == std::string("P5\n24 24\n255\n").size() + 24 * 24);
            const auto m = readKeyValues(dir / "esdf_metrics.txt");
            CHECK(std::stod(m.at("proposed_mae")) >= 0.0);
            CHECK(std::stod(m.at("ratio")) > 0.0);
        }

        SUBCASE("eval without a scene still emits the predicted slice")
        {
            const auto r = runCli({"eval-esdf", "--config", cfg.string(), "--out", out, "--scene.spec", ""});
            CHECK(r.code == 0);
            CHECK(r.err.find("notice") != std::string::npos);
            CHECK(fs::exists(dir / "esdf_predicted.pgm"));
            CHECK_FALSE(fs::exists(dir / "esdf_metrics.txt"));
        }

        SUBCASE("plan with start equal to goal gives one record")
        {
            const auto r = runCli({"plan", "--config", cfg.string(), "--out", out, "--plan.start", "0.5,0.5,0.5",
                                   "--plan.goal", "0.5,0.5,0.5"});
            REQUIRE(r.code == 0);
            const auto audit = readKeyValues(dir / "audit.txt");
            CHECK(audit.at("steps") == "1");
            CHECK(audit.at("success") == "true");
            CHECK(audit.at("field") == "head");
            CHECK(audit.at("queries_forward") == "1");
            const std::string csv = readFile(dir / "trajectory.csv");
            CHECK(csv.rfind("step,t,x,y,z,vx,vy,vz,ax,ay,az,dist\n", 0) == 0);
            CHECK(csv.find("# reason=goal_reached") != std::string::npos);
            CHECK(readFile(dir / "plan_overlay.ppm").rfind("P6\n", 0) == 0);
        }

        SUBCASE("analytic field baseline reaches the default goal")
        {
            const auto r = runCli({"plan", "--config", cfg.string(), "--out", out, "--field", "analytic"});
            REQUIRE(r.code == 0);
            const auto audit = readKeyValues(dir / "audit.txt");
            CHECK(audit.at("field") == "analytic");
            CHECK(audit.at("success") == "true");
            CHECK(std::stod(audit.at("min_clearance")) > 0.0);
            CHECK(audit.at("queries_forward") == audit.at("steps"));
            CHECK(runCli({"plan", "--config", cfg.string(), "--out", out, "--field", "magic"}).code == 2);
        }

        SUBCASE("head field plan runs and is audited against the scene")
        {
            const auto r = runCli({"plan", "--config", cfg.string(), "--out", out});
            REQUIRE(r.code == 0);
            const auto audit = readKeyValues(dir / "audit.txt");
            CHECK(audit.at("clearance_source") == "scene");
            CHECK(audit.at("queries_forward") == audit.at("queries_backward"));
        }

        SUBCASE("tampered checkpoint is refused")
        {
            std::string bytes = readFile(dir / "head.nwts");
            bytes[bytes.size() - 3] ^= 0x5a;
            writeFile(dir / "head.nwts", bytes);
            const auto r = runCli({"eval-esdf", "--config", cfg.string(), "--out", out});
            CHECK(r.code == 4);
            CHECK(r.err.find("head.nwts") != std::string::npos);
        }

        SUBCASE("tampered grid is refused by train-head")
        {
            std::string bytes = readFile(dir / "grid.dgrd");
            bytes.back() ^= 0x01;
            writeFile(dir / "grid.dgrd", bytes);
            CHECK(runCli({"train-head", "--config", cfg.string(), "--out", out}).code == 4);
        }

        SUBCASE("head depth outside 1..8 is a config error")
        {
            CHECK(runCli({"train-head", "--config", cfg.string(), "--out", out, "--head.depth", "9"}).code == 2);
            CHECK(runCli({"train-head", "--config", cfg.string(), "--out", out, "--head.depth", "0"}).code == 2);
            // deeper than this small backbone
            CHECK(runCli({"train-head", "--config", cfg.string(), "--out", out, "--head.depth", "6"}).code == 2);
        }

        SUBCASE("divergent head training exits with code 3")
        {
            const auto r = runCli({"train-head", "--config", cfg.string(), "--out", out, "--head.learning_rate",
                                   "1e300"});
            CHECK(r.code == 3);
            CHECK(r.err.find("epoch") != std::string::npos);
        }

        SUBCASE("locked output directory is refused")
        {
            writeFile(dir / ".nesdf.lock", "1\n");
            CHECK(runCli({"plan", "--config", cfg.string(), "--out", out, "--field", "analytic"}).code == 2);
            fs::remove(dir / ".nesdf.lock");
        }
    }

    TEST_CASE("depth sweep writes one checkpoint per depth and a table")
    {
        TempDir dir;
        const fs::path cfg = dir / "run.cfg";
        writeFile(cfg, std::string(kSmallConfig) + "[backbone]\ndepth = 8\nwidth = 16\nsteps = 60\n[head]\nepochs = 10\n");
        const std::string out = dir.path.string();
        REQUIRE(runCli({"pretrain", "--config", cfg.string(), "--out", out}).code == 0);
        REQUIRE(runCli({"build-oracle", "--config", cfg.string(), "--out", out}).code == 0);
        const auto r = runCli({"train-head", "--config", cfg.string(), "--out", out, "--sweep-depths"});
        REQUIRE(r.code == 0);
        for (int d = 1; d <= 8; ++d)
            CHECK(fs::exists(dir / ("head_depth" + std::to_string(d) + ".nwts")));
        CHECK(readFile(dir / "head.nwts") == readFile(dir / "head_depth2.nwts"));
        std::istringstream table(readFile(dir / "depth_sweep.csv"));
        std::string line;
        int rows = -1;
        while (std::getline(table, line))
            ++rows;
        CHECK(rows == 8);
    }
}
