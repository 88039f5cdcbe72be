#include "nesdf/cli/commands.hpp"

#include "nesdf/cli/config.hpp"
#include "nesdf/cli/manifest.hpp"
#include "nesdf/density_grid.hpp"
#include "nesdf/esdf_eval.hpp"
#include "nesdf/image.hpp"
#include "nesdf/rng.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>

namespace nesdf::cli {

namespace fs = std::filesystem;

namespace {

// File names inside the output directory.
constexpr const char* kBackboneFile = "backbone.nwts";
constexpr const char* kPretrainLossFile = "pretrain_loss.csv";
constexpr const char* kGridFile = "grid.dgrd";
constexpr const char* kOracleStatsFile = "oracle_stats.txt";
constexpr const char* kHeadFile = "head.nwts";
constexpr const char* kTrainReportFile = "train_report.csv";
constexpr const char* kSweepTableFile = "depth_sweep.csv";
constexpr const char* kEsdfMetricsFile = "esdf_metrics.txt";
constexpr const char* kProbeTableFile = "esdf_probes.csv";
constexpr std::size_t kProbeTableRows = 1000;
constexpr const char* kTrajectoryFile = "trajectory.csv";
constexpr const char* kAuditFile = "audit.txt";
constexpr const char* kOverlayFile = "plan_overlay.ppm";

// Published numbers for the same metric on a Lego-scene radiance field.
constexpr double kReferenceProposedMae = 0.039;
constexpr double kReferenceNaiveMae = 0.175;

struct Context {
    ConfigMap cfg;
    fs::path dir;
    std::uint64_t seed = 0;
    std::ostream& out;
    std::ostream& err;
    RunManifest manifest;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    fs::path file(const char* name) const { return dir / name; }

    void input(const std::string& producer, const fs::path& path)
    {
        manifest.inputs[path.filename().string()] = verifyInput(dir, producer, path);
    }

    void output(const fs::path& path) { manifest.outputs[path.filename().string()] = sha256File(path); }

    template <class F>
    auto timed(const std::string& phase, F&& f)
    {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            manifest.wallSeconds[phase] = seconds(t0);
        } else {
            auto r = f();
            manifest.wallSeconds[phase] = seconds(t0);
            return r;
        }
    }

    void finish()
    {
        manifest.wallSeconds["total"] = seconds(started);
        manifest.config = cfg.values();
        writeManifest(dir, manifest);
    }

    static double seconds(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::ofstream openText(const fs::path& path)
{
    std::ofstream f(path);
    if (!f)
        throw ConfigError("cannot write " + path.string());
    f.precision(17);
    return f;
}

double oracleThreshold(const ConfigMap& cfg, const DensityGrid& grid)
{
    if (cfg.str("oracle.threshold") == "auto")
        return defaultThreshold(grid);
    const double t = cfg.real("oracle.threshold");
    if (t < 0.0)
        throw ConfigError("oracle.threshold: must be non-negative or auto");
    return t;
}

DensityBackbone loadVerifiedBackbone(Context& ctx)
{
    const fs::path p = ctx.file(kBackboneFile);
    ctx.input("pretrain", p);
    return loadBackbone(p);
}

DensityGrid loadVerifiedGrid(Context& ctx)
{
    const fs::path p = ctx.file(kGridFile);
    ctx.input("build-oracle", p);
    return loadDensityGrid(p);
}

HeadModel loadVerifiedHead(Context& ctx, const DensityBackbone& backbone)
{
    const fs::path p = ctx.file(kHeadFile);
    ctx.input("train-head", p);
    return loadHead(p, backbone);
}

// ---------------------------------------------------------------------------------------------

int cmdPretrain(Context& ctx)
{
    const AnalyticScene scene = requireScene(ctx.cfg);
    const BackboneConfig bcfg = backboneConfig(ctx.cfg);
    const std::uint64_t stream = deriveSeed(ctx.seed, "pretrain");
    PretrainConfig pcfg = pretrainConfig(ctx.cfg, deriveSeed(stream, "train"));

    DensityBackbone backbone = DensityBackbone::create(bcfg, deriveSeed(stream, "init"));
    const PretrainTarget target = sceneTarget(scene, kOccupiedDensity, pcfg.supervisionResolution);
    const PretrainResult result = ctx.timed("pretrain", [&] { return pretrain(backbone, target, pcfg); });

    saveBackbone(ctx.file(kBackboneFile), backbone);
    {
        auto f = openText(ctx.file(kPretrainLossFile));
        f << "step,loss\n";
        for (std::size_t i = 0; i < result.loss.size(); ++i)
            f << i << ',' << result.loss[i] << '\n';
    }
    ctx.output(ctx.file(kBackboneFile));
    ctx.output(ctx.file(kPretrainLossFile));
    ctx.finish();
    ctx.out << "pretrain: " << result.loss.size() << " steps, final loss "
            << (result.loss.empty() ? 0.0 : result.loss.back()) << ", wrote " << ctx.file(kBackboneFile).string()
            << '\n';
    return kExitOk;
}

int cmdBuildOracle(Context& ctx, bool dryRun)
{
    const int res = static_cast<int>(ctx.cfg.integer("oracle.resolution", 2, 2048));
    const long long samples = static_cast<long long>(res) * res * res;
    if (dryRun) {
        ctx.out << "build-oracle (dry run): resolution " << res << "^3 = " << samples << " density samples\n";
        return kExitOk;
    }

    const std::string source = ctx.cfg.str("oracle.source");
    std::optional<DensityGrid> grid;
    if (ctx.cfg.isSet("oracle.import")) {
        const fs::path p = ctx.cfg.str("oracle.import");
        ctx.manifest.inputs[fs::absolute(p).string()] = sha256File(p);
        grid = loadDensityGrid(p);
    } else if (source == "backbone") {
        const DensityBackbone backbone = loadVerifiedBackbone(ctx);
        grid = ctx.timed("sample", [&] {
            return sampleDensityGrid([&](const MatX& p) { return backbone.density(p); }, {res, res, res});
        });
    } else if (source == "scene") {
        const AnalyticScene scene = requireScene(ctx.cfg);
        grid = sampleDensityGrid(
            [&](const Vec3& p) { return sceneContains(scene, p) ? kOccupiedDensity : 0.0; }, {res, res, res});
    } else {
        throw ConfigError("oracle.source: expected backbone or scene, got '" + source + "'");
    }

    const double threshold = oracleThreshold(ctx.cfg, *grid);
    const OccupancyOracle oracle = ctx.timed("index", [&] { return buildOracle(*grid, threshold); });
    const std::size_t cells = static_cast<std::size_t>(grid->values().size());
    const bool empty = oracle.empty();

    saveDensityGrid(ctx.file(kGridFile), *grid);
    {
        auto f = openText(ctx.file(kOracleStatsFile));
        const auto& r = grid->resolution();
        f << "resolution=" << r[0] << 'x' << r[1] << 'x' << r[2] << '\n'
          << "samples=" << cells << '\n'
          << "threshold=" << threshold << '\n'
          << "occupied=" << oracle.occupiedCount() << '\n'
          << "occupied_fraction=" << static_cast<double>(oracle.occupiedCount()) / static_cast<double>(cells) << '\n'
          << "empty_scene=" << (empty ? "true" : "false") << '\n';
    }
    ctx.output(ctx.file(kGridFile));
    ctx.output(ctx.file(kOracleStatsFile));
    ctx.finish();
    if (empty)
        ctx.err << "warning: no cell exceeds threshold " << threshold << "; oracle is empty (empty_scene=true)\n";
    ctx.out << "build-oracle: " << cells << " samples, threshold " << threshold << ", " << oracle.occupiedCount()
            << " occupied\n";
    return kExitOk;
}

void writeTrainReport(const fs::path& path, const TrainReport& r)
{
    auto f = openText(path);
    f << "epoch,train_loss,validation_loss,validation_accuracy\n";
    for (std::size_t e = 0; e < r.trainLoss.size(); ++e)
        f << e << ',' << r.trainLoss[e] << ',' << r.validationLoss[e] << ',' << r.validationAccuracy[e] << '\n';
}

int cmdTrainHead(Context& ctx, bool sweep)
{
    const HeadConfig hcfg = headConfig(ctx.cfg);
    const DensityBackbone backbone = loadVerifiedBackbone(ctx);
    const DensityGrid grid = loadVerifiedGrid(ctx);
    if (hcfg.depth > backbone.config().depth)
        throw ConfigError("head.depth: " + std::to_string(hcfg.depth) + " exceeds backbone depth " +
                          std::to_string(backbone.config().depth));
    const OccupancyOracle oracle = buildOracle(grid, oracleThreshold(ctx.cfg, grid));

    if (sweep) {
        const int maxDepth = std::min(8, backbone.config().depth);
        std::vector<int> depths;
        for (int d = 1; d <= maxDepth; ++d)
            depths.push_back(d);
        const HeadTrainConfig tcfg = headTrainConfig(ctx.cfg, deriveSeed(ctx.seed, "sweep"));
        const auto results = ctx.timed("sweep", [&] { return depthSweep(backbone, oracle, depths, hcfg, tcfg); });
        auto table = openText(ctx.file(kSweepTableFile));
        table << "depth,accuracy,trailing_accuracy,train_loss,validation_loss\n";
        for (const auto& r : results) {
            const std::string name = "head_depth" + std::to_string(r.depth) + ".nwts";
            saveHead(ctx.dir / name, r.head);
            ctx.output(ctx.dir / name);
            table << r.depth << ',' << r.report.finalAccuracy() << ',' << r.report.trailingAccuracy() << ','
                  << r.report.trainLoss.back() << ',' << r.report.validationLoss.back() << '\n';
            ctx.out << "depth " << r.depth << ": accuracy " << r.report.finalAccuracy() << '\n';
            if (r.depth == hcfg.depth) {
                saveHead(ctx.file(kHeadFile), r.head);
                writeTrainReport(ctx.file(kTrainReportFile), r.report);
            }
        }
        table.close();
        ctx.output(ctx.file(kSweepTableFile));
    } else {
        const std::uint64_t stream = deriveSeed(ctx.seed, "head");
        HeadModel head = HeadModel::create(backbone, hcfg, deriveSeed(stream, "init"));
        const HeadTrainConfig tcfg = headTrainConfig(ctx.cfg, deriveSeed(stream, "train"));
        const TrainReport report = ctx.timed("train", [&] { return trainHead(head, oracle, tcfg); });
        saveHead(ctx.file(kHeadFile), head);
        writeTrainReport(ctx.file(kTrainReportFile), report);
        ctx.out << "train-head: depth " << hcfg.depth << ", held-out accuracy " << report.finalAccuracy() << '\n';
    }
    if (fs::exists(ctx.file(kHeadFile))) {
        ctx.output(ctx.file(kHeadFile));
        ctx.output(ctx.file(kTrainReportFile));
    }
    ctx.finish();
    return kExitOk;
}

int cmdEvalEsdf(Context& ctx)
{
    const SlicePlane plane = evalPlane(ctx.cfg);
    const int res = static_cast<int>(ctx.cfg.integer("eval.resolution", 2, 4096));
    const DensityBackbone backbone = loadVerifiedBackbone(ctx);
    const HeadModel head = loadVerifiedHead(ctx, backbone);
    const MatX raw = headEsdfSlice(head, plane, res);
    const auto scene = sceneFrom(ctx.cfg);

    // Oracle-labelled probe table, when the grid of this run is available.
    if (fs::exists(ctx.file(kGridFile))) {
        const DensityGrid grid = loadVerifiedGrid(ctx);
        const OccupancyOracle oracle = buildOracle(grid, oracleThreshold(ctx.cfg, grid));
        const auto samples = generateSamples(oracle, kProbeTableRows, deriveSeed(ctx.seed, "eval-probes"));
        auto f = openText(ctx.file(kProbeTableFile));
        f << "x,y,z,r,label,lambda,logit\n";
        for (const auto& s : samples) {
            const double logit = head.logit(s.position, s.radius);
            f << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ',' << s.radius << ','
              << (s.label ? 1 : 0) << ',' << sigmoid(logit) << ',' << logit << '\n';
        }
        f.close();
        ctx.output(ctx.file(kProbeTableFile));
    }

    const fs::path predPath = ctx.dir / "esdf_predicted.pgm";
    if (!scene) {
        writePgm(predPath, raw, raw.minCoeff(), raw.maxCoeff());
        ctx.output(predPath);
        ctx.finish();
        ctx.err << "notice: no scene.spec, so no ground truth; metrics skipped, predicted slice written\n";
        return kExitOk;
    }

    const ProbeSet probes = freeSpaceSliceProbes(*scene, plane, res);
    const EsdfMetrics proposed = evaluateEsdf(headEsdf(head, probes.positions), probes.groundTruth);

    NaiveEsdfRegressor naive = NaiveEsdfRegressor::create(backbone, head.depth());
    HeadTrainConfig ncfg;
    ncfg.epochs = static_cast<int>(ctx.cfg.integer("eval.naive_epochs", 0, 10'000'000));
    ncfg.batch = static_cast<int>(ctx.cfg.integer("eval.naive_batch", 1, 10'000'000));
    ncfg.learningRate = headTrainConfig(ctx.cfg, 0).learningRate;
    ncfg.seed = deriveSeed(ctx.seed, "naive");
    ctx.timed("naive", [&] { trainNaiveBaseline(naive, *scene, ncfg); });
    const EsdfMetrics baseline = evaluateEsdf(naive.distance(probes.positions), probes.groundTruth);
    const double ratio = baseline.normalizedMae / proposed.normalizedMae;

    const MatX gt = groundTruthEsdfSlice(*scene, plane, res);
    const MatX pred = raw.unaryExpr([&](double v) { return proposed.calibration.apply(v); });
    const MatX error = (pred - gt).cwiseAbs();
    const double hi = gt.maxCoeff();
    writePgm(predPath, pred, 0.0, hi);
    writePgm(ctx.dir / "esdf_ground_truth.pgm", gt, 0.0, hi);
    writePgm(ctx.dir / "esdf_error.pgm", error, 0.0, hi);
    {
        auto f = openText(ctx.file(kEsdfMetricsFile));
        f << "probes=" << proposed.probes << '\n'
          << "calibration_scale=" << proposed.calibration.scale << '\n'
          << "calibration_offset=" << proposed.calibration.offset << '\n'
          << "proposed_mae=" << proposed.normalizedMae << '\n'
          << "naive_mae=" << baseline.normalizedMae << '\n'
          << "ratio=" << ratio << '\n'
          << "reference_proposed_mae=" << kReferenceProposedMae << '\n'
          << "reference_naive_mae=" << kReferenceNaiveMae << '\n';
    }
    for (const char* name : {"esdf_predicted.pgm", "esdf_ground_truth.pgm", "esdf_error.pgm", kEsdfMetricsFile})
        ctx.output(ctx.dir / name);
    ctx.finish();
    ctx.out << "eval-esdf: proposed MAE " << proposed.normalizedMae << ", naive MAE " << baseline.normalizedMae
            << ", ratio " << ratio << '\n'
            << "reference (Lego radiance field): proposed " << kReferenceProposedMae << ", naive "
            << kReferenceNaiveMae << ", ratio " << kReferenceNaiveMae / kReferenceProposedMae << '\n';
    return kExitOk;
}

/// Path drawn over a z-slice: density background (grid or scene), red path, green start, blue goal.
RgbImage planOverlay(const Trajectory& traj, const DensityGrid* grid, const AnalyticScene* scene, double z)
{
    const int n = grid ? grid->resolution()[0] : 128;
    const int m = grid ? grid->resolution()[1] : 128;
    MatX bg(m, n);
    const int kz = grid ? std::clamp(static_cast<int>((z + 1.0) * 0.5 * grid->resolution()[2]), 0,
                                     grid->resolution()[2] - 1)
                        : 0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec3 p(-1.0 + (i + 0.5) * 2.0 / n, -1.0 + (j + 0.5) * 2.0 / m, z);
            bg(j, i) = grid ? grid->at(i, j, kz) : (scene && sceneContains(*scene, p) ? kOccupiedDensity : 0.0);
        }
    RgbImage img = grayscaleToRgb(bg, 0.0, std::max(bg.maxCoeff(), 1e-12));
    auto plot = [&](const Vec3& p, std::array<std::uint8_t, 3> c) {
        const int i = static_cast<int>((p.x() + 1.0) * 0.5 * n);
        const int j = static_cast<int>((p.y() + 1.0) * 0.5 * m);
        if (i >= 0 && i < n && j >= 0 && j < m)
            img.at(i, m - 1 - j) = c;
    };
    for (const auto& r : traj.records)
        plot(r.position, {255, 0, 0});
    if (!traj.records.empty()) {
        plot(traj.records.front().position, {0, 255, 0});
        plot(traj.records.back().position, {0, 0, 255});
    }
    return img;
}

int cmdPlan(Context& ctx, const std::string& fieldFlag)
{
    if (!fieldFlag.empty())
        ctx.cfg.set("plan.field", fieldFlag);
    const std::string fieldKind = ctx.cfg.str("plan.field");
    const RolloutConfig rc = rolloutConfig(ctx.cfg);
    const double robotRadius = ctx.cfg.real("plan.robot_radius");
    if (robotRadius < 0.0)
        throw ConfigError("plan.robot_radius: must be non-negative");
    const auto scene = sceneFrom(ctx.cfg);

    std::optional<DensityGrid> grid;
    std::optional<OccupancyOracle> oracle;
    Trajectory traj;
    if (fieldKind == "analytic") {
        if (!scene)
            throw ConfigError("plan.field=analytic needs scene.spec");
        AnalyticDistanceField field(*scene);
        traj = ctx.timed("rollout", [&] { return rollout(field, rc); });
    } else if (fieldKind == "head") {
        const DensityBackbone backbone = loadVerifiedBackbone(ctx);
        const HeadModel head = loadVerifiedHead(ctx, backbone);
        grid = loadVerifiedGrid(ctx);
        oracle = buildOracle(*grid, oracleThreshold(ctx.cfg, *grid));
        std::optional<EsdfCalibration> cal;
        if (!oracle->empty()) {
            const auto probes = static_cast<std::size_t>(ctx.cfg.integer("plan.calibration_probes", 2, 10'000'000));
            cal = calibrateAgainstOracle(head, *oracle, probes, deriveSeed(ctx.seed, "rollout"));
        }
        HeadDistanceField field(head, cal, gradientTarget(ctx.cfg));
        traj = ctx.timed("rollout", [&] { return rollout(field, rc); });
    } else {
        throw ConfigError("plan.field: expected head or analytic, got '" + fieldKind + "'");
    }

    // Clearance from the analytic scene when known, else from the occupancy oracle.
    AuditReport report;
    if (scene) {
        report = audit(traj, *scene, robotRadius);
    } else {
        report.steps = traj.records.size();
        report.reason = traj.reason;
        report.minClearance = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < traj.records.size(); ++i) {
            const Vec3& p = traj.records[i].position;
            if (!oracle->empty())
                report.minClearance = std::min(report.minClearance, oracle->nearestDistance(p) - robotRadius);
            if (i > 0)
                report.pathLength += (p - traj.records[i - 1].position).norm();
        }
        report.success = traj.reason == Termination::GoalReached && report.minClearance > 0.0;
    }

    {
        auto f = openText(ctx.file(kTrajectoryFile));
        writeTrajectoryCsv(f, traj);
    }
    {
        auto f = openText(ctx.file(kAuditFile));
        f << "field=" << fieldKind << '\n'
          << "clearance_source=" << (scene ? "scene" : "oracle") << '\n';
        writeAuditReport(f, report);
        f << "queries_forward=" << traj.queries.forward << '\n' << "queries_backward=" << traj.queries.backward << '\n';
    }
    ctx.output(ctx.file(kTrajectoryFile));
    ctx.output(ctx.file(kAuditFile));
    if (ctx.cfg.flag("plan.overlay")) {
        writePpm(ctx.file(kOverlayFile), planOverlay(traj, grid ? &*grid : nullptr, scene ? &*scene : nullptr,
                                                     rc.start.z()));
        ctx.output(ctx.file(kOverlayFile));
    }
    ctx.finish();
    ctx.out << "plan: " << terminationName(traj.reason) << " after " << report.steps << " records, min clearance "
            << report.minClearance << ", success " << (report.success ? "true" : "false") << '\n';
    return kExitOk;
}

/// `--section.key value` or `--section.key=value` pairs left over by the option parser.
void applyOverrides(ConfigMap& cfg, const std::vector<std::string>& extras)
{
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& a = extras[i];
        if (a.rfind("--", 0) != 0)
            throw ConfigError("unexpected argument '" + a + "'");
        std::string key = a.substr(2), value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size())
                throw ConfigError("option --" + key + " needs a value");
            value = extras[++i];
        }
        cfg.set(key, value);
    }
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Geometric queries from density-field networks: ESDF head and reactive planning", "nesdf"};
    app.require_subcommand(1);

    std::string configPath, seedText, outDir, field;
    bool dryRun = false, sweep = false;
    auto shared = [&](CLI::App* sub) {
        sub->add_option("--config", configPath, "Config file (key = value with [sections])");
        sub->add_option("--seed", seedText, "Master seed (u64)");
        sub->add_option("--out", outDir, "Output directory");
        sub->allow_extras();
        sub->footer("Any config key can be overridden with --section.key value.");
        return sub;
    };
    CLI::App* pretrainCmd = shared(app.add_subcommand("pretrain", "Pretrain the density backbone on a scene"));
    CLI::App* oracleCmd = shared(app.add_subcommand("build-oracle", "Sample a density grid and index it"));
    oracleCmd->add_flag("--dry-run", dryRun, "Report the sample count only");
    CLI::App* trainCmd = shared(app.add_subcommand("train-head", "Train the radius-conditioned occupancy head"));
    trainCmd->add_flag("--sweep-depths", sweep, "Train one head per attachment depth 1..8");
    CLI::App* evalCmd = shared(app.add_subcommand("eval-esdf", "Compare the logit ESDF with ground truth"));
    CLI::App* planCmd = shared(app.add_subcommand("plan", "Roll out the reactive planner"));
    planCmd->add_option("--field", field, "head or analytic");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            return kExitConfig;
        }
        CLI::App* sub = app.get_subcommands().front();
        for (CLI::App* s : app.get_subcommands())
            if (s->get_help_ptr() && s->get_help_ptr()->count() > 0) {
                out << s->help();
                return kExitOk;
            }

        Context ctx{ConfigMap{}, {}, 0, out, err, {}};
        if (!configPath.empty())
            ctx.cfg.loadFile(configPath);
        if (!seedText.empty())
            ctx.cfg.set("seed", seedText);
        if (!outDir.empty())
            ctx.cfg.set("out", outDir);
        applyOverrides(ctx.cfg, sub->remaining());
        ctx.seed = ctx.cfg.seed();
        ctx.dir = ctx.cfg.str("out");
        ctx.manifest.stage = sub->get_name();

        if (sub == oracleCmd && dryRun)
            return cmdBuildOracle(ctx, true);

        fs::create_directories(ctx.dir);
        DirectoryLock lock(ctx.dir);
        if (sub == pretrainCmd)
            return cmdPretrain(ctx);
        if (sub == oracleCmd)
            return cmdBuildOracle(ctx, false);
        if (sub == trainCmd)
            return cmdTrainHead(ctx, sweep);
        if (sub == evalCmd)
            return cmdEvalEsdf(ctx);
        return cmdPlan(ctx, field);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "invalid value: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StructuralError& e) {
        err << "invalid value: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace nesdf::cli
