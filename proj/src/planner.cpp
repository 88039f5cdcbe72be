#include "nesdf/planner.hpp"
#include "nesdf/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace nesdf {

double DistanceField::distance(const Vec3& q) { return sample(q).distance; }

Vec3 DistanceField::gradient(const Vec3& q) { return sample(q).gradient; }

HeadDistanceField::HeadDistanceField(const HeadModel& head, std::optional<EsdfCalibration> calibration,
                                     GradientTarget target)
    : head_(head), calibration_(calibration), target_(target)
{
}

FieldSample HeadDistanceField::sample(const Vec3& q)
{
    const Vec3 clamped = q.cwiseMax(-1.0).cwiseMin(1.0);
    const HeadQuery res = head_.query(clamped, head_.rFixed());
    ++counts_.forward;
    ++counts_.backward;
    FieldSample s{-res.logit, -res.logitGradient};
    if (target_ == GradientTarget::Lambda)
        s.gradient *= res.lambda * (1.0 - res.lambda);
    if (calibration_) {
        s.distance = calibration_->apply(s.distance);
        s.gradient *= calibration_->scale;
    }
    return s;
}

FieldSample AnalyticDistanceField::sample(const Vec3& q)
{
    ++counts_.forward;
    ++counts_.backward;
    return {sceneDistance(scene_, q), sceneNormal(scene_, q)};
}

EsdfCalibration calibrateAgainstOracle(const HeadModel& head, const OccupancyOracle& oracle, std::size_t probes,
                                       std::uint64_t seed, double maxDistance)
{
    if (oracle.empty())
        throw DomainError("calibration: oracle is empty");
    Rng rng(seed);
    std::vector<Vec3> pts;
    std::vector<double> gt;
    // occupied points are cell centers, so anything closer than about half a cell is "inside"
    const double minDistance = 1e-3;
    for (std::size_t tries = 0; pts.size() < probes && tries < 100 * probes; ++tries) {
        const Vec3 q(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const double d = oracle.nearestDistance(q);
        if (d > minDistance && d <= maxDistance) {
            pts.push_back(q);
            gt.push_back(d);
        }
    }
    MatX P(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        P.col(static_cast<Eigen::Index>(i)) = pts[i];
    return fitCalibration(headEsdf(head, P), Eigen::Map<const VecX>(gt.data(), static_cast<Eigen::Index>(gt.size())));
}

PolicyEval goalPolicy(const Vec3& x, const Vec3& xdot, const Vec3& goal, const GoalParams& p)
{
    if (!(p.gain > 0.0 && p.damping > 0.0 && p.softening > 0.0))
        throw DomainError("goal policy: parameters must be positive");
    const Vec3 diff = goal - x;
    PolicyEval e;
    e.accel = p.gain * diff / std::max(diff.norm(), p.softening) - p.damping * xdot;
    e.metric = Mat3::Identity();
    return e;
}

std::optional<PolicyEval> obstaclePolicy(const Vec3& /*x*/, const Vec3& xdot, const FieldSample& field,
                                         const ObstacleParams& p)
{
    if (!(p.gain > 0.0 && p.lengthScale > 0.0 && p.damping > 0.0 && p.epsilon > 0.0))
        throw DomainError("obstacle policy: parameters must be positive");
    if (!std::isfinite(field.distance) || !field.gradient.allFinite())
        return std::nullopt;
    const Vec3 v = field.gradient / std::max(field.gradient.norm(), p.epsilon);
    // exponent capped so the metric stays finite deep inside an obstacle
    const double w = std::exp(std::min(-field.distance / p.lengthScale, 200.0));
    const double approach = v.dot(xdot);
    PolicyEval e;
    e.accel = p.gain * w * v - p.damping * std::min(0.0, approach) * v;
    e.metric = w * v * v.transpose();
    return e;
}

CombineResult combine(std::span<const PolicyEval> policies)
{
    if (policies.empty())
        throw DomainError("combine: at least one policy is required");
    Mat3 metricSum = Mat3::Zero();
    Vec3 force = Vec3::Zero();
    for (const auto& p : policies) {
        metricSum += p.metric;
        force += p.metric * p.accel;
    }
    CombineResult r;
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (metricSum + metricSum.transpose()));
    const Vec3 values = eig.eigenvalues();
    const double largest = values.cwiseAbs().maxCoeff();
    if (!(largest > 0.0)) {
        r.freeDrift = true;
        return r;
    }
    Vec3 inv = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
        if (values[i] > kPinvTolerance * largest)
            inv[i] = 1.0 / values[i];
    r.accel = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * force;
    return r;
}

std::string terminationName(Termination t)
{
    switch (t) {
    case Termination::GoalReached:
        return "goal_reached";
    case Termination::MaxSteps:
        return "max_steps";
    case Termination::Diverged:
        return "diverged";
    }
    return "unknown";
}

std::ostream& operator<<(std::ostream& out, Termination t) { return out << terminationName(t); }

namespace {

void validate(const RolloutConfig& cfg)
{
    if (!(cfg.dt > 0.0) || cfg.maxSteps < 1 || !(cfg.tolerance >= 0.0))
        throw DomainError("rollout: dt and tolerance must be positive and max_steps at least 1");
    for (const Vec3* p : {&cfg.start, &cfg.goal})
        if (!p->allFinite() || (p->array().abs() > 1.0).any())
            throw DomainError("rollout: start and goal must lie in [-1,1]^3");
}

bool diverged(const Vec3& x, const Vec3& v) { return !x.allFinite() || !v.allFinite() || x.norm() > 2.0; }

} // namespace

Trajectory rollout(DistanceField& field, const RolloutConfig& cfg)
{
    validate(cfg);
    Trajectory traj;
    const QueryCounts before = field.counts();
    Vec3 x = cfg.start;
    Vec3 v = Vec3::Zero();
    for (int step = 0;; ++step) {
        const FieldSample s = field.sample(x);
        std::array<PolicyEval, 2> policies;
        std::size_t n = 0;
        policies[n++] = goalPolicy(x, v, cfg.goal, cfg.goalParams);
        if (!cfg.goalOnly) {
            const auto obstacle = obstaclePolicy(x, v, s, cfg.obstacleParams);
            if (!obstacle) {
                traj.reason = Termination::Diverged;
                break;
            }
            policies[n++] = *obstacle;
        }
        const Vec3 a = combine(std::span<const PolicyEval>(policies.data(), n)).accel;
        traj.records.push_back({step, step * cfg.dt, x, v, a, s.distance});

        if ((x - cfg.goal).norm() <= cfg.tolerance) {
            traj.reason = Termination::GoalReached;
            break;
        }
        if (step == cfg.maxSteps) {
            traj.reason = Termination::MaxSteps;
            break;
        }
        v += a * cfg.dt;
        x += v * cfg.dt;
        if (diverged(x, v)) {
            traj.reason = Termination::Diverged;
            break;
        }
    }
    traj.queries.forward = field.counts().forward - before.forward;
    traj.queries.backward = field.counts().backward - before.backward;
    return traj;
}

AuditReport audit(const Trajectory& traj, const AnalyticScene& scene, double robotRadius)
{
    if (traj.records.empty())
        throw DomainError("audit: empty trajectory");
    AuditReport r;
    r.minClearance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const auto& rec = traj.records[i];
        r.minClearance = std::min(r.minClearance, sceneDistance(scene, rec.position) - robotRadius);
        if (i > 0)
            r.pathLength += (rec.position - traj.records[i - 1].position).norm();
    }
    r.steps = traj.records.size();
    r.reason = traj.reason;
    r.success = traj.reason == Termination::GoalReached && r.minClearance > 0.0;
    return r;
}

void writeTrajectoryCsv(std::ostream& out, const Trajectory& traj)
{
    out << "step,t,x,y,z,vx,vy,vz,ax,ay,az,dist\n";
    const auto old = out.precision(17);
    for (const auto& r : traj.records) {
        out << r.step << ',' << r.t;
        for (const Vec3* v : {&r.position, &r.velocity, &r.acceleration})
            out << ',' << v->x() << ',' << v->y() << ',' << v->z();
        out << ',' << r.distance << '\n';
    }
    out.precision(old);
    out << "# reason=" << terminationName(traj.reason) << '\n';
}

void writeAuditReport(std::ostream& out, const AuditReport& r)
{
    const auto old = out.precision(17);
    out << "min_clearance=" << r.minClearance << '\n'
        << "path_length=" << r.pathLength << '\n'
        << "steps=" << r.steps << '\n'
        << "reason=" << terminationName(r.reason) << '\n'
        << "success=" << (r.success ? "true" : "false") << '\n';
    out.precision(old);
}

namespace {

bool segmentBlocked(const AnalyticScene& scene, const Vec3& a, const Vec3& b)
{
    const int n = 400;
    for (int i = 0; i <= n; ++i)
        if (sceneContains(scene, a + (b - a) * (static_cast<double>(i) / n)))
            return true;
    return false;
}

} // namespace

std::vector<StartGoal> blockedStartGoalPairs(const AnalyticScene& scene, std::size_t count, std::uint64_t seed,
                                             double minClearance)
{
    Rng rng(seed);
    std::vector<StartGoal> out;
    const double extent = 0.9;
    auto draw = [&]() {
        for (;;) {
            const Vec3 p(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent));
            if (sceneDistance(scene, p) >= minClearance)
                return p;
        }
    };
    for (std::size_t tries = 0; out.size() < count; ++tries) {
        if (tries > 100000 * (count + 1))
            throw DomainError("start/goal sampling: no blocked pairs found");
        const Vec3 s = draw();
        const Vec3 g = draw();
        if ((g - s).norm() < 0.8 || !segmentBlocked(scene, s, g))
            continue;
        out.push_back({s, g});
    }
    return out;
}

} // namespace nesdf
