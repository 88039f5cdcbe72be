#pragma once

#include "nesdf/esdf_eval.hpp"
#include "nesdf/head.hpp"
#include "nesdf/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nesdf {

struct FieldSample {
    double distance;
    Vec3 gradient;
};

/// Forward (distance) and backward (gradient) passes issued against a field.
struct QueryCounts {
    std::uint64_t forward = 0;
    std::uint64_t backward = 0;
};

/// d(q) and grad d(q) for the obstacle policy. sample() is the one-forward-one-backward query
/// the planner uses; distance() and gradient() are conveniences that each count their own passes.
class DistanceField {
public:
    virtual ~DistanceField() = default;

    virtual FieldSample sample(const Vec3& q) = 0;
    double distance(const Vec3& q);
    Vec3 gradient(const Vec3& q);

    const QueryCounts& counts() const { return counts_; }
    void resetCounts() { counts_ = {}; }

protected:
    QueryCounts counts_;
};

/// d = -logit at the head's fixed radius (optionally mapped through an affine calibration),
/// grad d from one backward pass. Queries outside [-1,1]^3 are clamped onto the cube.
class HeadDistanceField final : public DistanceField {
public:
    explicit HeadDistanceField(const HeadModel& head, std::optional<EsdfCalibration> calibration = std::nullopt,
                               GradientTarget target = GradientTarget::Logit);

    FieldSample sample(const Vec3& q) override;

private:
    const HeadModel& head_;
    std::optional<EsdfCalibration> calibration_;
    GradientTarget target_;
};

/// Exact scene distance and analytic outward normal; baseline for A/B comparisons.
class AnalyticDistanceField final : public DistanceField {
public:
    explicit AnalyticDistanceField(AnalyticScene scene) : scene_(std::move(scene)) {}

    FieldSample sample(const Vec3& q) override;

private:
    AnalyticScene scene_;
};

/// Fits a calibration of the head's raw field onto the oracle's nearest-occupied distance over
/// random free-space probes, so no analytic ground truth is needed. Probes farther than
/// maxDistance are skipped: the logit only tracks distance inside the trained radius band.
EsdfCalibration calibrateAgainstOracle(const HeadModel& head, const OccupancyOracle& oracle, std::size_t probes,
                                       std::uint64_t seed, double maxDistance = kMaxSampleRadius);

/// One RMP: acceleration f and metric A.
struct PolicyEval {
    Vec3 accel = Vec3::Zero();
    Mat3 metric = Mat3::Zero();
};

struct GoalParams {
    double gain = 1.0;    // gamma_p
    double damping = 2.0; // gamma_d
    double softening = 0.05; // delta
};

struct ObstacleParams {
    double gain = 8.0;      // eta
    double lengthScale = 0.15; // nu
    double damping = 2.0;   // lambda_d
    double epsilon = 1e-6;
};

/// f = gamma_p (goal - x) / max(|goal - x|, delta) - gamma_d xdot, A = I.
PolicyEval goalPolicy(const Vec3& x, const Vec3& xdot, const Vec3& goal, const GoalParams& params);

/// With s = d(x), v = grad d / max(|grad d|, eps), sdot = v.xdot:
/// f = eta exp(-s/nu) v - lambda_d min(0, sdot) v, A = exp(-s/nu) v v^T.
/// Returns nullopt for a non-finite field sample.
std::optional<PolicyEval> obstaclePolicy(const Vec3& x, const Vec3& xdot, const FieldSample& field,
                                         const ObstacleParams& params);

struct CombineResult {
    Vec3 accel = Vec3::Zero();
    bool freeDrift = false; // every metric was zero
};

inline constexpr double kPinvTolerance = 1e-10;

/// xddot = (sum A_i)^+ sum A_i f_i with a relative eigenvalue cutoff.
CombineResult combine(std::span<const PolicyEval> policies);

enum class Termination { GoalReached, MaxSteps, Diverged };

std::string terminationName(Termination t);
std::ostream& operator<<(std::ostream& out, Termination t);

struct RolloutConfig {
    Vec3 start = Vec3::Zero();
    Vec3 goal = Vec3::Zero();
    double dt = 0.01;
    int maxSteps = 5000;
    double tolerance = 0.05;
    GoalParams goalParams;
    ObstacleParams obstacleParams;
    /// Leave the obstacle policy out (pure attractor).
    bool goalOnly = false;
};

struct TrajectoryRecord {
    int step;
    double t;
    Vec3 position;
    Vec3 velocity;
    Vec3 acceleration;
    double distance;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    Termination reason = Termination::MaxSteps;
    QueryCounts queries;
};

/// Semi-implicit Euler on combine(goal, obstacle): one field sample per record.
/// Divergence (|x| > 2 or a non-finite state) ends the rollout with reason Diverged.
Trajectory rollout(DistanceField& field, const RolloutConfig& cfg);

struct AuditReport {
    double minClearance = 0.0;
    double pathLength = 0.0;
    std::size_t steps = 0;
    bool success = false;
    Termination reason = Termination::MaxSteps;
};

inline constexpr double kDefaultRobotRadius = 0.02;

AuditReport audit(const Trajectory& traj, const AnalyticScene& scene, double robotRadius = kDefaultRobotRadius);

/// header step,t,x,y,z,vx,vy,vz,ax,ay,az,dist then `# reason=<...>`
void writeTrajectoryCsv(std::ostream& out, const Trajectory& traj);
/// Flat key=value lines.
void writeAuditReport(std::ostream& out, const AuditReport& report);

struct StartGoal {
    Vec3 start;
    Vec3 goal;
};

/// Random start/goal pairs in free space (clearance >= minClearance) whose straight segment
/// passes through the geometry. Deterministic given seed.
std::vector<StartGoal> blockedStartGoalPairs(const AnalyticScene& scene, std::size_t count, std::uint64_t seed,
                                             double minClearance = 0.15);

} // namespace nesdf
