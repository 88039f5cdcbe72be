#include "nesdf/head.hpp"
#include "nesdf/adam.hpp"
#include "nesdf/binary_io.hpp"
#include "nesdf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nesdf {

namespace {

inline constexpr double kMaxQueryRadius = 0.5;
inline constexpr double kMaxValidationSamples = 10000.0;

void requireQuery(const Vec3& q, double r)
{
    if (!q.allFinite() || (q.array().abs() > 1.0).any())
        throw DomainError("head: query outside the normalized cube [-1,1]^3");
    if (!(r > 0.0 && r <= kMaxQueryRadius))
        throw DomainError("head: radius must lie in (0, 0.5]");
}

MatX stack(const MatX& top, const MatX& bottom)
{
    MatX s(top.rows() + bottom.rows(), top.cols());
    s << top, bottom;
    return s;
}

double meanBce(const VecX& logits, const VecX& labels) { return bceLossFromLogits(logits, labels) / logits.size(); }

double accuracyOf(const VecX& logits, const VecX& labels)
{
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        correct += ((logits[i] >= 0.0) == (labels[i] > 0.5)) ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(logits.size());
}

} // namespace

HeadModel::HeadModel(TruncatedBackbone features, MlpNetwork radiusEmbed, MlpNetwork output, double rFixed)
    : features_(std::move(features)), radiusEmbed_(std::move(radiusEmbed)), output_(std::move(output)), rFixed_(rFixed)
{
    if (radiusEmbed_.inputDim() != 1 || radiusEmbed_.layerCount() != 1 ||
        radiusEmbed_.layer(0).activation != Activation::Relu)
        throw StructuralError("head: radius embedding must be a single relu layer over the radius");
    const auto n = output_.layerCount();
    if (n < 1 || n > 2 || output_.outputDim() != 1 ||
        output_.inputDim() != features_.featureDim() + radiusEmbed_.outputDim() ||
        output_.layers().back().activation != Activation::Identity ||
        (n == 2 && output_.layer(0).activation != Activation::Relu))
        throw StructuralError("head: output must map [features; embedding] to one logit");
    if (!(rFixed_ > 0.0 && rFixed_ <= kMaxQueryRadius))
        throw DomainError("head: fixed radius must lie in (0, 0.5]");
}

HeadModel HeadModel::create(const DensityBackbone& backbone, const HeadConfig& cfg, std::uint64_t seed)
{
    if (cfg.embedDim < 1)
        throw DomainError("head: embedding width must be positive");
    auto features = backbone.truncate(cfg.depth);
    MlpNetwork embed(1, {makeDenseLayer(1, cfg.embedDim, Activation::Relu, deriveSeed(seed, "radius-embed"))});
    if (cfg.hiddenWidth < 0)
        throw DomainError("head: hidden width must be non-negative");
    const int joint = features.featureDim() + cfg.embedDim;
    std::vector<DenseLayer> layers;
    if (cfg.hiddenWidth > 0)
        layers.push_back(makeDenseLayer(joint, cfg.hiddenWidth, Activation::Relu, deriveSeed(seed, "hidden")));
    DenseLayer out;
    out.weight = MatX::Zero(1, cfg.hiddenWidth > 0 ? cfg.hiddenWidth : joint);
    out.bias = VecX::Zero(1);
    out.activation = Activation::Identity;
    layers.push_back(std::move(out));
    MlpNetwork output(joint, std::move(layers));
    return HeadModel(std::move(features), std::move(embed), std::move(output), cfg.rFixed);
}

VecX HeadModel::logits(const MatX& features, const VecX& radii) const
{
    const MatX emb = evaluate(radiusEmbed_, radii.transpose());
    return evaluate(output_, stack(features, emb)).row(0).transpose();
}

double HeadModel::logit(const Vec3& q, double r) const
{
    requireQuery(q, r);
    const VecX f = features_.features(q);
    return logits(f, VecX::Constant(1, r))[0];
}

double HeadModel::lambda(const Vec3& q, double r) const { return sigmoid(logit(q, r)); }

HeadQuery HeadModel::query(const Vec3& q, double r) const
{
    requireQuery(q, r);
    const auto& enc = features_.encoding();
    const VecX encoded = encode(q, enc);
    auto trunk = forward(features_.network(), encoded);
    const VecX emb = evaluate(radiusEmbed_, VecX::Constant(1, r)).col(0);
    auto out = forward(output_, stack(trunk.output, emb));
    const double z = out.output[0];

    // the radius branch is constant in q, so only the feature block of the cotangent flows on
    const auto dJoint = backward(out.tape, VecX::Ones(1), {.inputGradient = true, .parameterGradient = false});
    const VecX seed = dJoint.input.col(0).head(features_.featureDim());
    const auto g = backward(trunk.tape, seed, {.inputGradient = true, .parameterGradient = false});
    const Vec3 grad = encodeJacobian(q, enc).transpose() * g.input.col(0);
    return {z, sigmoid(z), grad};
}

Vec3 HeadModel::obstacleGradient(const Vec3& q, GradientTarget target) const
{
    const auto res = query(q, rFixed_);
    if (target == GradientTarget::Lambda)
        return -res.lambda * (1.0 - res.lambda) * res.logitGradient;
    return -res.logitGradient;
}

Checkpoint HeadModel::toCheckpoint() const
{
    std::ostringstream payload;
    BinaryWriter w(payload);
    w.u32(static_cast<std::uint32_t>(depth()));
    w.u32(static_cast<std::uint32_t>(embedDim()));
    w.f64(rFixed_);
    w.u32(output_.layerCount() == 2 ? static_cast<std::uint32_t>(output_.layer(0).rows()) : 0u);
    // The container holds l_ir followed by the output layers. The first output layer's column count
    // differs from l_ir's rows, so the plain chain check does not apply; the HEAD block says how to split.
    std::vector<DenseLayer> layers{radiusEmbed_.layer(0)};
    for (const auto& l : output_.layers())
        layers.push_back(l);
    return Checkpoint{MlpNetwork::unchecked(1, std::move(layers)), {{"HEAD", payload.str()}}};
}

HeadModel HeadModel::fromCheckpoint(const Checkpoint& ckpt, const DensityBackbone& backbone)
{
    const auto* ext = ckpt.find("HEAD");
    if (ext == nullptr)
        throw FormatError("head checkpoint: missing HEAD extension");
    std::istringstream in(ext->payload);
    BinaryReader r(in, "head extension");
    HeadConfig cfg;
    cfg.depth = static_cast<int>(r.u32());
    cfg.embedDim = static_cast<int>(r.u32());
    cfg.rFixed = r.f64();
    cfg.hiddenWidth = static_cast<int>(r.u32());
    const auto& layers = ckpt.network.layers();
    const std::size_t expected = cfg.hiddenWidth > 0 ? 3 : 2;
    if (layers.size() != expected)
        throw FormatError("head checkpoint: layer count disagrees with the HEAD block");
    try {
        auto features = backbone.truncate(cfg.depth);
        MlpNetwork embed(1, {layers[0]});
        MlpNetwork output(static_cast<int>(layers[1].cols()),
                          std::vector<DenseLayer>(layers.begin() + 1, layers.end()));
        if (embed.outputDim() != cfg.embedDim)
            throw StructuralError("embedding width disagrees with the HEAD block");
        return HeadModel(std::move(features), std::move(embed), std::move(output), cfg.rFixed);
    } catch (const std::logic_error& e) {
        throw FormatError(std::string("head checkpoint: ") + e.what());
    }
}

void saveHead(const std::filesystem::path& path, const HeadModel& head) { saveCheckpoint(path, head.toCheckpoint()); }

HeadModel loadHead(const std::filesystem::path& path, const DensityBackbone& backbone)
{
    return HeadModel::fromCheckpoint(loadCheckpoint(path), backbone);
}

double bceLoss(const VecX& probabilities, const VecX& labels)
{
    if (probabilities.size() == 0)
        throw DomainError("bce: empty batch");
    if (probabilities.size() != labels.size())
        throw StructuralError("bce: prediction and label counts differ");
    VecX logits(probabilities.size());
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double p = probabilities[i];
        if (!(p > 0.0 && p < 1.0))
            throw DomainError("bce: probabilities must lie in (0,1)");
        logits[i] = std::log(p) - std::log1p(-p);
    }
    return bceLossFromLogits(logits, labels);
}

double bceLossFromLogits(const VecX& logits, const VecX& labels)
{
    if (logits.size() == 0)
        throw DomainError("bce: empty batch");
    if (logits.size() != labels.size())
        throw StructuralError("bce: prediction and label counts differ");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double y = labels[i];
        if (y != 0.0 && y != 1.0)
            throw DomainError("bce: labels must be 0 or 1");
        // log(1 - sigmoid(z)) = log sigmoid(-z)
        sum -= y * logSigmoid(logits[i]) + (1.0 - y) * logSigmoid(-logits[i]);
    }
    return sum;
}

VecX bceLogitGradient(const VecX& logits, const VecX& labels)
{
    if (logits.size() != labels.size())
        throw StructuralError("bce: prediction and label counts differ");
    return logits.unaryExpr([](double z) { return sigmoid(z); }) - labels;
}

double TrainReport::trailingAccuracy(std::size_t n) const
{
    if (validationAccuracy.empty())
        return 0.0;
    n = std::min(n, validationAccuracy.size());
    double s = 0.0;
    for (std::size_t i = validationAccuracy.size() - n; i < validationAccuracy.size(); ++i)
        s += validationAccuracy[i];
    return s / static_cast<double>(n);
}

TrainReport trainHead(HeadModel& head, const OccupancyOracle& oracle, const HeadTrainConfig& cfg)
{
    if (cfg.epochs < 1 || cfg.batch < 1)
        throw DomainError("train head: epochs and batch must be at least 1");
    if (!(cfg.validationFraction > 0.0 && cfg.validationFraction < 1.0))
        throw DomainError("train head: validation fraction must lie in (0,1)");
    if (oracle.empty() && !cfg.allowEmptyOracle)
        throw DomainError("train head: oracle is empty");

    const auto valCount = static_cast<std::size_t>(std::clamp(
        std::round(cfg.validationFraction * cfg.epochs * static_cast<double>(cfg.batch)), 1.0, kMaxValidationSamples));
    const auto valSamples = generateSamples(oracle, valCount, deriveSeed(cfg.seed, "validation"));
    const SampleBatch val = toBatch(valSamples);
    const MatX valFeatures = head.features().features(val.positions);

    AdamParameters adamParams{.learningRate = cfg.learningRate};
    AdamState embedState = makeAdamState(head.radiusEmbed(), adamParams);
    AdamState outputState = makeAdamState(head.output(), adamParams);

    TrainReport report;
    report.epochs = cfg.epochs;
    report.batch = cfg.batch;
    report.seed = cfg.seed;
    const std::uint64_t trainSeed = deriveSeed(cfg.seed, "train");
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const SampleBatch b = toBatch(
            generateSamples(oracle, static_cast<std::size_t>(cfg.batch), deriveSeed(trainSeed, static_cast<std::uint64_t>(epoch))));
        const MatX features = head.features().features(b.positions);

        auto embFwd = forwardBatch(head.radiusEmbed(), b.radii.transpose());
        auto outFwd = forwardBatch(head.output(), stack(features, embFwd.output));
        const VecX z = outFwd.output.row(0).transpose();
        const double loss = meanBce(z, b.labels);
        if (!std::isfinite(loss))
            throw NumericError("train head: non-finite loss at epoch " + std::to_string(epoch));
        report.trainLoss.push_back(loss);

        const VecX dz = bceLogitGradient(z, b.labels) / static_cast<double>(cfg.batch);
        auto outGrad = backward(outFwd.tape, dz.transpose());
        const MatX embSeed = outGrad.input.bottomRows(head.embedDim());
        auto embGrad = backward(embFwd.tape, embSeed, {.inputGradient = false, .parameterGradient = true});
        adamStep(head.mutableOutput(), outGrad.layers, outputState);
        adamStep(head.mutableRadiusEmbed(), embGrad.layers, embedState);

        const VecX vz = head.logits(valFeatures, val.radii);
        const double vloss = meanBce(vz, val.labels);
        if (!std::isfinite(vloss))
            throw NumericError("train head: non-finite validation loss at epoch " + std::to_string(epoch));
        report.validationLoss.push_back(vloss);
        report.validationAccuracy.push_back(accuracyOf(vz, val.labels));
    }
    return report;
}

double headAccuracy(const HeadModel& head, const std::vector<TrainingSample>& samples)
{
    const SampleBatch b = toBatch(samples);
    return accuracyOf(head.logits(head.features().features(b.positions), b.radii), b.labels);
}

std::vector<DepthResult> depthSweep(const DensityBackbone& backbone, const OccupancyOracle& oracle,
                                    const std::vector<int>& depths, const HeadConfig& headCfg,
                                    const HeadTrainConfig& trainCfg)
{
    std::vector<DepthResult> out;
    for (int d : depths) {
        HeadConfig cfg = headCfg;
        cfg.depth = d;
        HeadModel head = HeadModel::create(backbone, cfg, trainCfg.seed);
        TrainReport report = trainHead(head, oracle, trainCfg);
        out.push_back({d, std::move(report), std::move(head)});
    }
    return out;
}

NaiveEsdfRegressor::NaiveEsdfRegressor(TruncatedBackbone features, MlpNetwork output)
    : features_(std::move(features)), output_(std::move(output))
{
    if (output_.inputDim() != features_.featureDim() || output_.outputDim() != 1)
        throw StructuralError("naive regressor: output layer does not match the features");
}

NaiveEsdfRegressor NaiveEsdfRegressor::create(const DensityBackbone& backbone, int depth)
{
    auto features = backbone.truncate(depth);
    DenseLayer out;
    out.weight = MatX::Zero(1, features.featureDim());
    out.bias = VecX::Zero(1);
    out.activation = Activation::Identity;
    MlpNetwork output(features.featureDim(), {out});
    return NaiveEsdfRegressor(std::move(features), std::move(output));
}

double NaiveEsdfRegressor::distance(const Vec3& q) const
{
    return evaluate(output_, features_.features(q))(0, 0);
}

VecX NaiveEsdfRegressor::distance(const MatX& positions) const
{
    return evaluate(output_, features_.features(positions)).row(0).transpose();
}

std::vector<double> trainNaiveBaseline(NaiveEsdfRegressor& model, const AnalyticScene& scene,
                                       const HeadTrainConfig& cfg)
{
    if (cfg.epochs < 0 || cfg.batch < 1)
        throw DomainError("naive baseline: invalid epochs or batch");
    AdamState state = makeAdamState(model.output_, {.learningRate = cfg.learningRate});
    const std::uint64_t seed = deriveSeed(cfg.seed, "naive");
    std::vector<double> losses;
    MatX positions(3, cfg.batch);
    VecX targets(cfg.batch);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(deriveSeed(seed, static_cast<std::uint64_t>(epoch)));
        for (int j = 0; j < cfg.batch; ++j) {
            const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            positions.col(j) = p;
            targets[j] = sceneDistance(scene, p);
        }
        const MatX features = model.features_.features(positions);
        auto fwd = forwardBatch(model.output_, features);
        const VecX err = fwd.output.row(0).transpose() - targets;
        const double loss = err.squaredNorm() / cfg.batch;
        if (!std::isfinite(loss))
            throw NumericError("naive baseline: non-finite loss at epoch " + std::to_string(epoch));
        losses.push_back(loss);
        const VecX seedGrad = (2.0 / cfg.batch) * err;
        auto g = backward(fwd.tape, seedGrad.transpose(), {.inputGradient = false, .parameterGradient = true});
        adamStep(model.output_, g.layers, state);
    }
    return losses;
}

} // namespace nesdf
