#include "nesdf/backbone.hpp"
#include "nesdf/adam.hpp"
#include "nesdf/binary_io.hpp"
#include "nesdf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nesdf {

namespace {

void requireInCube(const Vec3& q)
{
    if (!q.allFinite() || (q.array().abs() > 1.0).any())
        throw DomainError("backbone: query outside the normalized cube [-1,1]^3");
}

std::optional<std::size_t> skipIndex(const BackboneConfig& cfg)
{
    if (!cfg.skipLayer)
        return std::nullopt;
    return static_cast<std::size_t>(*cfg.skipLayer - 1);
}

void validateConfig(const BackboneConfig& cfg)
{
    if (cfg.depth < 1 || cfg.width < 1)
        throw DomainError("backbone: depth and width must be positive");
    if (cfg.skipLayer && (*cfg.skipLayer < 2 || *cfg.skipLayer > cfg.depth))
        throw DomainError("backbone: skip layer must lie in 2..depth");
    if (cfg.encoding.numFrequencies < 0)
        throw DomainError("backbone: negative frequency count");
}

} // namespace

TruncatedBackbone::TruncatedBackbone(PositionalEncoding encoding, MlpNetwork layers)
    : encoding_(encoding), layers_(std::move(layers))
{
}

VecX TruncatedBackbone::features(const Vec3& q) const
{
    requireInCube(q);
    return evaluate(layers_, encode(q, encoding_)).col(0);
}

MatX TruncatedBackbone::features(const MatX& positions) const
{
    for (Eigen::Index j = 0; j < positions.cols(); ++j)
        requireInCube(positions.col(j));
    return evaluate(layers_, encodeBatch(positions, encoding_));
}

MatX TruncatedBackbone::featureJacobian(const Vec3& q) const
{
    requireInCube(q);
    const VecX enc = encode(q, encoding_);
    const auto n = featureDim();
    MatX inputs = enc.replicate(1, n);
    auto fwd = forwardBatch(layers_, inputs);
    const auto g = backward(fwd.tape, MatX::Identity(n, n), {.inputGradient = true, .parameterGradient = false});
    // g.input column i = d feature_i / d enc
    return g.input.transpose() * encodeJacobian(q, encoding_);
}

Vec3 TruncatedBackbone::pullback(const Vec3& q, const VecX& featureSeed) const
{
    requireInCube(q);
    const VecX enc = encode(q, encoding_);
    auto fwd = forward(layers_, enc);
    const auto g = backward(fwd.tape, featureSeed, {.inputGradient = true, .parameterGradient = false});
    return encodeJacobian(q, encoding_).transpose() * g.input.col(0);
}

DensityBackbone::DensityBackbone(BackboneConfig cfg, MlpNetwork net) : cfg_(std::move(cfg)), net_(std::move(net))
{
    validateConfig(cfg_);
    if (net_.layerCount() != static_cast<std::size_t>(cfg_.depth) + 1)
        throw StructuralError("backbone: expected depth + 1 layers");
    if (net_.inputDim() != cfg_.encoding.outputDim(3))
        throw StructuralError("backbone: network input does not match the encoding");
    for (int i = 0; i < cfg_.depth; ++i) {
        const auto& l = net_.layer(static_cast<std::size_t>(i));
        if (l.activation != Activation::Relu || l.rows() != cfg_.width)
            throw StructuralError("backbone: hidden layers must be relu with the configured width");
    }
    const auto& head = net_.layer(static_cast<std::size_t>(cfg_.depth));
    if (head.rows() != 1 || head.activation != Activation::Identity)
        throw StructuralError("backbone: density head must be a single linear unit");
    if (net_.skipLayer() != skipIndex(cfg_))
        throw StructuralError("backbone: skip connection does not match the configuration");
}

DensityBackbone DensityBackbone::create(const BackboneConfig& cfg, std::uint64_t seed)
{
    validateConfig(cfg);
    const int inDim = cfg.encoding.outputDim(3);
    const auto skip = skipIndex(cfg);
    std::vector<DenseLayer> layers;
    int prev = inDim;
    for (int i = 0; i < cfg.depth; ++i) {
        const int cols = prev + ((skip && *skip == static_cast<std::size_t>(i)) ? inDim : 0);
        layers.push_back(makeDenseLayer(cols, cfg.width, Activation::Relu, deriveSeed(seed, static_cast<std::uint64_t>(i))));
        prev = cfg.width;
    }
    auto out = makeDenseLayer(prev, 1, Activation::Identity, deriveSeed(seed, static_cast<std::uint64_t>(cfg.depth)));
    out.weight *= 0.01;
    layers.push_back(std::move(out));
    return DensityBackbone(cfg, MlpNetwork(inDim, std::move(layers), skip));
}

double DensityBackbone::density(const Vec3& q) const
{
    requireInCube(q);
    return softplus(evaluate(net_, encode(q, cfg_.encoding))(0, 0));
}

VecX DensityBackbone::density(const MatX& positions) const
{
    for (Eigen::Index j = 0; j < positions.cols(); ++j)
        requireInCube(positions.col(j));
    const MatX z = evaluate(net_, encodeBatch(positions, cfg_.encoding));
    return z.row(0).transpose().unaryExpr([](double v) { return softplus(v); });
}

TruncatedBackbone DensityBackbone::truncate(int k) const
{
    if (k < 1 || k > cfg_.depth)
        throw DomainError("truncate: depth " + std::to_string(k) + " outside 1.." + std::to_string(cfg_.depth));
    return TruncatedBackbone(cfg_.encoding, net_.truncated(static_cast<std::size_t>(k)));
}

Checkpoint DensityBackbone::toCheckpoint() const
{
    std::ostringstream payload;
    BinaryWriter w(payload);
    w.u32(static_cast<std::uint32_t>(cfg_.encoding.numFrequencies));
    w.u8(cfg_.encoding.includeInput ? 1 : 0);
    w.u32(cfg_.skipLayer ? static_cast<std::uint32_t>(*cfg_.skipLayer) : 0u);
    return Checkpoint{net_, {{"BKBN", payload.str()}}};
}

DensityBackbone DensityBackbone::fromCheckpoint(const Checkpoint& ckpt)
{
    const auto* ext = ckpt.find("BKBN");
    if (ext == nullptr)
        throw FormatError("backbone checkpoint: missing BKBN extension");
    std::istringstream in(ext->payload);
    BinaryReader r(in, "backbone extension");
    BackboneConfig cfg;
    cfg.encoding.numFrequencies = static_cast<int>(r.u32());
    cfg.encoding.includeInput = r.u8() != 0;
    const auto skip = r.u32();
    if (skip != 0)
        cfg.skipLayer = static_cast<int>(skip);
    const auto& layers = ckpt.network.layers();
    if (layers.size() < 2)
        throw FormatError("backbone checkpoint: too few layers");
    cfg.depth = static_cast<int>(layers.size()) - 1;
    cfg.width = static_cast<int>(layers.front().rows());
    try {
        MlpNetwork net(ckpt.network.inputDim(), layers, skipIndex(cfg));
        return DensityBackbone(cfg, std::move(net));
    } catch (const StructuralError& e) {
        throw FormatError(std::string("backbone checkpoint: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("backbone checkpoint: ") + e.what());
    }
}

void saveBackbone(const std::filesystem::path& path, const DensityBackbone& backbone)
{
    saveCheckpoint(path, backbone.toCheckpoint());
}

DensityBackbone loadBackbone(const std::filesystem::path& path)
{
    return DensityBackbone::fromCheckpoint(loadCheckpoint(path));
}

PretrainTarget sceneTarget(const AnalyticScene& scene, double occupiedDensity, int supervisionResolution)
{
    PretrainTarget t;
    t.density = [scene, occupiedDensity](const Vec3& q) { return sceneContains(scene, q) ? occupiedDensity : 0.0; };
    const int n = supervisionResolution;
    const double cell = 2.0 / n;
    for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Vec3 c(-1.0 + (ix + 0.5) * cell, -1.0 + (iy + 0.5) * cell, -1.0 + (iz + 0.5) * cell);
                if (sceneContains(scene, c))
                    t.focus.push_back(c);
            }
    return t;
}

PretrainResult pretrain(DensityBackbone& backbone, const PretrainTarget& target, const PretrainConfig& cfg)
{
    if (cfg.steps < 1 || cfg.batch < 1)
        throw DomainError("pretrain: steps and batch must be at least 1");
    if (cfg.supervisionResolution < 2)
        throw DomainError("pretrain: supervision resolution must be at least 2");
    if (!target.density)
        throw DomainError("pretrain: missing target density");

    Rng rng(cfg.seed);
    const int n = cfg.supervisionResolution;
    const double cell = 2.0 / n;
    const auto snap = [&](double v) {
        const double idx = std::clamp(std::floor((v + 1.0) / cell), 0.0, static_cast<double>(n - 1));
        return -1.0 + (idx + 0.5) * cell;
    };
    // focus samples are jittered by a few cells so the surface band is covered from both sides
    const double jitter = 4.0 * cell;

    MlpNetwork& net = backbone.mutableNetwork();
    AdamState adam = makeAdamState(net, {.learningRate = cfg.learningRate});
    PretrainResult result;
    result.loss.reserve(static_cast<std::size_t>(cfg.steps));
    MatX positions(3, cfg.batch);
    VecX targets(cfg.batch);
    for (int step = 0; step < cfg.steps; ++step) {
        for (int j = 0; j < cfg.batch; ++j) {
            Vec3 p;
            if (!target.focus.empty() && rng.uniform() < cfg.focusFraction) {
                const Vec3& c = target.focus[rng.below(target.focus.size())];
                for (int a = 0; a < 3; ++a)
                    p[a] = c[a] + rng.uniform(-jitter, jitter);
            } else {
                for (int a = 0; a < 3; ++a)
                    p[a] = rng.uniform(-1.0, 1.0);
            }
            for (int a = 0; a < 3; ++a)
                p[a] = snap(p[a]);
            positions.col(j) = p;
            targets[j] = target.density(p);
        }
        auto fwd = forwardBatch(net, encodeBatch(positions, backbone.config().encoding));
        const VecX z = fwd.output.row(0).transpose();
        const VecX sigma = z.unaryExpr([](double v) { return softplus(v); });
        const VecX err = sigma - targets;
        const double loss = err.squaredNorm() / cfg.batch;
        if (!std::isfinite(loss))
            throw NumericError("pretrain: non-finite loss at step " + std::to_string(step));
        result.loss.push_back(loss);
        const VecX dz = (2.0 / cfg.batch) * err.cwiseProduct(z.unaryExpr([](double v) { return sigmoid(v); }));
        auto g = backward(fwd.tape, dz.transpose(), {.inputGradient = false, .parameterGradient = true});
        adamStep(net, g.layers, adam);
    }
    return result;
}

} // namespace nesdf
