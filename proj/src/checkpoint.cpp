#include "nesdf/checkpoint.hpp"
#include "nesdf/binary_io.hpp"

#include <fstream>
#include <sstream>

namespace nesdf {

const CheckpointExtension* Checkpoint::find(std::string_view tag) const
{
    for (const auto& e : extensions)
        if (e.tag == tag)
            return &e;
    return nullptr;
}

void writeCheckpoint(std::ostream& out, const Checkpoint& ckpt)
{
    const auto& net = ckpt.network;
    if (net.layerCount() == 0)
        throw StructuralError("checkpoint: network has no layers");
    BinaryWriter w(out);
    w.bytes("NWTS");
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(net.layerCount()));
    for (const auto& l : net.layers()) {
        w.u32(static_cast<std::uint32_t>(l.rows()));
        w.u32(static_cast<std::uint32_t>(l.cols()));
        w.u8(static_cast<std::uint8_t>(l.activation));
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            for (Eigen::Index j = 0; j < l.cols(); ++j)
                w.f64(l.weight(i, j));
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            w.f64(l.bias[i]);
    }
    for (const auto& e : ckpt.extensions) {
        if (e.tag.size() != 4)
            throw StructuralError("checkpoint: extension tag must be 4 bytes");
        w.bytes(e.tag);
        w.u32(static_cast<std::uint32_t>(e.payload.size()));
        w.bytes(e.payload);
    }
    if (!out)
        throw FormatError("checkpoint: write failed");
}

Checkpoint readCheckpoint(std::istream& in)
{
    BinaryReader r(in, "checkpoint");
    if (r.bytes(4) != "NWTS")
        throw FormatError("checkpoint: bad magic (expected NWTS)");
    const auto version = r.u32();
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    const auto count = r.u32();
    if (count == 0)
        throw FormatError("checkpoint: zero layers");
    std::vector<DenseLayer> layers;
    layers.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto rows = r.u32();
        const auto cols = r.u32();
        const auto act = r.u8();
        if (act > 2)
            throw FormatError("checkpoint: unknown activation code " + std::to_string(act));
        if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1ULL << 28))
            throw FormatError("checkpoint: implausible layer shape");
        DenseLayer l;
        l.activation = static_cast<Activation>(act);
        l.weight.resize(rows, cols);
        l.bias.resize(rows);
        for (std::uint32_t i = 0; i < rows; ++i)
            for (std::uint32_t j = 0; j < cols; ++j)
                l.weight(i, j) = r.f64();
        for (std::uint32_t i = 0; i < rows; ++i)
            l.bias[i] = r.f64();
        layers.push_back(std::move(l));
    }
    Checkpoint ckpt;
    std::vector<CheckpointExtension> ext;
    while (!r.atEnd()) {
        CheckpointExtension e;
        e.tag = r.bytes(4);
        const auto len = r.u32();
        e.payload = r.bytes(len);
        ext.push_back(std::move(e));
    }
    ckpt.extensions = std::move(ext);

    // A skip connection is recorded by the owner in an extension, so chain validation is left
    // to whoever knows the skip index.
    const int inputDim = static_cast<int>(layers.front().cols());
    ckpt.network = MlpNetwork::unchecked(inputDim, std::move(layers));
    return ckpt;
}

void saveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("checkpoint: cannot open " + path.string() + " for writing");
    writeCheckpoint(out, ckpt);
}

Checkpoint loadCheckpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("checkpoint: cannot open " + path.string());
    return readCheckpoint(in);
}

} // namespace nesdf
