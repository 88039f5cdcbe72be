#pragma once

#include "nesdf/mlp.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nesdf {

/// Optional block appended after the layer payload of an NWTS file:
/// 4-byte tag, u32 payload length, payload bytes. Readers that do not know a tag skip it.
struct CheckpointExtension {
    std::string tag; // exactly 4 characters
    std::string payload;
};

struct Checkpoint {
    MlpNetwork network;
    std::vector<CheckpointExtension> extensions;

    const CheckpointExtension* find(std::string_view tag) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// NWTS layout: "NWTS", u32 version, u32 layer_count, then per layer
/// u32 rows, u32 cols, u8 activation, rows*cols f64 weights (row-major), rows f64 biases.
/// All little-endian. The network input dimension is the first layer's column count.
void writeCheckpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint readCheckpoint(std::istream& in);

void saveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint loadCheckpoint(const std::filesystem::path& path);

} // namespace nesdf
