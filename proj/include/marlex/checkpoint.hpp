#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "marlex/network.hpp"

namespace marlex {

struct CheckpointMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint file: magic "DMRL", format version u32, tensor count u32, then
// per tensor: name length u32, UTF-8 name, rank u32, dims u64 each, and the
// values as little-endian 32-bit floats. Actor and critic files share the
// layout and differ only in the head shapes.
constexpr std::uint32_t kCheckpointVersion = 1;

void save_params(const NetworkParams& params, const std::string& path);

// Throws CheckpointMismatch when the stored tensor table does not match the
// expected (grid_side, head_size) shapes.
NetworkParams load_params(const std::string& path, int grid_side, int head_size);

// As above but shapes are inferred from the file.
NetworkParams load_params_any(const std::string& path);

}  // namespace marlex
