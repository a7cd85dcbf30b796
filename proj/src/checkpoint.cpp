#include "marlex/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace marlex {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'R', 'L'};

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

float read_f32(std::istream& is) {
    const std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void save_params(const NetworkParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_u32(os, kCheckpointVersion);
    write_u32(os, NetworkParams::kTensorCount);
    const auto tensors = params.tensors();
    const auto names = NetworkParams::tensor_names();
    for (int t = 0; t < NetworkParams::kTensorCount; ++t) {
        const std::string name = names[static_cast<std::size_t>(t)];
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        const Tensor& tensor = *tensors[static_cast<std::size_t>(t)];
        write_u32(os, static_cast<std::uint32_t>(tensor.shape.size()));
        for (std::size_t d : tensor.shape) write_u64(os, d);
        for (double v : tensor.data) write_f32(os, static_cast<float>(v));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

namespace {

NetworkParams load_impl(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointMismatch("checkpoint: bad magic in " + path);
    const std::uint32_t version = read_u32(is);
    if (version != kCheckpointVersion)
        throw CheckpointMismatch("checkpoint: unsupported version in " + path);
    const std::uint32_t count = read_u32(is);
    if (count != NetworkParams::kTensorCount)
        throw CheckpointMismatch("checkpoint: unexpected tensor count in " + path);

    struct Entry {
        std::string name;
        Tensor tensor;
    };
    std::vector<Entry> entries;
    for (std::uint32_t t = 0; t < count; ++t) {
        Entry e;
        const std::uint32_t name_len = read_u32(is);
        e.name.resize(name_len);
        is.read(e.name.data(), name_len);
        const std::uint32_t rank = read_u32(is);
        std::vector<std::size_t> shape(rank);
        for (std::uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<std::size_t>(read_u64(is));
        e.tensor = Tensor(shape);
        for (double& v : e.tensor.data) v = static_cast<double>(read_f32(is));
        entries.push_back(std::move(e));
    }

    // Recover (n, head) from the stored shapes.
    const auto names = NetworkParams::tensor_names();
    auto find = [&entries](const char* name) -> Tensor& {
        for (auto& e : entries)
            if (e.name == name) return e.tensor;
        throw CheckpointMismatch(std::string("checkpoint: missing tensor ") + name);
    };
    Tensor& fc1 = find("fc1_w");
    Tensor& head = find("head_w");
    if (fc1.shape.size() != 2 || head.shape.size() != 2)
        throw CheckpointMismatch("checkpoint: unexpected tensor ranks");
    const std::size_t flat = fc1.shape[1];
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(flat) / kConvChannels)));
    const int grid_side = m + kKernel - 1;
    const int head_size = static_cast<int>(head.shape[0]);

    NetworkParams params = make_network_shape(grid_side, head_size);
    auto dst = params.tensors();
    for (int t = 0; t < NetworkParams::kTensorCount; ++t) {
        Tensor& src = find(names[static_cast<std::size_t>(t)]);
        if (src.shape != dst[static_cast<std::size_t>(t)]->shape)
            throw CheckpointMismatch(std::string("checkpoint: shape mismatch for ") +
                                     names[static_cast<std::size_t>(t)] + " in " + path);
        *dst[static_cast<std::size_t>(t)] = std::move(src);
    }
    return params;
}

}  // namespace

NetworkParams load_params_any(const std::string& path) { return load_impl(path); }

NetworkParams load_params(const std::string& path, int grid_side, int head_size) {
    NetworkParams p = load_impl(path);
    if (p.grid_side != grid_side || p.head_size != head_size)
        throw CheckpointMismatch("checkpoint: " + path + " holds a " + std::to_string(p.grid_side) +
                                 "/" + std::to_string(p.head_size) + " network, expected " +
                                 std::to_string(grid_side) + "/" + std::to_string(head_size));
    return p;
}

}  // namespace marlex
