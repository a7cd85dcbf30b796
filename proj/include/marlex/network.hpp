#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "marlex/rng.hpp"
#include "marlex/tensor.hpp"

namespace marlex {

struct AllActionsMasked : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kConvChannels = 64;
constexpr int kKernel = 3;
constexpr int kInChannels = 3;
constexpr int kHidden = 128;
constexpr double kMaskOffset = -1e9;

// Conv(3->64, 3x3, stride 1, no padding) + ReLU, flatten, two FC-128 + ReLU,
// linear head (10 logits for an actor, 1 value for a critic).
struct NetworkParams {
    int grid_side = 0;   // n; conv output is 64 x (n-2) x (n-2)
    int head_size = 0;   // 10 or 1
    Tensor conv_w;       // 64 x 3 x 3 x 3
    Tensor conv_b;       // 64
    Tensor fc1_w;        // 128 x (64*(n-2)^2)
    Tensor fc1_b;        // 128
    Tensor fc2_w;        // 128 x 128
    Tensor fc2_b;        // 128
    Tensor head_w;       // head_size x 128
    Tensor head_b;       // head_size

    int conv_out_side() const { return grid_side - kKernel + 1; }
    std::size_t flat_size() const {
        return static_cast<std::size_t>(kConvChannels) * conv_out_side() * conv_out_side();
    }

    static constexpr int kTensorCount = 8;
    std::array<Tensor*, kTensorCount> tensors();
    std::array<const Tensor*, kTensorCount> tensors() const;
    static std::array<const char*, kTensorCount> tensor_names();

    // Zero-filled parameter set with the same shapes (gradient accumulator).
    NetworkParams zeros_like() const;
    bool all_finite() const;
};

// Shapes for (n, head_size); all values zero.
NetworkParams make_network_shape(int grid_side, int head_size);

// Kaiming-uniform fan-in init: weights ~ U(-sqrt(2/fan_in), +sqrt(2/fan_in)),
// biases zero. Deterministic per seed.
NetworkParams init_params(std::uint64_t seed, int grid_side, int head_size);

struct PolicyOutput {
    std::array<double, 10> logits{};
    std::array<double, 10> probs{};
};

// Intermediate activations kept for the backward pass.
struct ForwardCache {
    Tensor conv_out;               // post-ReLU, 64 x m x m (flat)
    std::array<double, kHidden> h1{};
    std::array<double, kHidden> h2{};
    std::vector<double> head;      // raw head outputs
};

// obs must be 3 x n x n. For actors, a mask marks allowed actions; masked
// logits get kMaskOffset before the softmax. Throws AllActionsMasked when
// nothing is allowed.
PolicyOutput actor_forward(const NetworkParams& params, const Tensor& obs,
                           const std::array<bool, 10>* mask = nullptr,
                           ForwardCache* cache = nullptr);
double critic_forward(const NetworkParams& params, const Tensor& obs, ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(params) into grads given d(loss)/d(head outputs).
// cache must come from the forward pass of the same (params, obs).
void backward(const NetworkParams& params, const Tensor& obs, const ForwardCache& cache,
              const std::vector<double>& dhead, NetworkParams& grads);

// dlogits of coeff * (-log probs[action]); masked entries are exactly zero.
std::vector<double> nll_grad(const PolicyOutput& out, int action, double coeff);
// dlogits of -coeff * entropy(probs).
std::vector<double> entropy_grad(const PolicyOutput& out, double coeff);

// Categorical draw; returns (action index, log prob).
std::pair<int, double> sample_action(const PolicyOutput& out, Rng& rng);
// Evaluation mode: index of max prob, ties broken by lowest index.
int argmax_action(const PolicyOutput& out);

}  // namespace marlex
