#pragma once

#include "marlex/network.hpp"

namespace marlex {

// Adam with bias correction; beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
struct AdamState {
    NetworkParams m;  // first moments, same shapes as the parameters
    NetworkParams v;  // second moments
    long step_count = 0;

    AdamState() = default;
    explicit AdamState(const NetworkParams& shape)
        : m(shape.zeros_like()), v(shape.zeros_like()) {}
};

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One in-place update; throws NonFiniteGradient on non-finite gradients.
void adam_step(NetworkParams& params, const NetworkParams& grads, const AdamConfig& cfg,
               AdamState& state);

}  // namespace marlex
