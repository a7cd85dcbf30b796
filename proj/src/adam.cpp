#include "marlex/adam.hpp"

#include <cmath>

namespace marlex {

void adam_step(NetworkParams& params, const NetworkParams& grads, const AdamConfig& cfg,
               AdamState& state) {
    if (!grads.all_finite()) throw NonFiniteGradient("adam_step: non-finite gradient");
    ++state.step_count;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));

    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (int t = 0; t < NetworkParams::kTensorCount; ++t) {
        double* pw = p[static_cast<std::size_t>(t)]->data.data();
        const double* gw = g[static_cast<std::size_t>(t)]->data.data();
        double* mw = m[static_cast<std::size_t>(t)]->data.data();
        double* vw = v[static_cast<std::size_t>(t)]->data.data();
        const std::size_t count = p[static_cast<std::size_t>(t)]->size();
        for (std::size_t i = 0; i < count; ++i) {
            mw[i] = cfg.beta1 * mw[i] + (1.0 - cfg.beta1) * gw[i];
            vw[i] = cfg.beta2 * vw[i] + (1.0 - cfg.beta2) * gw[i] * gw[i];
            const double m_hat = mw[i] / bc1;
            const double v_hat = vw[i] / bc2;
            pw[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

}  // namespace marlex
