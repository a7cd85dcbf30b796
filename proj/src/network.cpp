#include "marlex/network.hpp"

#include <algorithm>
#include <cmath>

namespace marlex {

std::array<Tensor*, NetworkParams::kTensorCount> NetworkParams::tensors() {
    return {&conv_w, &conv_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &head_w, &head_b};
}

std::array<const Tensor*, NetworkParams::kTensorCount> NetworkParams::tensors() const {
    return {&conv_w, &conv_b, &fc1_w, &fc1_b, &fc2_w, &fc2_b, &head_w, &head_b};
}

std::array<const char*, NetworkParams::kTensorCount> NetworkParams::tensor_names() {
    return {"conv_w", "conv_b", "fc1_w", "fc1_b", "fc2_w", "fc2_b", "head_w", "head_b"};
}

NetworkParams NetworkParams::zeros_like() const {
    return make_network_shape(grid_side, head_size);
}

bool NetworkParams::all_finite() const {
    for (const Tensor* t : tensors())
        for (double v : t->data)
            if (!std::isfinite(v)) return false;
    return true;
}

NetworkParams make_network_shape(int grid_side, int head_size) {
    if (grid_side < kKernel) throw std::invalid_argument("network: grid side must be >= 3");
    NetworkParams p;
    p.grid_side = grid_side;
    p.head_size = head_size;
    p.conv_w = Tensor({kConvChannels, kInChannels, kKernel, kKernel});
    p.conv_b = Tensor({kConvChannels});
    p.fc1_w = Tensor({kHidden, p.flat_size()});
    p.fc1_b = Tensor({kHidden});
    p.fc2_w = Tensor({kHidden, kHidden});
    p.fc2_b = Tensor({kHidden});
    p.head_w = Tensor({static_cast<std::size_t>(head_size), kHidden});
    p.head_b = Tensor({static_cast<std::size_t>(head_size)});
    return p;
}

NetworkParams init_params(std::uint64_t seed, int grid_side, int head_size) {
    NetworkParams p = make_network_shape(grid_side, head_size);
    Rng rng(seed);
    auto fill_uniform = [&rng](Tensor& t, std::size_t fan_in) {
        const double bound = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& v : t.data) v = rng.uniform_real(-bound, bound);
    };
    fill_uniform(p.conv_w, kInChannels * kKernel * kKernel);
    fill_uniform(p.fc1_w, p.flat_size());
    fill_uniform(p.fc2_w, kHidden);
    fill_uniform(p.head_w, kHidden);
    return p;
}

namespace {

// conv + ReLU + flatten + FC stack up to the raw head outputs.
void trunk_forward(const NetworkParams& params, const Tensor& obs, ForwardCache& cache) {
    const int n = params.grid_side;
    const int m = params.conv_out_side();
    if (obs.shape.size() != 3 || obs.shape[0] != kInChannels ||
        obs.shape[1] != static_cast<std::size_t>(n) || obs.shape[2] != static_cast<std::size_t>(n))
        throw std::invalid_argument("forward: observation shape does not match network");

    cache.conv_out = Tensor({kConvChannels, static_cast<std::size_t>(m), static_cast<std::size_t>(m)});
    const std::size_t in_plane = static_cast<std::size_t>(n) * n;
    const std::size_t out_plane = static_cast<std::size_t>(m) * m;
    for (int o = 0; o < kConvChannels; ++o) {
        const double* w_o = params.conv_w.data.data() +
                            static_cast<std::size_t>(o) * kInChannels * kKernel * kKernel;
        double* out_o = cache.conv_out.data.data() + static_cast<std::size_t>(o) * out_plane;
        const double bias = params.conv_b[static_cast<std::size_t>(o)];
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                double acc = bias;
                for (int c = 0; c < kInChannels; ++c) {
                    const double* x_c = obs.data.data() + static_cast<std::size_t>(c) * in_plane;
                    const double* w_c = w_o + static_cast<std::size_t>(c) * kKernel * kKernel;
                    for (int u = 0; u < kKernel; ++u) {
                        const double* x_row = x_c + static_cast<std::size_t>(i + u) * n + j;
                        const double* w_row = w_c + static_cast<std::size_t>(u) * kKernel;
                        acc += w_row[0] * x_row[0] + w_row[1] * x_row[1] + w_row[2] * x_row[2];
                    }
                }
                out_o[static_cast<std::size_t>(i) * m + j] = acc > 0.0 ? acc : 0.0;
            }
        }
    }

    const std::size_t flat = params.flat_size();
    for (int h = 0; h < kHidden; ++h) {
        const double* w_row = params.fc1_w.data.data() + static_cast<std::size_t>(h) * flat;
        double acc = params.fc1_b[static_cast<std::size_t>(h)];
        for (std::size_t i = 0; i < flat; ++i) acc += w_row[i] * cache.conv_out.data[i];
        cache.h1[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
    }
    for (int h = 0; h < kHidden; ++h) {
        const double* w_row = params.fc2_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        double acc = params.fc2_b[static_cast<std::size_t>(h)];
        for (int i = 0; i < kHidden; ++i) acc += w_row[i] * cache.h1[static_cast<std::size_t>(i)];
        cache.h2[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
    }
    cache.head.assign(static_cast<std::size_t>(params.head_size), 0.0);
    for (int h = 0; h < params.head_size; ++h) {
        const double* w_row = params.head_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        double acc = params.head_b[static_cast<std::size_t>(h)];
        for (int i = 0; i < kHidden; ++i) acc += w_row[i] * cache.h2[static_cast<std::size_t>(i)];
        cache.head[static_cast<std::size_t>(h)] = acc;
    }
}

}  // namespace

PolicyOutput actor_forward(const NetworkParams& params, const Tensor& obs,
                           const std::array<bool, 10>* mask, ForwardCache* cache) {
    if (params.head_size != 10) throw std::invalid_argument("actor_forward: head size must be 10");
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    trunk_forward(params, obs, c);

    PolicyOutput out;
    bool any_allowed = false;
    for (int a = 0; a < 10; ++a) {
        double logit = c.head[static_cast<std::size_t>(a)];
        if (mask && !(*mask)[static_cast<std::size_t>(a)]) logit += kMaskOffset;
        else any_allowed = true;
        out.logits[static_cast<std::size_t>(a)] = logit;
    }
    if (!any_allowed) throw AllActionsMasked("actor_forward: every action is masked");

    const double max_logit = *std::max_element(out.logits.begin(), out.logits.end());
    double sum = 0.0;
    for (int a = 0; a < 10; ++a) {
        out.probs[static_cast<std::size_t>(a)] = std::exp(out.logits[static_cast<std::size_t>(a)] - max_logit);
        sum += out.probs[static_cast<std::size_t>(a)];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

double critic_forward(const NetworkParams& params, const Tensor& obs, ForwardCache* cache) {
    if (params.head_size != 1) throw std::invalid_argument("critic_forward: head size must be 1");
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    trunk_forward(params, obs, c);
    return c.head[0];
}

void backward(const NetworkParams& params, const Tensor& obs, const ForwardCache& cache,
              const std::vector<double>& dhead, NetworkParams& grads) {
    if (static_cast<int>(dhead.size()) != params.head_size)
        throw std::invalid_argument("backward: dhead size mismatch");
    const int n = params.grid_side;
    const int m = params.conv_out_side();
    const std::size_t flat = params.flat_size();

    // Head.
    std::array<double, kHidden> dh2{};
    for (int h = 0; h < params.head_size; ++h) {
        const double g = dhead[static_cast<std::size_t>(h)];
        if (g == 0.0) continue;
        double* gw_row = grads.head_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        const double* w_row = params.head_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        for (int i = 0; i < kHidden; ++i) {
            gw_row[i] += g * cache.h2[static_cast<std::size_t>(i)];
            dh2[static_cast<std::size_t>(i)] += g * w_row[i];
        }
        grads.head_b[static_cast<std::size_t>(h)] += g;
    }

    // FC2 (ReLU grad via post-activation sign).
    std::array<double, kHidden> dh1{};
    for (int h = 0; h < kHidden; ++h) {
        if (cache.h2[static_cast<std::size_t>(h)] <= 0.0) continue;
        const double g = dh2[static_cast<std::size_t>(h)];
        if (g == 0.0) continue;
        double* gw_row = grads.fc2_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        const double* w_row = params.fc2_w.data.data() + static_cast<std::size_t>(h) * kHidden;
        for (int i = 0; i < kHidden; ++i) {
            gw_row[i] += g * cache.h1[static_cast<std::size_t>(i)];
            dh1[static_cast<std::size_t>(i)] += g * w_row[i];
        }
        grads.fc2_b[static_cast<std::size_t>(h)] += g;
    }

    // FC1.
    std::vector<double> dflat(flat, 0.0);
    for (int h = 0; h < kHidden; ++h) {
        if (cache.h1[static_cast<std::size_t>(h)] <= 0.0) continue;
        const double g = dh1[static_cast<std::size_t>(h)];
        if (g == 0.0) continue;
        double* gw_row = grads.fc1_w.data.data() + static_cast<std::size_t>(h) * flat;
        const double* w_row = params.fc1_w.data.data() + static_cast<std::size_t>(h) * flat;
        for (std::size_t i = 0; i < flat; ++i) {
            gw_row[i] += g * cache.conv_out.data[i];
            dflat[i] += g * w_row[i];
        }
        grads.fc1_b[static_cast<std::size_t>(h)] += g;
    }

    // Conv.
    const std::size_t in_plane = static_cast<std::size_t>(n) * n;
    const std::size_t out_plane = static_cast<std::size_t>(m) * m;
    for (int o = 0; o < kConvChannels; ++o) {
        const double* act_o = cache.conv_out.data.data() + static_cast<std::size_t>(o) * out_plane;
        const double* dflat_o = dflat.data() + static_cast<std::size_t>(o) * out_plane;
        double* gw_o = grads.conv_w.data.data() + static_cast<std::size_t>(o) * kInChannels * kKernel * kKernel;
        double gb = 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * m + j;
                if (act_o[idx] <= 0.0) continue;
                const double g = dflat_o[idx];
                if (g == 0.0) continue;
                gb += g;
                for (int c = 0; c < kInChannels; ++c) {
                    const double* x_c = obs.data.data() + static_cast<std::size_t>(c) * in_plane;
                    double* gw_c = gw_o + static_cast<std::size_t>(c) * kKernel * kKernel;
                    for (int u = 0; u < kKernel; ++u) {
                        const double* x_row = x_c + static_cast<std::size_t>(i + u) * n + j;
                        double* gw_row = gw_c + static_cast<std::size_t>(u) * kKernel;
                        gw_row[0] += g * x_row[0];
                        gw_row[1] += g * x_row[1];
                        gw_row[2] += g * x_row[2];
                    }
                }
            }
        }
        grads.conv_b[static_cast<std::size_t>(o)] += gb;
    }
}

std::vector<double> nll_grad(const PolicyOutput& out, int action, double coeff) {
    std::vector<double> d(10, 0.0);
    for (int a = 0; a < 10; ++a) d[static_cast<std::size_t>(a)] = coeff * out.probs[static_cast<std::size_t>(a)];
    d[static_cast<std::size_t>(action)] -= coeff;
    return d;
}

std::vector<double> entropy_grad(const PolicyOutput& out, double coeff) {
    double entropy = 0.0;
    for (double p : out.probs)
        if (p > 0.0) entropy -= p * std::log(p);
    std::vector<double> d(10, 0.0);
    for (int a = 0; a < 10; ++a) {
        const double p = out.probs[static_cast<std::size_t>(a)];
        if (p > 0.0) d[static_cast<std::size_t>(a)] = coeff * p * (std::log(p) + entropy);
    }
    return d;
}

std::pair<int, double> sample_action(const PolicyOutput& out, Rng& rng) {
    const double u = rng.uniform_real();
    double cdf = 0.0;
    int picked = 9;
    for (int a = 0; a < 10; ++a) {
        cdf += out.probs[static_cast<std::size_t>(a)];
        if (u < cdf) {
            picked = a;
            break;
        }
    }
    while (out.probs[static_cast<std::size_t>(picked)] == 0.0 && picked > 0) --picked;
    return {picked, std::log(out.probs[static_cast<std::size_t>(picked)])};
}

int argmax_action(const PolicyOutput& out) {
    int best = 0;
    for (int a = 1; a < 10; ++a)
        if (out.probs[static_cast<std::size_t>(a)] > out.probs[static_cast<std::size_t>(best)]) best = a;
    return best;
}

}  // namespace marlex
