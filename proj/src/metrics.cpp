#include "marlex/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace marlex {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
    mean = 0.0;
    sd = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    sd = std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

std::optional<int> steps_to_coverage(const std::vector<double>& coverage_series, double p) {
    for (std::size_t i = 0; i < coverage_series.size(); ++i)
        if (coverage_series[i] >= p) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> steps_to_coverage(const EpisodeTrace& trace, double p) {
    std::vector<double> series;
    series.reserve(trace.steps.size() + 1);
    series.push_back(trace.initial_coverage);
    for (const auto& s : trace.steps) series.push_back(s.coverage);
    return steps_to_coverage(series, p);
}

double jaccard_pair(const GridMap& a, const GridMap& b) {
    if (a.size() != b.size()) throw std::invalid_argument("jaccard_pair: size mismatch");
    long inter = 0;
    long uni = 0;
    for (std::size_t i = 0; i < a.cells().size(); ++i) {
        const bool ka = a.cells()[i] != CellState::Unknown;
        const bool kb = b.cells()[i] != CellState::Unknown;
        if (ka && kb) ++inter;
        if (ka || kb) ++uni;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double jaccard_aggregate(const std::vector<GridMap>& maps) {
    const std::size_t n = maps.size();
    if (n < 2) throw std::invalid_argument("jaccard_aggregate: need at least 2 maps");
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = k + 1; j < n; ++j) sum += jaccard_pair(maps[k], maps[j]);
    return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

long shared_data(const EpisodeTrace& trace) {
    long total = 0;
    for (const auto& s : trace.steps)
        for (long g : s.comm_gain) total += g;
    return total;
}

double robustness(const std::vector<MetricsReport>& results) {
    if (results.empty()) throw std::invalid_argument("robustness: empty result set");
    long ok = 0;
    for (const auto& r : results)
        if (r.success) ++ok;
    return static_cast<double>(ok) / static_cast<double>(results.size());
}

MetricsSummary summarize(const std::vector<MetricsReport>& results) {
    MetricsSummary s;
    s.episodes = static_cast<int>(results.size());
    std::vector<double> steps, jac, shared;
    for (const auto& r : results) {
        if (r.n_steps) steps.push_back(static_cast<double>(*r.n_steps));
        jac.push_back(r.jaccard);
        shared.push_back(static_cast<double>(r.d_shared));
    }
    s.reached = static_cast<int>(steps.size());
    mean_std(steps, s.n_steps_mean, s.n_steps_std);
    mean_std(jac, s.jaccard_mean, s.jaccard_std);
    mean_std(shared, s.d_shared_mean, s.d_shared_std);
    s.robustness = robustness(results);
    return s;
}

std::string metrics_csv_header() {
    return "episode,n_steps,jaccard,d_shared,success";
}

std::string metrics_csv_row(int episode, const MetricsReport& r) {
    std::string row = std::to_string(episode) + ",";
    row += r.n_steps ? std::to_string(*r.n_steps) : std::string("");
    row += "," + fmt(r.jaccard) + "," + std::to_string(r.d_shared) + ",";
    row += r.success ? "1" : "0";
    return row;
}

std::string summary_csv_header() {
    return "label,episodes,reached,n_steps_mean,n_steps_std,jaccard_mean,jaccard_std,"
           "d_shared_mean,d_shared_std,robustness";
}

std::string summary_csv_row(const std::string& label, const MetricsSummary& s) {
    std::string row = label;
    row += "," + std::to_string(s.episodes) + "," + std::to_string(s.reached);
    row += "," + fmt(s.n_steps_mean) + "," + fmt(s.n_steps_std);
    row += "," + fmt(s.jaccard_mean) + "," + fmt(s.jaccard_std);
    row += "," + fmt(s.d_shared_mean) + "," + fmt(s.d_shared_std);
    row += "," + fmt(s.robustness);
    return row;
}

}  // namespace marlex
