#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marlex/grid.hpp"
#include "marlex/trace.hpp"

namespace marlex {

struct MetricsReport {
    std::optional<int> n_steps;  // empty when the coverage threshold was never reached
    double jaccard = 0.0;        // mean pairwise Jaccard over agent-specific maps
    long d_shared = 0;           // total cells delivered across communication events
    bool success = false;        // coverage reached, no collision, within the cap
    std::vector<double> jaccard_pairs;  // row-major upper triangle, pairs (k, j > k)
};

// First index (0 = the spawn detection) at which the coverage series reaches
// p; coverage_series[i] is the best per-agent free-cell coverage after step i.
std::optional<int> steps_to_coverage(const std::vector<double>& coverage_series, double p);
std::optional<int> steps_to_coverage(const EpisodeTrace& trace, double p);

// |known(A) and known(B)| / |known(A) or known(B)| over discovered cells;
// 1 when both sets are empty.
double jaccard_pair(const GridMap& a, const GridMap& b);

// 2 * sum_{k<j} J(M_k, M_j) / (|I| * (|I| - 1)).
double jaccard_aggregate(const std::vector<GridMap>& agent_specific_maps);

// Total new cells delivered to recipients across all communication events.
long shared_data(const EpisodeTrace& trace);

// Fraction of reports with the success flag; throws on empty input.
double robustness(const std::vector<MetricsReport>& results);

struct MetricsSummary {
    double n_steps_mean = 0.0, n_steps_std = 0.0;
    double jaccard_mean = 0.0, jaccard_std = 0.0;
    double d_shared_mean = 0.0, d_shared_std = 0.0;
    double robustness = 0.0;
    int episodes = 0;
    int reached = 0;  // episodes contributing to the n_steps statistics
};
MetricsSummary summarize(const std::vector<MetricsReport>& results);

// CSV emission; headers are stable and golden-file tested.
std::string metrics_csv_header();
std::string metrics_csv_row(int episode, const MetricsReport& r);
std::string summary_csv_header();
std::string summary_csv_row(const std::string& label, const MetricsSummary& s);

}  // namespace marlex
