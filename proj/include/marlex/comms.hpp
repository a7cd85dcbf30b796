#pragma once

#include <stdexcept>
#include <vector>

#include "marlex/maps.hpp"

namespace marlex {

struct ConflictingKnownStates : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Connected component of agents that simultaneously chose Comm, with edges
// given by pairwise Chebyshev range. Members are sorted agent ids.
struct CommNetwork {
    std::vector<int> members;
};

struct CommOutcome {
    std::vector<long> gain;  // per agent; 0 for non-members and singletons
    std::vector<CommNetwork> networks;
};

// Two known cells that disagree raise ConflictingKnownStates under Strict
// (a simulator bug in grid mode); OccupiedWins applies in deployment where
// sensing at different times may disagree.
enum class MergeRule { Strict, OccupiedWins };

// Components over the agents with comm_choice = true only; a silent in-range
// agent does not bridge two networks.
std::vector<CommNetwork> form_networks(const std::vector<Cell>& positions,
                                       const std::vector<bool>& comm_choices, double r_c,
                                       double cell_len);

// Cell-wise union: Unknown only where every input is Unknown.
GridMap merge_network(const std::vector<const GridMap*>& maps, MergeRule rule = MergeRule::Strict);

// Merges collaborative maps per network (size >= 2), assigns the merged map
// to every member, credits per-member gain, adds the gain to prev_step_gain,
// and resets the pairwise discovery counters inside each network.
CommOutcome resolve_communication(std::vector<AgentState>& agents,
                                  const std::vector<bool>& comm_choices, double r_c,
                                  MergeRule rule = MergeRule::Strict);

}  // namespace marlex
