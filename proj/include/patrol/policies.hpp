#pragma once

#include <utility>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/gridmap.hpp"
#include "patrol/idleness.hpp"
#include "patrol/qnet.hpp"
#include "patrol/rng.hpp"

namespace patrol {

enum class PolicyKind { Random, Greedy, Sweeping, RLCoordinated, RLDecentralized };

const char* policy_name(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);

// Role of one drone inside a sweeping swarm.
enum class SweepRole { Sweeper, Greedy, Random };

// 1 sweeper, 1 random (when the swarm has at least two drones), rest greedy.
std::vector<SweepRole> sweeping_roles(int n_drones);

// Uniform draw over the feasible actions of c.
Action random_policy(const GridSpec& grid, CellIndex c, Rng& rng);

// Move to the feasible adjacent cell maximizing idleness * importance;
// ties resolve in canonical action order (Stay first).
Action greedy_policy(const GridSpec& grid, const IdlenessMap& idleness, const EnvModel& env,
                     CellIndex c, int k);

// Serpentine cursor over an obstacle-free grid; sweeps forward to the last
// cell, then retraces backward, with period 2*nx*ny - 2.
struct SweepState {
    int rank = 0;       // position along the serpentine ordering
    int direction = 1;  // +1 forward, -1 backward
};

CellIndex serpentine_cell(const GridSpec& grid, int rank);
SweepState sweep_init(const GridSpec& grid, CellIndex start);
std::pair<Action, SweepState> sweep_policy(const GridSpec& grid, const SweepState& state);

// Eps-greedy action from a Q-network restricted to feasible actions.
Action rl_decentralized(const QParams& params, const StateVector& s, const ActionMask& mask,
                        double epsilon, Rng& rng);

// Maximize the summed Q-values subject to per-drone feasibility and pairwise
// distinct destination cells. Exhaustive search for small fleets, exact
// assignment formulation for larger ones; deterministic lexicographic
// tie-break either way.
std::vector<Action> joint_action_solve(const std::vector<std::array<double, 5>>& q_rows,
                                       const SwarmPositions& positions, const GridSpec& grid);

// Assignment-based path, exposed for cross-checking against the exhaustive one.
std::vector<Action> joint_action_solve_assignment(
    const std::vector<std::array<double, 5>>& q_rows, const SwarmPositions& positions,
    const GridSpec& grid);

}  // namespace patrol
