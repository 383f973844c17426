#pragma once

#include <array>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/gridmap.hpp"
#include "patrol/idleness.hpp"

namespace patrol {

// One cell index per drone. Coordinated mode keeps them pairwise distinct.
using SwarmPositions = std::vector<CellIndex>;

// Per-drone observation encoding, fixed order:
// [i/nx, j/ny, fov0..fov4, nu_down, nu_up, nu_left, nu_right, i_cm/nx, j_cm/ny]
inline constexpr int kStateDim = 13;
using StateVector = std::array<double, kStateDim>;

struct ScoreWeights {
    double alpha_t = 1.0;  // importance-gain weight
    double alpha_i = 1.0;  // idleness-gain weight

    void validate() const;
};

struct RewardSpec {
    ScoreWeights weights;
    // When set, the arrival sums are evaluated on the pre-step maps (I^k, T^k)
    // instead of the post-step ones. The post-step form telescopes over the
    // horizon and yields a near-zero cumulative score for every policy, so the
    // pre-step form is the default for training and scoring.
    bool preupdate_arrival = true;
};

struct DirectionalIdleness {
    double down = 0.0;
    double up = 0.0;
    double left = 0.0;
    double right = 0.0;
};

// Importance-times-idleness over the field of view, adjacency order.
// Off-map slots are 0; obstacle slots are 0 through their zero importance.
std::array<double, 5> fov_values(const EnvModel& env, const IdlenessMap& idleness,
                                 CellIndex c, int k);

// Mean idleness of free cells strictly beyond c in each direction along its
// row/column; 0 when a direction holds no free cell.
DirectionalIdleness directional_idleness(const IdlenessMap& map, const GridSpec& grid,
                                         CellIndex c);

// Mean grid index of all drones except d. Requires at least two drones.
std::pair<double, double> center_of_mass(const SwarmPositions& positions, int d);

// Assemble the 13-element state of drone d at step k. A single-drone swarm
// uses the drone's own cell as the center of mass.
StateVector build_state(const EnvModel& env, const IdlenessMap& idleness,
                        const SwarmPositions& positions, int d, int k);

// Weighted gain of moving from p_k to p_k1 while the fleet update took the
// idleness map from `pre` to `post` (post = step_idleness(pre, ., P_{k+1})).
double drone_reward(const EnvModel& env, const IdlenessMap& pre, const IdlenessMap& post,
                    CellIndex p_k, CellIndex p_k1, int k, const RewardSpec& spec);

// Fleet-wide patrolling score: sum of drone rewards.
double swarm_score(const EnvModel& env, const IdlenessMap& pre, const IdlenessMap& post,
                   const SwarmPositions& positions_k, const SwarmPositions& positions_k1,
                   int k, const RewardSpec& spec);

}  // namespace patrol
