#include "patrol/statereward.hpp"

#include <stdexcept>
#include <tuple>

namespace patrol {

namespace {

// Sum of alpha_t*I*T + alpha_i*I over the field of view of `c`, with the
// idleness map `idle` and importance evaluated at step `k`.
double neighborhood_value(const EnvModel& env, const IdlenessMap& idle, CellIndex c, int k,
                          const ScoreWeights& w) {
    const GridSpec& grid = env_grid(env);
    double total = 0.0;
    for (const auto& slot : adjacency(grid, c)) {
        if (!slot) continue;
        const double idleness = idle.at(*slot);
        const double importance = importance_at(env, *slot, k);
        total += w.alpha_t * idleness * importance + w.alpha_i * idleness;
    }
    return total;
}

}  // namespace

void ScoreWeights::validate() const {
    if (!(alpha_t >= 0.0) || !(alpha_i >= 0.0))
        throw std::invalid_argument("score weights must be non-negative");
}

std::array<double, 5> fov_values(const EnvModel& env, const IdlenessMap& idleness,
                                 CellIndex c, int k) {
    const GridSpec& grid = env_grid(env);
    if (!grid.is_free(c))
        throw std::invalid_argument("fov_values: cell must be free, got " + cell_to_string(c));
    std::array<double, 5> out{};
    const auto slots = adjacency(grid, c);
    for (int s = 0; s < 5; ++s) {
        if (!slots[s]) continue;
        out[s] = idleness.at(*slots[s]) * importance_at(env, *slots[s], k);
    }
    return out;
}

DirectionalIdleness directional_idleness(const IdlenessMap& map, const GridSpec& grid,
                                         CellIndex c) {
    if (!grid.in_bounds(c))
        throw std::out_of_range("directional_idleness: index out of bounds " + cell_to_string(c));
    DirectionalIdleness out;
    double sum = 0.0;
    int n = 0;
    for (int i = c.i + 1; i < grid.nx; ++i)
        if (!grid.is_obstacle({i, c.j})) { sum += map.at({i, c.j}); ++n; }
    out.down = n ? sum / n : 0.0;
    sum = 0.0; n = 0;
    for (int i = 0; i < c.i; ++i)
        if (!grid.is_obstacle({i, c.j})) { sum += map.at({i, c.j}); ++n; }
    out.up = n ? sum / n : 0.0;
    sum = 0.0; n = 0;
    for (int j = 0; j < c.j; ++j)
        if (!grid.is_obstacle({c.i, j})) { sum += map.at({c.i, j}); ++n; }
    out.left = n ? sum / n : 0.0;
    sum = 0.0; n = 0;
    for (int j = c.j + 1; j < grid.ny; ++j)
        if (!grid.is_obstacle({c.i, j})) { sum += map.at({c.i, j}); ++n; }
    out.right = n ? sum / n : 0.0;
    return out;
}

std::pair<double, double> center_of_mass(const SwarmPositions& positions, int d) {
    const int n = static_cast<int>(positions.size());
    if (d < 0 || d >= n)
        throw std::out_of_range("center_of_mass: drone index out of range");
    if (n < 2)
        throw std::invalid_argument("center_of_mass requires at least two drones");
    double si = 0.0, sj = 0.0;
    for (int other = 0; other < n; ++other) {
        if (other == d) continue;
        si += positions[other].i;
        sj += positions[other].j;
    }
    return {si / (n - 1), sj / (n - 1)};
}

StateVector build_state(const EnvModel& env, const IdlenessMap& idleness,
                        const SwarmPositions& positions, int d, int k) {
    const GridSpec& grid = env_grid(env);
    if (d < 0 || d >= static_cast<int>(positions.size()))
        throw std::out_of_range("build_state: drone index out of range");
    const CellIndex c = positions[d];
    StateVector s{};
    s[0] = static_cast<double>(c.i) / grid.nx;
    s[1] = static_cast<double>(c.j) / grid.ny;
    const auto fov = fov_values(env, idleness, c, k);
    for (int f = 0; f < 5; ++f) s[2 + f] = fov[f];
    const DirectionalIdleness nu = directional_idleness(idleness, grid, c);
    s[7] = nu.down;
    s[8] = nu.up;
    s[9] = nu.left;
    s[10] = nu.right;
    double icm = c.i, jcm = c.j;  // single-drone convention: own cell
    if (positions.size() >= 2) std::tie(icm, jcm) = center_of_mass(positions, d);
    s[11] = icm / grid.nx;
    s[12] = jcm / grid.ny;
    return s;
}

double drone_reward(const EnvModel& env, const IdlenessMap& pre, const IdlenessMap& post,
                    CellIndex p_k, CellIndex p_k1, int k, const RewardSpec& spec) {
    spec.weights.validate();
    const GridSpec& grid = env_grid(env);
    if (pre.nx != grid.nx || pre.ny != grid.ny || post.nx != grid.nx || post.ny != grid.ny ||
        pre.eta != post.eta || pre.delta != post.delta)
        throw std::invalid_argument("drone_reward: inconsistent idleness map pair");
    const IdlenessMap& arrival_map = spec.preupdate_arrival ? pre : post;
    const int arrival_step = spec.preupdate_arrival ? k : k + 1;
    const double arrival = neighborhood_value(env, arrival_map, p_k1, arrival_step, spec.weights);
    const double departure = neighborhood_value(env, pre, p_k, k, spec.weights);
    return arrival - departure;
}

double swarm_score(const EnvModel& env, const IdlenessMap& pre, const IdlenessMap& post,
                   const SwarmPositions& positions_k, const SwarmPositions& positions_k1,
                   int k, const RewardSpec& spec) {
    if (positions_k.size() != positions_k1.size())
        throw std::invalid_argument("swarm_score: fleet size changed between steps");
    double total = 0.0;
    for (size_t d = 0; d < positions_k.size(); ++d)
        total += drone_reward(env, pre, post, positions_k[d], positions_k1[d], k, spec);
    return total;
}

}  // namespace patrol
