#pragma once

// Brute-force re-evaluation of the simulation dynamics, kept deliberately
// independent of the library's incremental code paths: plain 2-D arrays,
// explicit per-cell membership scans and hand-rolled neighborhood sums.

#include <algorithm>
#include <cmath>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/gridmap.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid init_map(const patrol::GridSpec& grid, double fill) {
    Grid m(static_cast<size_t>(grid.nx), std::vector<double>(static_cast<size_t>(grid.ny), fill));
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            if (grid.is_obstacle({i, j})) m[static_cast<size_t>(i)][static_cast<size_t>(j)] = 0.0;
    return m;
}

inline Grid step_map(const Grid& m, const patrol::GridSpec& grid, double eta, double delta,
                     const std::vector<patrol::CellIndex>& visited) {
    Grid out = m;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            bool is_visited = false;
            for (const patrol::CellIndex& v : visited)
                if (v.i == i && v.j == j) is_visited = true;
            if (grid.is_obstacle({i, j}))
                out[static_cast<size_t>(i)][static_cast<size_t>(j)] = 0.0;
            else if (is_visited)
                out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    eta * m[static_cast<size_t>(i)][static_cast<size_t>(j)];
            else
                out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    std::min(1.0, m[static_cast<size_t>(i)][static_cast<size_t>(j)] + delta);
        }
    }
    return out;
}

inline double coverage(const Grid& m, const patrol::GridSpec& grid) {
    double total = 0.0;
    int free_cells = 0;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            if (grid.is_obstacle({i, j})) continue;
            total += m[static_cast<size_t>(i)][static_cast<size_t>(j)];
            ++free_cells;
        }
    }
    return 1.0 - total / free_cells;
}

// Sum of alpha_t * I*T + alpha_i * I over the five-cell neighborhood of c,
// skipping off-map slots.
inline double neighborhood(const patrol::EnvModel& env, const patrol::GridSpec& grid,
                           const Grid& m, patrol::CellIndex c, int k, double alpha_t,
                           double alpha_i) {
    static const int di[5] = {0, -1, 1, 0, 0};
    static const int dj[5] = {0, 0, 0, -1, 1};
    double total = 0.0;
    for (int s = 0; s < 5; ++s) {
        const int i = c.i + di[s], j = c.j + dj[s];
        if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny) continue;
        const double idleness = m[static_cast<size_t>(i)][static_cast<size_t>(j)];
        const double importance = patrol::importance_at(env, {i, j}, k);
        total += alpha_t * idleness * importance + alpha_i * idleness;
    }
    return total;
}

inline double reward(const patrol::EnvModel& env, const patrol::GridSpec& grid, const Grid& pre,
                     const Grid& post, patrol::CellIndex p_k, patrol::CellIndex p_k1, int k,
                     double alpha_t, double alpha_i, bool preupdate_arrival) {
    const double arrival = preupdate_arrival
                               ? neighborhood(env, grid, pre, p_k1, k, alpha_t, alpha_i)
                               : neighborhood(env, grid, post, p_k1, k + 1, alpha_t, alpha_i);
    return arrival - neighborhood(env, grid, pre, p_k, k, alpha_t, alpha_i);
}

}  // namespace oracle
