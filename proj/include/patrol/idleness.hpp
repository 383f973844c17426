#pragma once

#include <vector>

#include "patrol/gridmap.hpp"

namespace patrol {

// Per-cell urgency-to-revisit in [0,1]. Visited cells decay by eta, unvisited
// free cells recover by delta up to 1, obstacle cells stay at 0.
struct IdlenessMap {
    int nx = 0;
    int ny = 0;
    double eta = 0.1;     // forgetting factor, (0,1)
    double delta = 0.025; // recovery factor, (0,1)
    std::vector<double> values;  // row-major nx*ny

    double at(CellIndex c) const { return values[static_cast<size_t>(c.i) * ny + c.j]; }
    double& at(CellIndex c) { return values[static_cast<size_t>(c.i) * ny + c.j]; }
};

IdlenessMap init_idleness(const GridSpec& grid, double eta, double delta, double fill);

// One update: visited -> eta*old; unvisited free -> min(1, old+delta);
// obstacle -> 0. Duplicate entries in `visited` count once.
IdlenessMap step_idleness(const IdlenessMap& map, const GridSpec& grid,
                          const std::vector<CellIndex>& visited);

// 1 - mean idleness over free cells.
double coverage_score(const IdlenessMap& map, const GridSpec& grid);

}  // namespace patrol
