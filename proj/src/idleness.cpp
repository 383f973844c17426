#include "patrol/idleness.hpp"

#include <algorithm>
#include <stdexcept>

namespace patrol {

IdlenessMap init_idleness(const GridSpec& grid, double eta, double delta, double fill) {
    grid.validate();
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("eta must lie strictly inside (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("delta must lie strictly inside (0,1)");
    if (!(fill >= 0.0 && fill <= 1.0))
        throw std::invalid_argument("fill must lie in [0,1]");
    IdlenessMap map{grid.nx, grid.ny, eta, delta,
                    std::vector<double>(static_cast<size_t>(grid.nx) * grid.ny, fill)};
    for (const CellIndex& o : grid.obstacles) map.at(o) = 0.0;
    return map;
}

IdlenessMap step_idleness(const IdlenessMap& map, const GridSpec& grid,
                          const std::vector<CellIndex>& visited) {
    if (map.nx != grid.nx || map.ny != grid.ny)
        throw std::invalid_argument("idleness map does not match grid dimensions");
    std::vector<CellIndex> marks = visited;
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    for (const CellIndex& c : marks) {
        if (!grid.in_bounds(c))
            throw std::invalid_argument("visited cell out of bounds: " + cell_to_string(c));
        if (grid.is_obstacle(c))
            throw std::invalid_argument("visited cell is an obstacle: " + cell_to_string(c));
    }
    IdlenessMap next = map;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const CellIndex c{i, j};
            if (grid.is_obstacle(c)) {
                next.at(c) = 0.0;
            } else if (std::binary_search(marks.begin(), marks.end(), c)) {
                next.at(c) = map.eta * map.at(c);
            } else {
                next.at(c) = std::min(1.0, map.at(c) + map.delta);
            }
        }
    }
    return next;
}

double coverage_score(const IdlenessMap& map, const GridSpec& grid) {
    if (map.nx != grid.nx || map.ny != grid.ny)
        throw std::invalid_argument("idleness map does not match grid dimensions");
    const int free_cells = grid.free_cell_count();
    if (free_cells <= 0)
        throw std::invalid_argument("coverage_score: no free cells");
    double total = 0.0;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            if (!grid.is_obstacle({i, j})) total += map.at({i, j});
    return 1.0 - total / free_cells;
}

}  // namespace patrol
