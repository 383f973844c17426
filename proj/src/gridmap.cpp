#include "patrol/gridmap.hpp"

#include <stdexcept>

namespace patrol {

const char* action_name(Action a) {
    switch (a) {
        case Action::Stay: return "stay";
        case Action::Up: return "up";
        case Action::Down: return "down";
        case Action::Left: return "left";
        case Action::Right: return "right";
    }
    return "?";
}

Action action_from_int(int code) {
    if (code < 0 || code >= kNumActions)
        throw std::invalid_argument("action code out of range: " + std::to_string(code));
    return static_cast<Action>(code);
}

std::string cell_to_string(CellIndex c) {
    return "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
}

void GridSpec::validate() const {
    if (nx < 1 || ny < 1)
        throw std::invalid_argument("grid dimensions must be at least 1x1");
    if (!(height > 0.0) || !(width > 0.0))
        throw std::invalid_argument("grid height and width must be positive");
    for (const CellIndex& o : obstacles) {
        if (!in_bounds(o))
            throw std::invalid_argument("obstacle out of bounds: " + cell_to_string(o));
    }
    if (static_cast<int>(obstacles.size()) >= cell_count())
        throw std::invalid_argument("grid has no free cell");
}

std::vector<CellIndex> GridSpec::free_cells() const {
    std::vector<CellIndex> cells;
    cells.reserve(static_cast<size_t>(free_cell_count()));
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            if (!is_obstacle({i, j})) cells.push_back({i, j});
    return cells;
}

WorldPoint cell_center(const GridSpec& spec, CellIndex c) {
    if (!spec.in_bounds(c))
        throw std::out_of_range("cell_center: index out of bounds " + cell_to_string(c));
    return {(2.0 * c.i + 1.0) * spec.height / (2.0 * spec.nx),
            (2.0 * c.j + 1.0) * spec.width / (2.0 * spec.ny)};
}

std::vector<Action> feasible_actions(const GridSpec& spec, CellIndex c) {
    if (!spec.in_bounds(c))
        throw std::out_of_range("feasible_actions: index out of bounds " + cell_to_string(c));
    if (spec.is_obstacle(c))
        throw std::invalid_argument("feasible_actions: cell is an obstacle " + cell_to_string(c));
    std::vector<Action> out;
    out.reserve(kNumActions);
    for (Action a : kAllActions) {
        const CellIndex dest{c.i + action_di(a), c.j + action_dj(a)};
        if (spec.is_free(dest)) out.push_back(a);
    }
    return out;
}

ActionMask feasible_mask(const GridSpec& spec, CellIndex c) {
    ActionMask mask{};
    for (Action a : feasible_actions(spec, c)) mask[static_cast<int>(a)] = true;
    return mask;
}

CellIndex apply_action(const GridSpec& spec, CellIndex c, Action a) {
    const CellIndex dest{c.i + action_di(a), c.j + action_dj(a)};
    if (!spec.is_free(c) || !spec.is_free(dest))
        throw std::invalid_argument("apply_action: infeasible action " +
                                    std::string(action_name(a)) + " at " + cell_to_string(c));
    return dest;
}

std::array<std::optional<CellIndex>, 5> adjacency(const GridSpec& spec, CellIndex c) {
    if (!spec.in_bounds(c))
        throw std::out_of_range("adjacency: index out of bounds " + cell_to_string(c));
    std::array<std::optional<CellIndex>, 5> out;
    for (int k = 0; k < kNumActions; ++k) {
        const Action a = kAllActions[k];
        const CellIndex dest{c.i + action_di(a), c.j + action_dj(a)};
        if (spec.in_bounds(dest)) out[k] = dest;
    }
    return out;
}

}  // namespace patrol
