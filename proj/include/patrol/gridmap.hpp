#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace patrol {

struct CellIndex {
    int i = 0;  // row
    int j = 0;  // column
    auto operator<=>(const CellIndex&) const = default;
};

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
};

// Canonical action order; it fixes the Q-network output head and is part of
// the checkpoint format. Up decreases the row index (x axis points down).
enum class Action : int { Stay = 0, Up = 1, Down = 2, Left = 3, Right = 4 };

inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Stay, Action::Up, Action::Down, Action::Left, Action::Right};

using ActionMask = std::array<bool, kNumActions>;

constexpr int action_di(Action a) {
    switch (a) {
        case Action::Up: return -1;
        case Action::Down: return 1;
        default: return 0;
    }
}

constexpr int action_dj(Action a) {
    switch (a) {
        case Action::Left: return -1;
        case Action::Right: return 1;
        default: return 0;
    }
}

constexpr Action opposite(Action a) {
    switch (a) {
        case Action::Up: return Action::Down;
        case Action::Down: return Action::Up;
        case Action::Left: return Action::Right;
        case Action::Right: return Action::Left;
        default: return Action::Stay;
    }
}

const char* action_name(Action a);
Action action_from_int(int code);

struct GridSpec {
    double height = 0.0;  // H, real length units along the row axis
    double width = 0.0;   // W, real length units along the column axis
    int nx = 0;           // rows
    int ny = 0;           // columns
    std::set<CellIndex> obstacles;

    bool operator==(const GridSpec&) const = default;

    bool in_bounds(CellIndex c) const {
        return c.i >= 0 && c.i < nx && c.j >= 0 && c.j < ny;
    }
    bool is_obstacle(CellIndex c) const { return obstacles.count(c) > 0; }
    bool is_free(CellIndex c) const { return in_bounds(c) && !is_obstacle(c); }
    int cell_count() const { return nx * ny; }
    int free_cell_count() const { return cell_count() - static_cast<int>(obstacles.size()); }

    // Throws std::invalid_argument if dimensions, bounds or the obstacle set
    // violate the type invariants.
    void validate() const;

    // Free cells in row-major order.
    std::vector<CellIndex> free_cells() const;
};

// Center of cell c in world units: ((2i+1)H/(2nx), (2j+1)W/(2ny)).
WorldPoint cell_center(const GridSpec& spec, CellIndex c);

// Subset of the five actions that keep the drone on the map and off
// obstacles; Stay is always included; canonical order.
std::vector<Action> feasible_actions(const GridSpec& spec, CellIndex c);

// Same information as a per-action flag array.
ActionMask feasible_mask(const GridSpec& spec, CellIndex c);

// Destination cell of a feasible action. Throws if `a` is infeasible at `c`.
CellIndex apply_action(const GridSpec& spec, CellIndex c, Action a);

// Field-of-view neighborhood in fixed order [center, up, down, left, right].
// Out-of-map slots are nullopt; obstacle cells are present (their importance
// is zero by definition).
std::array<std::optional<CellIndex>, 5> adjacency(const GridSpec& spec, CellIndex c);

std::string cell_to_string(CellIndex c);

}  // namespace patrol
