#include <doctest.h>

#include <set>

#include "patrol/gridmap.hpp"
#include "patrol/rng.hpp"

using namespace patrol;

namespace {

GridSpec make_grid(int nx, int ny, std::set<CellIndex> obstacles = {}) {
    return GridSpec{static_cast<double>(nx), static_cast<double>(ny), nx, ny,
                    std::move(obstacles)};
}

GridSpec random_grid(Rng& rng) {
    const int nx = 2 + static_cast<int>(rng.uniform_int(6));
    const int ny = 2 + static_cast<int>(rng.uniform_int(6));
    GridSpec grid = make_grid(nx, ny);
    const int n_obstacles = static_cast<int>(rng.uniform_int(nx * ny / 3 + 1));
    for (int n = 0; n < n_obstacles; ++n)
        grid.obstacles.insert({static_cast<int>(rng.uniform_int(nx)),
                               static_cast<int>(rng.uniform_int(ny))});
    if (static_cast<int>(grid.obstacles.size()) == nx * ny) grid.obstacles.erase({0, 0});
    return grid;
}

}  // namespace

TEST_CASE("cell_center matches the closed form") {
    const GridSpec spec{20.0, 30.0, 20, 30, {}};
    CHECK(cell_center(spec, {0, 0}).x == doctest::Approx(0.5));
    CHECK(cell_center(spec, {0, 0}).y == doctest::Approx(0.5));
    CHECK(cell_center(spec, {19, 29}).x == doctest::Approx(19.5));
    CHECK(cell_center(spec, {19, 29}).y == doctest::Approx(29.5));

    const GridSpec fig{12.0, 15.0, 12, 15, {}};
    CHECK(cell_center(fig, {3, 6}).x == doctest::Approx(3.5));
    CHECK(cell_center(fig, {3, 6}).y == doctest::Approx(6.5));

    CHECK_THROWS(cell_center(spec, {20, 0}));
    CHECK_THROWS(cell_center(spec, {0, -1}));
}

TEST_CASE("feasible_actions respects boundaries and obstacles") {
    const GridSpec spec = make_grid(20, 30);
    CHECK(feasible_actions(spec, {5, 5}) ==
          std::vector<Action>{Action::Stay, Action::Up, Action::Down, Action::Left,
                              Action::Right});
    CHECK(feasible_actions(spec, {0, 0}) ==
          std::vector<Action>{Action::Stay, Action::Down, Action::Right});

    const GridSpec blocked = make_grid(20, 30, {{1, 0}, {0, 1}});
    CHECK(feasible_actions(blocked, {0, 0}) == std::vector<Action>{Action::Stay});
    const GridSpec wall = make_grid(20, 30, {{1, 0}});
    CHECK(feasible_actions(wall, {0, 0}) == std::vector<Action>{Action::Stay, Action::Right});

    CHECK_THROWS(feasible_actions(wall, {1, 0}));  // obstacle cell
    CHECK_THROWS(feasible_actions(wall, {99, 0}));
}

TEST_CASE("apply_action moves one cell and rejects infeasible moves") {
    const GridSpec spec = make_grid(20, 30);
    CHECK(apply_action(spec, {5, 5}, Action::Stay) == CellIndex{5, 5});
    CHECK(apply_action(spec, {5, 5}, Action::Right) == CellIndex{5, 6});
    CHECK(apply_action(spec, {5, 5}, Action::Up) == CellIndex{4, 5});
    CHECK_THROWS(apply_action(spec, {0, 0}, Action::Up));
}

TEST_CASE("adjacency has fixed order with absent off-map slots") {
    const GridSpec spec = make_grid(20, 30);
    const auto interior = adjacency(spec, {5, 5});
    REQUIRE(interior.size() == 5);
    CHECK(*interior[0] == CellIndex{5, 5});
    CHECK(*interior[1] == CellIndex{4, 5});
    CHECK(*interior[2] == CellIndex{6, 5});
    CHECK(*interior[3] == CellIndex{5, 4});
    CHECK(*interior[4] == CellIndex{5, 6});

    const auto corner = adjacency(spec, {0, 0});
    CHECK(*corner[0] == CellIndex{0, 0});
    CHECK(!corner[1].has_value());
    CHECK(*corner[2] == CellIndex{1, 0});
    CHECK(!corner[3].has_value());
    CHECK(*corner[4] == CellIndex{0, 1});

    const auto far = adjacency(spec, {19, 29});
    CHECK(*far[0] == CellIndex{19, 29});
    CHECK(*far[1] == CellIndex{18, 29});
    CHECK(!far[2].has_value());
    CHECK(*far[3] == CellIndex{19, 28});
    CHECK(!far[4].has_value());

    // obstacle neighbors stay present (their importance is zero anyway)
    const GridSpec blocked = make_grid(20, 30, {{4, 5}});
    CHECK(adjacency(blocked, {5, 5})[1] == CellIndex{4, 5});
}

TEST_CASE("feasible moves land on free cells and round-trip with the opposite action") {
    Rng rng(991);
    for (int iter = 0; iter < 200; ++iter) {
        const GridSpec grid = random_grid(rng);
        for (int i = 0; i < grid.nx; ++i) {
            for (int j = 0; j < grid.ny; ++j) {
                const CellIndex c{i, j};
                if (!grid.is_free(c)) continue;
                for (Action a : feasible_actions(grid, c)) {
                    const CellIndex dest = apply_action(grid, c, a);
                    CHECK(grid.is_free(dest));
                    if (a != Action::Stay) CHECK(apply_action(grid, dest, opposite(a)) == c);
                }
                const auto adj = adjacency(grid, c);
                CHECK(*adj[0] == c);
            }
        }
    }
}

TEST_CASE("cell_center is injective and strictly inside the map") {
    Rng rng(1212);
    for (int iter = 0; iter < 50; ++iter) {
        GridSpec grid = random_grid(rng);
        grid.height = 1.0 + 10.0 * rng.uniform();
        grid.width = 1.0 + 10.0 * rng.uniform();
        std::set<std::pair<double, double>> seen;
        for (int i = 0; i < grid.nx; ++i) {
            for (int j = 0; j < grid.ny; ++j) {
                const WorldPoint p = cell_center(grid, {i, j});
                CHECK(p.x > 0.0);
                CHECK(p.x < grid.height);
                CHECK(p.y > 0.0);
                CHECK(p.y < grid.width);
                CHECK(seen.insert({p.x, p.y}).second);
            }
        }
    }
}

TEST_CASE("grid validation rejects malformed specs") {
    CHECK_THROWS(make_grid(0, 5).validate());
    CHECK_THROWS(GridSpec{-1.0, 5.0, 2, 5, {}}.validate());
    CHECK_THROWS(make_grid(2, 2, {{5, 5}}).validate());
    GridSpec full = make_grid(1, 1, {{0, 0}});
    CHECK_THROWS(full.validate());
    CHECK_NOTHROW(make_grid(2, 2, {{0, 0}}).validate());
}

TEST_CASE("action codes are stable") {
    CHECK(static_cast<int>(Action::Stay) == 0);
    CHECK(static_cast<int>(Action::Up) == 1);
    CHECK(static_cast<int>(Action::Down) == 2);
    CHECK(static_cast<int>(Action::Left) == 3);
    CHECK(static_cast<int>(Action::Right) == 4);
    CHECK(action_from_int(3) == Action::Left);
    CHECK_THROWS(action_from_int(5));
    CHECK_THROWS(action_from_int(-1));
}
