#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "patrol/statereward.hpp"
#include "patrol/rng.hpp"

using namespace patrol;

namespace {

GridSpec make_grid(int nx, int ny, std::set<CellIndex> obstacles = {}) {
    return GridSpec{static_cast<double>(nx), static_cast<double>(ny), nx, ny,
                    std::move(obstacles)};
}

// Importance exactly zero everywhere (empty disturbance list).
EnvModel dead_env(const GridSpec& grid, int horizon = 2000) {
    return SyntheticEnv{grid, {}, horizon, {}};
}

// Importance exactly one near the disturbance: a tiny z_hi clamps the kernel
// to 1 across the whole (small) grid.
EnvModel bright_env(const GridSpec& grid, CellIndex origin) {
    return SyntheticEnv{grid, {{DisturbanceKind::Big, origin, 0.7, 5.0}}, 2000, {0.0, 1e-6}};
}

IdlenessMap uniform_map(const GridSpec& grid, double value) {
    IdlenessMap m = init_idleness(grid, 0.1, 0.025, 0.0);
    for (const CellIndex& c : grid.free_cells()) m.at(c) = value;
    return m;
}

}  // namespace

TEST_CASE("fov_values multiply idleness and importance over the adjacency") {
    const GridSpec grid = make_grid(5, 5);
    const EnvModel bright = bright_env(grid, {2, 2});

    const IdlenessMap zeros = uniform_map(grid, 0.0);
    for (double v : fov_values(bright, zeros, {2, 2}, 0)) CHECK(v == 0.0);

    const IdlenessMap ones = uniform_map(grid, 1.0);
    for (double v : fov_values(bright, ones, {2, 2}, 0)) CHECK(v == doctest::Approx(1.0));

    const IdlenessMap half = uniform_map(grid, 0.5);
    const auto corner = fov_values(bright, half, {0, 0}, 0);
    CHECK(corner[0] == doctest::Approx(0.5));
    CHECK(corner[1] == 0.0);  // off-map
    CHECK(corner[2] == doctest::Approx(0.5));
    CHECK(corner[3] == 0.0);  // off-map
    CHECK(corner[4] == doctest::Approx(0.5));

    // obstacle slot contributes zero through its zero importance
    GridSpec blocked = make_grid(5, 5, {{1, 2}});
    const EnvModel bright2 = bright_env(blocked, {2, 2});
    const auto vals = fov_values(bright2, uniform_map(blocked, 1.0), {2, 2}, 0);
    CHECK(vals[1] == 0.0);
    CHECK(vals[2] == doctest::Approx(1.0));
}

TEST_CASE("directional idleness averages free cells beyond the drone") {
    const GridSpec grid = make_grid(6, 6);
    const IdlenessMap uniform = uniform_map(grid, 0.7);
    const DirectionalIdleness mid = directional_idleness(uniform, grid, {3, 3});
    CHECK(mid.down == doctest::Approx(0.7));
    CHECK(mid.up == doctest::Approx(0.7));
    CHECK(mid.left == doctest::Approx(0.7));
    CHECK(mid.right == doctest::Approx(0.7));

    CHECK(directional_idleness(uniform, grid, {5, 3}).down == 0.0);  // bottom row
    CHECK(directional_idleness(uniform, grid, {0, 3}).up == 0.0);
    CHECK(directional_idleness(uniform, grid, {3, 0}).left == 0.0);

    IdlenessMap m = uniform_map(grid, 0.0);
    m.at({3, 2}) = 0.2;
    m.at({4, 2}) = 0.4;
    m.at({5, 2}) = 0.6;
    CHECK(directional_idleness(m, grid, {2, 2}).down == doctest::Approx(0.4));

    // obstacles drop out of the average
    GridSpec blocked = make_grid(6, 6, {{4, 2}});
    IdlenessMap mb = uniform_map(blocked, 0.0);
    mb.at({3, 2}) = 0.2;
    mb.at({5, 2}) = 0.6;
    CHECK(directional_idleness(mb, blocked, {2, 2}).down == doctest::Approx(0.4));
}

TEST_CASE("center of mass excludes the drone itself") {
    const SwarmPositions two = {{0, 0}, {4, 6}};
    CHECK(center_of_mass(two, 0) == std::pair<double, double>{4.0, 6.0});
    CHECK(center_of_mass(two, 1) == std::pair<double, double>{0.0, 0.0});

    const SwarmPositions four = {{0, 0}, {0, 2}, {2, 0}, {2, 2}};
    const auto [icm, jcm] = center_of_mass(four, 0);
    CHECK(icm == doctest::Approx(4.0 / 3.0));
    CHECK(jcm == doctest::Approx(4.0 / 3.0));

    const SwarmPositions sym = {{9, 9}, {4, 4}, {6, 6}};
    const auto cm = center_of_mass(sym, 0);
    CHECK(cm.first == doctest::Approx(5.0));
    CHECK(cm.second == doctest::Approx(5.0));

    CHECK_THROWS(center_of_mass({{1, 1}}, 0));
    CHECK_THROWS(center_of_mass(two, 2));
}

TEST_CASE("build_state assembles the 13 entries in declared order") {
    static_assert(kStateDim == 13);
    const GridSpec grid = make_grid(20, 30);
    const EnvModel env = dead_env(grid);
    const IdlenessMap idleness = init_idleness(grid, 0.1, 0.025, 1.0);
    const SwarmPositions positions = {{0, 0}, {10, 15}, {10, 15}};

    const StateVector s = build_state(env, idleness, positions, 0, 0);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
    for (int f = 2; f < 7; ++f) CHECK(s[f] == 0.0);  // zero importance world
    CHECK(s[7] == doctest::Approx(1.0));   // down: saturated column below
    CHECK(s[8] == 0.0);                    // up: empty direction
    CHECK(s[9] == 0.0);                    // left: empty direction
    CHECK(s[10] == doctest::Approx(1.0));  // right
    CHECK(s[11] == doctest::Approx(0.5));  // 10/20
    CHECK(s[12] == doctest::Approx(0.5));  // 15/30

    // purity: bitwise identical on repeated calls
    const StateVector again = build_state(env, idleness, positions, 0, 0);
    for (int e = 0; e < kStateDim; ++e) CHECK(s[e] == again[e]);

    // drones in identical cells with identical maps build identical states
    const StateVector s1 = build_state(env, idleness, positions, 1, 0);
    const StateVector s2 = build_state(env, idleness, positions, 2, 0);
    for (int e = 0; e < kStateDim; ++e) CHECK(s1[e] == s2[e]);

    // single drone: center of mass falls back to its own cell
    const StateVector solo = build_state(env, idleness, {{4, 6}}, 0, 0);
    CHECK(solo[11] == doctest::Approx(4.0 / 20.0));
    CHECK(solo[12] == doctest::Approx(6.0 / 30.0));
}

TEST_CASE("drone_reward literal reading penalizes staying on a saturated map") {
    const GridSpec grid = make_grid(7, 7);
    const EnvModel env = dead_env(grid);
    const IdlenessMap pre = init_idleness(grid, 0.1, 0.025, 1.0);
    const IdlenessMap post = step_idleness(pre, grid, {{3, 3}});

    RewardSpec literal;
    literal.preupdate_arrival = false;
    SUBCASE("stay costs the eta drop at the center slot") {
        const double r = drone_reward(env, pre, post, {3, 3}, {3, 3}, 0, literal);
        CHECK(r == doctest::Approx(0.25 * (0.1 - 1.0)));  // alpha_i * (eta - 1)

        literal.weights.alpha_i = 1.0;
        CHECK(drone_reward(env, pre, post, {3, 3}, {3, 3}, 0, literal) ==
              doctest::Approx(0.1 - 1.0));
    }
    SUBCASE("pre-update reading makes stay free") {
        RewardSpec pre_spec;  // default: preupdate_arrival = true
        CHECK(drone_reward(env, pre, post, {3, 3}, {3, 3}, 0, pre_spec) == doctest::Approx(0.0));
    }
    SUBCASE("zero importance weight leaves the pure idleness differential") {
        RewardSpec spec;
        spec.weights.alpha_t = 0.0;
        spec.weights.alpha_i = 1.0;
        const IdlenessMap post2 = step_idleness(pre, grid, {{3, 4}});
        const double r = drone_reward(env, pre, post2, {3, 3}, {3, 4}, 0, spec);
        // both neighborhoods fully saturated pre-update: differential is zero
        CHECK(r == doctest::Approx(0.0));
    }
    SUBCASE("inconsistent map pair is rejected") {
        IdlenessMap other = init_idleness(make_grid(5, 5), 0.1, 0.025, 1.0);
        CHECK_THROWS(drone_reward(env, pre, other, {3, 3}, {3, 3}, 0, literal));
    }
}

TEST_CASE("drone_reward is linear in the weights") {
    Rng rng(33);
    const GridSpec grid = make_grid(5, 6);
    const EnvModel env = bright_env(grid, {2, 3});
    IdlenessMap pre = init_idleness(grid, 0.1, 0.025, 0.0);
    for (const CellIndex& c : grid.free_cells()) pre.at(c) = rng.uniform();
    const IdlenessMap post = step_idleness(pre, grid, {{2, 4}});

    for (bool preupdate : {true, false}) {
        RewardSpec t_only{{1.0, 0.0}, preupdate};
        RewardSpec i_only{{0.0, 1.0}, preupdate};
        RewardSpec mixed{{1.7, 0.3}, preupdate};
        const double rt = drone_reward(env, pre, post, {2, 3}, {2, 4}, 0, t_only);
        const double ri = drone_reward(env, pre, post, {2, 3}, {2, 4}, 0, i_only);
        const double rm = drone_reward(env, pre, post, {2, 3}, {2, 4}, 0, mixed);
        CHECK(rm == doctest::Approx(1.7 * rt + 0.3 * ri));
    }
}

TEST_CASE("swarm_score is additive across drones") {
    const GridSpec grid = make_grid(4, 4);
    const EnvModel env = bright_env(grid, {1, 1});
    IdlenessMap pre = init_idleness(grid, 0.1, 0.025, 1.0);
    const SwarmPositions at = {{0, 0}, {2, 2}};
    const SwarmPositions to = {{0, 1}, {2, 3}};
    const IdlenessMap post = step_idleness(pre, grid, to);
    RewardSpec spec;

    const double total = swarm_score(env, pre, post, at, to, 0, spec);
    const double d0 = drone_reward(env, pre, post, at[0], to[0], 0, spec);
    const double d1 = drone_reward(env, pre, post, at[1], to[1], 0, spec);
    CHECK(total == doctest::Approx(d0 + d1));

    // single drone: score equals that drone's reward
    CHECK(swarm_score(env, pre, post, {at[0]}, {to[0]}, 0, spec) == doctest::Approx(d0));

    // doubling both weights doubles the score
    RewardSpec doubled{{2.0, 2.0}, spec.preupdate_arrival};
    CHECK(swarm_score(env, pre, post, at, to, 0, doubled) == doctest::Approx(2.0 * total));
}

TEST_CASE("incremental rewards match the brute-force oracle over short episodes") {
    Rng rng(77);
    for (int episode = 0; episode < 40; ++episode) {
        const GridSpec grid = make_grid(4, 4);
        SyntheticEnv syn{grid,
                         {{DisturbanceKind::Big,
                           {static_cast<int>(rng.uniform_int(4)), static_cast<int>(rng.uniform_int(4))},
                           0.7,
                           5.0},
                          {DisturbanceKind::Small,
                           {static_cast<int>(rng.uniform_int(4)), static_cast<int>(rng.uniform_int(4))},
                           0.7,
                           5.0}},
                         50,
                         {0.0, 0.5}};
        const EnvModel env = syn;
        const bool preupdate = rng.uniform() < 0.5;
        const RewardSpec spec{{1.0, 0.25}, preupdate};

        SwarmPositions positions = {{0, 0}, {3, 3}};
        IdlenessMap map = init_idleness(grid, 0.1, 0.025, 1.0);
        oracle::Grid ref = oracle::init_map(grid, 1.0);
        for (int k = 0; k < 3; ++k) {
            SwarmPositions next;
            for (const CellIndex& c : positions) {
                const auto acts = feasible_actions(grid, c);
                next.push_back(apply_action(grid, c,
                                            acts[static_cast<size_t>(rng.uniform_int(acts.size()))]));
            }
            const IdlenessMap updated = step_idleness(map, grid, next);
            const oracle::Grid ref_updated = oracle::step_map(ref, grid, 0.1, 0.025, next);
            const double lib = swarm_score(env, map, updated, positions, next, k, spec);
            double want = 0.0;
            for (size_t d = 0; d < positions.size(); ++d)
                want += oracle::reward(env, grid, ref, ref_updated, positions[d], next[d], k, 1.0,
                                       0.25, preupdate);
            CHECK(lib == doctest::Approx(want).epsilon(1e-12));
            positions = next;
            map = updated;
            ref = ref_updated;
        }
    }
}
