#include "patrol/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace patrol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Destination of action a from cell c, or nullopt when infeasible.
std::optional<CellIndex> destination(const GridSpec& grid, CellIndex c, Action a) {
    const CellIndex dest{c.i + action_di(a), c.j + action_dj(a)};
    if (grid.is_free(dest)) return dest;
    return std::nullopt;
}

// Classic O(n^3) shortest-augmenting-path solver for the square min-cost
// assignment problem. Returns row -> column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = p[static_cast<size_t>(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost[static_cast<size_t>(i0) - 1][static_cast<size_t>(j) - 1] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> rowsol(static_cast<size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<size_t>(j)] > 0) rowsol[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
    return rowsol;
}

struct JointProblem {
    int n = 0;
    std::vector<std::vector<Action>> feasible;              // per drone
    std::vector<std::vector<CellIndex>> dests;              // aligned with feasible
    const std::vector<std::array<double, 5>>* q = nullptr;  // per drone q row
};

JointProblem build_problem(const std::vector<std::array<double, 5>>& q_rows,
                           const SwarmPositions& positions, const GridSpec& grid) {
    if (q_rows.size() != positions.size())
        throw std::invalid_argument("joint_action_solve: q rows and positions disagree in size");
    if (positions.empty()) throw std::invalid_argument("joint_action_solve: empty swarm");
    for (size_t a = 0; a < positions.size(); ++a)
        for (size_t b = a + 1; b < positions.size(); ++b)
            if (positions[a] == positions[b])
                throw std::runtime_error(
                    "joint_action_solve: drones " + std::to_string(a) + " and " +
                    std::to_string(b) + " occupy the same cell " + cell_to_string(positions[a]) +
                    "; no distinct-destination assignment exists");
    JointProblem prob;
    prob.n = static_cast<int>(positions.size());
    prob.q = &q_rows;
    for (const CellIndex& c : positions) {
        std::vector<Action> acts = feasible_actions(grid, c);
        std::vector<CellIndex> dest;
        dest.reserve(acts.size());
        for (Action a : acts) dest.push_back(*destination(grid, c, a));
        prob.feasible.push_back(std::move(acts));
        prob.dests.push_back(std::move(dest));
    }
    return prob;
}

[[noreturn]] void throw_infeasible(const JointProblem& prob) {
    std::set<CellIndex> all;
    for (const auto& d : prob.dests) all.insert(d.begin(), d.end());
    std::string msg = "joint_action_solve: no distinct-destination assignment; " +
                      std::to_string(prob.n) + " drones share " + std::to_string(all.size()) +
                      " reachable cells {";
    bool first = true;
    for (const CellIndex& c : all) {
        if (!first) msg += ", ";
        msg += cell_to_string(c);
        first = false;
    }
    msg += "}";
    throw std::runtime_error(msg);
}

struct ExhaustiveSearch {
    const JointProblem& prob;
    std::vector<Action> current, best;
    std::vector<CellIndex> used;
    double best_value = -kInf;
    bool found = false;

    explicit ExhaustiveSearch(const JointProblem& p)
        : prob(p), current(static_cast<size_t>(p.n), Action::Stay) {}

    void run(int d, double acc) {
        if (d == prob.n) {
            if (acc > best_value) {
                best_value = acc;
                best = current;
                found = true;
            }
            return;
        }
        const auto& acts = prob.feasible[static_cast<size_t>(d)];
        for (size_t idx = 0; idx < acts.size(); ++idx) {
            const CellIndex dest = prob.dests[static_cast<size_t>(d)][idx];
            if (std::find(used.begin(), used.end(), dest) != used.end()) continue;
            used.push_back(dest);
            current[static_cast<size_t>(d)] = acts[idx];
            run(d + 1, acc + (*prob.q)[static_cast<size_t>(d)][static_cast<size_t>(acts[idx])]);
            used.pop_back();
        }
    }
};

// Solves the assignment relaxation with some drones pinned to fixed actions.
// Returns the achieved total value, or -inf when infeasible.
double solve_assignment(const JointProblem& prob, const std::vector<int>& pinned_action,
                        std::vector<Action>* out) {
    std::vector<CellIndex> cells;
    for (const auto& d : prob.dests) cells.insert(cells.end(), d.begin(), d.end());
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    const int m = static_cast<int>(cells.size());
    if (m < prob.n) return -kInf;

    double scale = 1.0;
    for (const auto& row : *prob.q)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double big = 1e6 * scale;

    // rows: n drones + (m - n) dummies; columns: candidate cells
    std::vector<std::vector<double>> cost(static_cast<size_t>(m),
                                          std::vector<double>(static_cast<size_t>(m), 0.0));
    for (int d = 0; d < prob.n; ++d) {
        std::vector<double>& row = cost[static_cast<size_t>(d)];
        std::fill(row.begin(), row.end(), big);
        const auto& acts = prob.feasible[static_cast<size_t>(d)];
        for (size_t idx = 0; idx < acts.size(); ++idx) {
            if (pinned_action[static_cast<size_t>(d)] >= 0 &&
                static_cast<int>(acts[idx]) != pinned_action[static_cast<size_t>(d)])
                continue;
            const CellIndex dest = prob.dests[static_cast<size_t>(d)][idx];
            const int col = static_cast<int>(
                std::lower_bound(cells.begin(), cells.end(), dest) - cells.begin());
            row[static_cast<size_t>(col)] =
                -(*prob.q)[static_cast<size_t>(d)][static_cast<size_t>(acts[idx])];
        }
    }
    const std::vector<int> rowsol = min_cost_assignment(cost);
    double value = 0.0;
    std::vector<Action> actions(static_cast<size_t>(prob.n), Action::Stay);
    for (int d = 0; d < prob.n; ++d) {
        const int col = rowsol[static_cast<size_t>(d)];
        if (cost[static_cast<size_t>(d)][static_cast<size_t>(col)] >= big) return -kInf;
        const CellIndex dest = cells[static_cast<size_t>(col)];
        const auto& dests = prob.dests[static_cast<size_t>(d)];
        const size_t idx = static_cast<size_t>(
            std::find(dests.begin(), dests.end(), dest) - dests.begin());
        actions[static_cast<size_t>(d)] = prob.feasible[static_cast<size_t>(d)][idx];
        value += (*prob.q)[static_cast<size_t>(d)][static_cast<size_t>(actions[static_cast<size_t>(d)])];
    }
    if (out) *out = std::move(actions);
    return value;
}

}  // namespace

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Random: return "random";
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Sweeping: return "sweeping";
        case PolicyKind::RLCoordinated: return "rl";
        case PolicyKind::RLDecentralized: return "rl-decentralized";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    for (PolicyKind k : {PolicyKind::Random, PolicyKind::Greedy, PolicyKind::Sweeping,
                         PolicyKind::RLCoordinated, PolicyKind::RLDecentralized})
        if (name == policy_name(k)) return k;
    throw std::invalid_argument("unknown policy: " + name);
}

std::vector<SweepRole> sweeping_roles(int n_drones) {
    if (n_drones < 1) throw std::invalid_argument("sweeping swarm needs at least one drone");
    std::vector<SweepRole> roles(static_cast<size_t>(n_drones), SweepRole::Greedy);
    roles[0] = SweepRole::Sweeper;
    if (n_drones >= 2) roles[static_cast<size_t>(n_drones) - 1] = SweepRole::Random;
    return roles;
}

Action random_policy(const GridSpec& grid, CellIndex c, Rng& rng) {
    const std::vector<Action> acts = feasible_actions(grid, c);
    return acts[static_cast<size_t>(rng.uniform_int(acts.size()))];
}

Action greedy_policy(const GridSpec& grid, const IdlenessMap& idleness, const EnvModel& env,
                     CellIndex c, int k) {
    const std::vector<Action> acts = feasible_actions(grid, c);
    Action best = acts.front();
    double best_value = -kInf;
    for (Action a : acts) {
        const CellIndex dest = *destination(grid, c, a);
        const double value = idleness.at(dest) * importance_at(env, dest, k);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

CellIndex serpentine_cell(const GridSpec& grid, int rank) {
    if (rank < 0 || rank >= grid.cell_count())
        throw std::out_of_range("serpentine rank out of range");
    const int i = rank / grid.ny;
    const int off = rank % grid.ny;
    return {i, i % 2 == 0 ? off : grid.ny - 1 - off};
}

SweepState sweep_init(const GridSpec& grid, CellIndex start) {
    if (!grid.obstacles.empty())
        throw std::invalid_argument("sweep policy supports obstacle-free grids only");
    if (!grid.in_bounds(start))
        throw std::out_of_range("sweep_init: start out of bounds " + cell_to_string(start));
    const int off = start.i % 2 == 0 ? start.j : grid.ny - 1 - start.j;
    return {start.i * grid.ny + off, 1};
}

std::pair<Action, SweepState> sweep_policy(const GridSpec& grid, const SweepState& state) {
    if (!grid.obstacles.empty())
        throw std::invalid_argument("sweep policy supports obstacle-free grids only");
    const int total = grid.cell_count();
    if (total == 1) return {Action::Stay, state};
    int dir = state.direction;
    int next = state.rank + dir;
    if (next >= total || next < 0) {
        dir = -dir;
        next = state.rank + dir;
    }
    const CellIndex from = serpentine_cell(grid, state.rank);
    const CellIndex to = serpentine_cell(grid, next);
    for (Action a : kAllActions)
        if (from.i + action_di(a) == to.i && from.j + action_dj(a) == to.j)
            return {a, SweepState{next, dir}};
    throw std::logic_error("sweep_policy: serpentine step is not a unit move");
}

Action rl_decentralized(const QParams& params, const StateVector& s, const ActionMask& mask,
                        double epsilon, Rng& rng) {
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
        throw std::invalid_argument("rl_decentralized: empty feasibility mask");
    if (rng.uniform() < epsilon) {
        std::vector<int> feasible;
        for (int a = 0; a < kNumActions; ++a)
            if (mask[static_cast<size_t>(a)]) feasible.push_back(a);
        return static_cast<Action>(feasible[static_cast<size_t>(rng.uniform_int(feasible.size()))]);
    }
    const std::vector<double> q = forward(params, s);
    return static_cast<Action>(masked_argmax(q, mask));
}

std::vector<Action> joint_action_solve(const std::vector<std::array<double, 5>>& q_rows,
                                       const SwarmPositions& positions, const GridSpec& grid) {
    const JointProblem prob = build_problem(q_rows, positions, grid);
    if (prob.n <= 6) {
        ExhaustiveSearch search(prob);
        search.run(0, 0.0);
        if (!search.found) throw_infeasible(prob);
        return search.best;
    }
    return joint_action_solve_assignment(q_rows, positions, grid);
}

std::vector<Action> joint_action_solve_assignment(
    const std::vector<std::array<double, 5>>& q_rows, const SwarmPositions& positions,
    const GridSpec& grid) {
    const JointProblem prob = build_problem(q_rows, positions, grid);
    std::vector<int> pinned(static_cast<size_t>(prob.n), -1);
    std::vector<Action> solution;
    const double best = solve_assignment(prob, pinned, &solution);
    if (best == -kInf) throw_infeasible(prob);

    // Lexicographic refinement: pin the smallest action per drone that still
    // permits an optimal completion.
    double scale = 1.0;
    for (const auto& row : q_rows)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * scale;
    for (int d = 0; d < prob.n; ++d) {
        bool pinned_this = false;
        for (Action a : prob.feasible[static_cast<size_t>(d)]) {
            pinned[static_cast<size_t>(d)] = static_cast<int>(a);
            std::vector<Action> candidate;
            const double value = solve_assignment(prob, pinned, &candidate);
            if (value >= best - tol) {
                solution = candidate;
                pinned_this = true;
                break;
            }
        }
        if (!pinned_this) {
            // numeric edge: keep the unrefined solution for this drone
            pinned[static_cast<size_t>(d)] = static_cast<int>(solution[static_cast<size_t>(d)]);
        }
    }
    return solution;
}

}  // namespace patrol
