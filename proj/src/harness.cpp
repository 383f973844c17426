#include "patrol/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace patrol {

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string dims_to_string(const std::vector<int>& dims) {
    std::string out;
    for (size_t i = 0; i < dims.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(dims[i]);
    }
    return out;
}

std::vector<int> dims_from_string(const std::string& text) {
    if (text == "paper") return paper_net_dims();
    if (text == "desk") return desk_net_dims();
    std::vector<int> dims;
    for (const std::string& part : split(text, ',')) dims.push_back(std::stoi(part));
    return dims;
}

CellIndex parse_cell(const std::string& token) {
    const std::vector<std::string> parts = split(token, ',');
    if (parts.size() != 2)
        throw std::runtime_error("expected cell as i,j but got: " + token);
    return {std::stoi(parts[0]), std::stoi(parts[1])};
}

// whitespace-separated tokens
std::vector<std::string> tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_text_file(const std::string& path, const std::string& content, bool force) {
    if (!force && fs::exists(path))
        throw std::runtime_error("refusing to overwrite " + path + " (use --force)");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void RunConfig::validate() const {
    grid.validate();
    bounds.validate();
    train.validate();
    if (n_drones < 1) throw std::invalid_argument("need at least one drone");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (frames_every < 0) throw std::invalid_argument("frames_every must be non-negative");
    if (env_kind != "synthetic" && env_kind != "demand")
        throw std::invalid_argument("env kind must be synthetic or demand: " + env_kind);
    if (synthetic_map != "train" && synthetic_map != "test")
        throw std::invalid_argument("synthetic map must be train or test: " + synthetic_map);
    if (n_drones > grid.free_cell_count())
        throw std::invalid_argument("more drones than free cells");
    if (start_cells) {
        if (static_cast<int>(start_cells->size()) != n_drones)
            throw std::invalid_argument("start cell count does not match drone count");
        for (const CellIndex& c : *start_cells)
            if (!grid.is_free(c))
                throw std::invalid_argument("start cell not free: " + cell_to_string(c));
        for (size_t a = 0; a < start_cells->size(); ++a)
            for (size_t b = a + 1; b < start_cells->size(); ++b)
                if ((*start_cells)[a] == (*start_cells)[b])
                    throw std::invalid_argument("start cells must be distinct");
    }
    if (policy == PolicyKind::Sweeping && !grid.obstacles.empty())
        throw std::invalid_argument("sweeping policy supports obstacle-free grids only");
    if (!(sim.fill >= 0.0 && sim.fill <= 1.0))
        throw std::invalid_argument("idleness fill must lie in [0,1]");
}

RunConfig config_from_map(const ConfigMap& cfg) {
    RunConfig rc;
    rc.grid.height = cfg.get_double("grid.h", rc.grid.height);
    rc.grid.width = cfg.get_double("grid.w", rc.grid.width);
    rc.grid.nx = cfg.get_int("grid.nx", rc.grid.nx);
    rc.grid.ny = cfg.get_int("grid.ny", rc.grid.ny);
    for (const std::string& tok : tokens(cfg.get_str("grid.obstacles", "")))
        rc.grid.obstacles.insert(parse_cell(tok));

    rc.env_kind = cfg.get_str("env.kind", rc.env_kind);
    rc.synthetic_map = cfg.get_str("env.map", rc.synthetic_map);
    rc.beta1 = cfg.get_double("env.beta1", rc.beta1);
    rc.beta2 = cfg.get_double("env.beta2", rc.beta2);
    rc.bounds.z_lo = cfg.get_double("env.z_lo", rc.bounds.z_lo);
    rc.bounds.z_hi = cfg.get_double("env.z_hi", rc.bounds.z_hi);
    for (const std::string& tok : tokens(cfg.get_str("env.disturbances", ""))) {
        // kind:i,j  e.g. big:3,4
        const std::vector<std::string> parts = split(tok, ':');
        if (parts.size() != 2)
            throw std::runtime_error("expected disturbance as kind:i,j but got: " + tok);
        Disturbance d;
        if (parts[0] == "big")
            d.kind = DisturbanceKind::Big;
        else if (parts[0] == "small")
            d.kind = DisturbanceKind::Small;
        else
            throw std::runtime_error("disturbance kind must be big or small: " + tok);
        d.origin = parse_cell(parts[1]);
        d.beta1 = rc.beta1;
        d.beta2 = rc.beta2;
        rc.disturbances.push_back(d);
    }

    rc.demand_hotspots = cfg.get_int("demand.hotspots", rc.demand_hotspots);
    rc.demand_noise = cfg.get_double("demand.noise", rc.demand_noise);
    for (const std::string& tok : tokens(cfg.get_str("demand.schedule", ""))) {
        // activation:i,j:peak:radius:duration
        const std::vector<std::string> parts = split(tok, ':');
        if (parts.size() != 5)
            throw std::runtime_error("expected hotspot as step:i,j:peak:radius:duration: " + tok);
        Hotspot h;
        h.activation = std::stoi(parts[0]);
        h.origin = parse_cell(parts[1]);
        h.peak = std::stod(parts[2]);
        h.radius = std::stod(parts[3]);
        h.duration = std::stoi(parts[4]);
        rc.hotspots.push_back(h);
    }

    rc.sim.eta = cfg.get_double("idleness.eta", rc.sim.eta);
    rc.sim.delta = cfg.get_double("idleness.delta", rc.sim.delta);
    rc.sim.fill = cfg.get_double("idleness.fill", rc.sim.fill);

    rc.sim.reward.weights.alpha_t = cfg.get_double("reward.alpha_t", 1.0);
    rc.sim.reward.weights.alpha_i = cfg.get_double("reward.alpha_i", 1.0);
    rc.sim.reward.preupdate_arrival =
        cfg.get_bool("reward.preupdate_arrival", rc.sim.reward.preupdate_arrival);
    rc.train.weights = rc.sim.reward.weights;

    rc.policy = policy_from_name(cfg.get_str("run.policy", policy_name(rc.policy)));
    rc.n_drones = cfg.get_int("run.drones", rc.n_drones);
    rc.horizon = cfg.get_int("run.horizon", rc.horizon);
    rc.seed = cfg.get_u64("run.seed", rc.seed);
    rc.train.epsilon = cfg.get_double("run.epsilon", rc.train.epsilon);
    rc.coord_fail_step = cfg.get_int("run.coord_fail_step", rc.coord_fail_step);
    rc.frames_every = cfg.get_int("run.frames_every", rc.frames_every);
    rc.learning_enabled = cfg.get_bool("run.learning", rc.learning_enabled);
    const std::string starts = cfg.get_str("run.start_cells", "");
    if (!starts.empty()) {
        SwarmPositions cells;
        for (const std::string& tok : tokens(starts)) cells.push_back(parse_cell(tok));
        rc.start_cells = std::move(cells);
    }

    rc.train.epochs = cfg.get_int("train.epochs", rc.train.epochs);
    rc.train.iters = cfg.get_int("train.iters", rc.train.iters);
    rc.train.batch = cfg.get_int("train.batch", rc.train.batch);
    rc.train.gamma = cfg.get_double("train.gamma", rc.train.gamma);
    rc.train.lr = cfg.get_double("train.lr", rc.train.lr);
    rc.train.target_period = cfg.get_int("train.target_period", rc.train.target_period);
    rc.train.capacity = cfg.get_int("train.capacity", rc.train.capacity);
    if (cfg.has("train.net_dims")) {
        rc.train.net_dims = dims_from_string(cfg.get_str("train.net_dims", ""));
        rc.net_dims_explicit = true;
    }
    rc.train.seed = rc.seed;

    const std::vector<std::string> unread = cfg.unread_keys();
    if (!unread.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& k : unread) msg += " " + k;
        throw std::runtime_error(msg);
    }
    return rc;
}

EnvModel build_env(const RunConfig& config) {
    if (config.env_kind == "demand") {
        if (!config.hotspots.empty()) {
            DemandEnv env{config.grid, config.hotspots, config.seed, config.demand_noise,
                          config.bounds};
            env.validate();
            return env;
        }
        return random_demand_env(config.grid, config.seed, config.horizon,
                                 config.demand_hotspots, config.demand_noise, config.bounds);
    }
    if (!config.disturbances.empty()) {
        SyntheticEnv env{config.grid, config.disturbances, config.horizon, config.bounds};
        env.validate();
        return env;
    }
    if (config.synthetic_map == "train")
        return training_map(config.grid, config.seed, config.horizon, config.beta1, config.beta2,
                            config.bounds);
    return test_map(config.grid, config.seed, config.horizon, config.beta1, config.beta2,
                    config.bounds);
}

QParams load_params_for_run(const RunConfig& config) {
    if (config.checkpoint.empty())
        throw std::runtime_error("policy " + std::string(policy_name(config.policy)) +
                                 " requires a checkpoint");
    Checkpoint ck = load_checkpoint_file(config.checkpoint);
    if (config.net_dims_explicit && ck.params.dims != config.train.net_dims)
        throw std::runtime_error("checkpoint network dims [" + dims_to_string(ck.params.dims) +
                                 "] do not match configured dims [" +
                                 dims_to_string(config.train.net_dims) + "]");
    if (ck.params.input_dim() != kStateDim || ck.params.output_dim() != kNumActions)
        throw std::runtime_error("checkpoint network [" + dims_to_string(ck.params.dims) +
                                 "] is not a " + std::to_string(kStateDim) + "->" +
                                 std::to_string(kNumActions) + " q-network");
    return std::move(ck.params);
}

EpisodeResult run_episode(const RunConfig& config, const QParams* params) {
    config.validate();
    const GridSpec& grid = config.grid;
    const EnvModel env = build_env(config);
    Rng master(config.seed);
    Rng start_rng = master.child("starts");
    SwarmPositions positions =
        config.start_cells ? *config.start_cells
                           : random_start_cells(grid, config.n_drones, start_rng);
    const int n = config.n_drones;
    const int horizon = config.horizon;

    const bool is_rl = config.policy == PolicyKind::RLCoordinated ||
                       config.policy == PolicyKind::RLDecentralized;
    std::optional<OnlineLearner> learner;
    if (is_rl) {
        QParams net = params ? *params : load_params_for_run(config);
        TrainConfig tc = config.train;
        tc.net_dims = net.dims;
        learner.emplace(env, std::move(net), tc, config.sim, positions,
                        config.learning_enabled, config.seed);
    }

    std::vector<Rng> drone_rng;
    for (int d = 0; d < n; ++d)
        drone_rng.push_back(master.child("drone").child(static_cast<uint64_t>(d)));

    std::vector<SweepRole> roles;
    std::vector<SweepState> sweeps(static_cast<size_t>(n));
    if (config.policy == PolicyKind::Sweeping) {
        roles = sweeping_roles(n);
        for (int d = 0; d < n; ++d)
            if (roles[static_cast<size_t>(d)] == SweepRole::Sweeper)
                sweeps[static_cast<size_t>(d)] = sweep_init(grid, positions[static_cast<size_t>(d)]);
    }

    IdlenessMap idleness = init_idleness(grid, config.sim.eta, config.sim.delta, config.sim.fill);

    std::vector<char> visited(static_cast<size_t>(grid.cell_count()), 0);
    int visited_count = 0;
    const auto mark = [&](CellIndex c) {
        char& flag = visited[static_cast<size_t>(c.i) * grid.ny + c.j];
        if (!flag) {
            flag = 1;
            ++visited_count;
        }
    };
    for (const CellIndex& c : positions) mark(c);

    EpisodeResult result;
    result.log.starts = positions;
    result.metrics.rows.reserve(static_cast<size_t>(horizon));
    double cum = 0.0;
    double coverage_sum = 0.0;

    for (int k = 0; k < horizon; ++k) {
        if (config.frames_every > 0 && k % config.frames_every == 0) {
            const IdlenessMap& current = is_rl ? learner->idleness() : idleness;
            FrameSnapshot frame;
            frame.k = k;
            frame.nx = grid.nx;
            frame.ny = grid.ny;
            frame.product.resize(static_cast<size_t>(grid.cell_count()));
            for (int i = 0; i < grid.nx; ++i)
                for (int j = 0; j < grid.ny; ++j)
                    frame.product[static_cast<size_t>(i) * grid.ny + j] =
                        current.at({i, j}) * importance_at(env, {i, j}, k);
            result.log.frames.push_back(std::move(frame));
        }

        double step_score = 0.0;
        double coverage = 0.0;
        if (is_rl) {
            const bool decentralized =
                config.policy == PolicyKind::RLDecentralized ||
                (config.coord_fail_step >= 0 && k >= config.coord_fail_step);
            const OnlineStepResult r = learner->step(
                decentralized ? CoordinationMode::Decentralized : CoordinationMode::Coordinated);
            step_score = r.step_score;
            coverage = r.coverage;
            positions = learner->positions();
        } else {
            std::vector<Action> actions(static_cast<size_t>(n), Action::Stay);
            for (int d = 0; d < n; ++d) {
                const CellIndex at = positions[static_cast<size_t>(d)];
                Action a = Action::Stay;
                switch (config.policy) {
                    case PolicyKind::Random:
                        a = random_policy(grid, at, drone_rng[static_cast<size_t>(d)]);
                        break;
                    case PolicyKind::Greedy:
                        a = greedy_policy(grid, idleness, env, at, k);
                        break;
                    case PolicyKind::Sweeping:
                        switch (roles[static_cast<size_t>(d)]) {
                            case SweepRole::Sweeper: {
                                auto [act, next] =
                                    sweep_policy(grid, sweeps[static_cast<size_t>(d)]);
                                sweeps[static_cast<size_t>(d)] = next;
                                a = act;
                                break;
                            }
                            case SweepRole::Greedy:
                                a = greedy_policy(grid, idleness, env, at, k);
                                break;
                            case SweepRole::Random:
                                a = random_policy(grid, at, drone_rng[static_cast<size_t>(d)]);
                                break;
                        }
                        break;
                    default:
                        break;
                }
                actions[static_cast<size_t>(d)] = a;
            }
            SwarmPositions next(positions.size());
            for (int d = 0; d < n; ++d)
                next[static_cast<size_t>(d)] = apply_action(grid, positions[static_cast<size_t>(d)],
                                                            actions[static_cast<size_t>(d)]);
            const IdlenessMap updated = step_idleness(idleness, grid, next);
            step_score =
                swarm_score(env, idleness, updated, positions, next, k, config.sim.reward);
            coverage = coverage_score(updated, grid);
            positions = std::move(next);
            idleness = updated;
        }

        for (const CellIndex& c : positions) mark(c);
        cum += step_score;
        coverage_sum += coverage;
        StepRow row;
        row.k = k;
        row.score = step_score;
        row.cum_score = cum;
        row.coverage = coverage;
        row.pct_visited = 100.0 * visited_count / grid.free_cell_count();
        result.metrics.rows.push_back(row);
        result.log.steps.push_back(positions);
    }

    Summary& summary = result.metrics.summary;
    summary.policy = policy_name(config.policy);
    summary.mean_score = cum / horizon;
    summary.mean_coverage = coverage_sum / horizon;
    summary.pct_time_max_c = 0.0;
    summary.pct_map_covered = result.metrics.rows.back().pct_visited;
    return result;
}

Comparison compare(const std::vector<RunConfig>& configs, const QParams* params) {
    if (configs.empty()) throw std::invalid_argument("compare: no runs given");
    const EnvModel reference = build_env(configs.front());
    for (const RunConfig& rc : configs) {
        if (rc.grid != configs.front().grid)
            throw std::invalid_argument("compare: runs use different grids");
        if (rc.horizon != configs.front().horizon)
            throw std::invalid_argument("compare: runs use different horizons");
        if (rc.seed != configs.front().seed)
            throw std::invalid_argument("compare: runs use different seeds");
        if (!(build_env(rc) == reference))
            throw std::invalid_argument("compare: runs use different environments");
    }
    Comparison out;
    for (const RunConfig& rc : configs) out.episodes.push_back(run_episode(rc, params));

    const int horizon = configs.front().horizon;
    std::vector<int> max_count(configs.size(), 0);
    for (int k = 0; k < horizon; ++k) {
        double best = -1.0;
        int winner = -1;
        bool tie = false;
        for (size_t r = 0; r < out.episodes.size(); ++r) {
            const double c = out.episodes[r].metrics.rows[static_cast<size_t>(k)].coverage;
            if (c > best) {
                best = c;
                winner = static_cast<int>(r);
                tie = false;
            } else if (c == best) {
                tie = true;
            }
        }
        if (!tie && winner >= 0) max_count[static_cast<size_t>(winner)] += 1;
    }
    for (size_t r = 0; r < out.episodes.size(); ++r) {
        Summary s = out.episodes[r].metrics.summary;
        s.pct_time_max_c = 100.0 * max_count[r] / horizon;
        out.episodes[r].metrics.summary = s;
        out.rows.push_back(s);
    }
    return out;
}

static std::string summary_csv_line(const Summary& s) {
    return s.policy + "," + fmt_g(s.mean_score) + "," + fmt_g(s.mean_coverage) + "," +
           fmt_g(s.pct_time_max_c) + "," + fmt_g(s.pct_map_covered) + "\n";
}

void export_run(const MetricsRecord& metrics, const TrajectoryLog& log, const std::string& dir,
                bool force) {
    fs::create_directories(dir);
    {
        std::string text = "step,score,cum_score,coverage,pct_visited\n";
        for (const StepRow& row : metrics.rows)
            text += std::to_string(row.k) + "," + fmt_g(row.score) + "," + fmt_g(row.cum_score) +
                    "," + fmt_g(row.coverage) + "," + fmt_g(row.pct_visited) + "\n";
        write_text_file(dir + "/metrics.csv", text, force);
    }
    {
        std::string text = "policy,mean_score,mean_coverage,pct_time_max_coverage,pct_map_covered\n";
        text += summary_csv_line(metrics.summary);
        write_text_file(dir + "/summary.csv", text, force);
    }
    {
        std::string text = "step,drone,i,j\n";
        for (size_t k = 0; k < log.steps.size(); ++k)
            for (size_t d = 0; d < log.steps[k].size(); ++d)
                text += std::to_string(k) + "," + std::to_string(d) + "," +
                        std::to_string(log.steps[k][d].i) + "," +
                        std::to_string(log.steps[k][d].j) + "\n";
        write_text_file(dir + "/trajectory.csv", text, force);
    }
    if (!log.frames.empty()) {
        fs::create_directories(dir + "/frames");
        for (const FrameSnapshot& frame : log.frames) {
            char name[32];
            std::snprintf(name, sizeof(name), "%04d.csv", frame.k);
            std::string text;
            text.reserve(frame.product.size() * 8);
            for (int i = 0; i < frame.nx; ++i) {
                for (int j = 0; j < frame.ny; ++j) {
                    if (j) text += ",";
                    text += fmt_g(frame.product[static_cast<size_t>(i) * frame.ny + j]);
                }
                text += "\n";
            }
            write_text_file(dir + "/frames/" + name, text, force);
        }
    }
}

void export_comparison(const Comparison& comparison, const std::string& dir, bool force) {
    fs::create_directories(dir);
    std::string text = "policy,mean_score,mean_coverage,pct_time_max_coverage,pct_map_covered\n";
    for (const Summary& s : comparison.rows) text += summary_csv_line(s);
    write_text_file(dir + "/summary.csv", text, force);
    for (size_t r = 0; r < comparison.episodes.size(); ++r) {
        const std::string sub = dir + "/run_" + comparison.rows[r].policy;
        export_run(comparison.episodes[r].metrics, comparison.episodes[r].log, sub, force);
    }
}

std::string format_comparison(const Comparison& comparison) {
    char line[160];
    std::string out;
    std::snprintf(line, sizeof(line), "%-18s %12s %14s %16s %16s\n", "policy", "mean_score",
                  "mean_coverage", "pct_time_max_C", "pct_map_covered");
    out += line;
    for (const Summary& s : comparison.rows) {
        std::snprintf(line, sizeof(line), "%-18s %12.4f %14.4f %16.2f %16.1f\n",
                      s.policy.c_str(), s.mean_score, s.mean_coverage, s.pct_time_max_c,
                      s.pct_map_covered);
        out += line;
    }
    return out;
}

namespace {

std::string checkpoint_metadata_hash(const TrainConfig& tc) {
    const std::string canon = "epochs=" + std::to_string(tc.epochs) +
                              ";iters=" + std::to_string(tc.iters) +
                              ";batch=" + std::to_string(tc.batch) + ";gamma=" + fmt_g(tc.gamma) +
                              ";lr=" + fmt_g(tc.lr) +
                              ";target_period=" + std::to_string(tc.target_period) +
                              ";seed=" + std::to_string(tc.seed);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canon)));
    return buf;
}

}  // namespace

int cli(const std::vector<std::string>& args) {
    CLI::App app{"multi-drone traffic patrolling: simulation, training and evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_path, outdir, data_path, ckpt_path, loss_csv;
    std::string policy_str = "random", policies_str, map_str = "train", net_dims_str;
    uint64_t seed = 0;
    int drones = 0, horizon = 0, every = 100, coord_fail = -1;
    int epochs = 0, iters = 0, batch = 0, target_period = 0, capacity = 0;
    double lr = 0.0, gamma = 0.0, epsilon = 0.0;
    bool force = false, frozen = false, online = false;

    // collect ---------------------------------------------------------------
    auto* collect = app.add_subcommand("collect", "record random-rollout experience");
    collect->add_option("--config", config_path, "config file");
    auto* c_seed = collect->add_option("--seed", seed, "run seed");
    collect->add_option("--out", out_path, "output transition file")->required();
    auto* c_drones = collect->add_option("--drones", drones, "number of drones");
    auto* c_horizon = collect->add_option("--horizon", horizon, "steps to roll out");
    auto* c_map = collect->add_option("--map", map_str, "synthetic map: train|test");
    collect->callback([&]() {
        ConfigMap cfg = config_path.empty() ? ConfigMap() : ConfigMap::from_file(config_path);
        if (c_map->count() || !cfg.has("env.map")) cfg.set("env.map", map_str);
        if (c_seed->count()) cfg.set("run.seed", std::to_string(seed));
        if (c_drones->count()) cfg.set("run.drones", std::to_string(drones));
        if (c_horizon->count()) cfg.set("run.horizon", std::to_string(horizon));
        const RunConfig rc = config_from_map(cfg);
        const EnvModel env = build_env(rc);
        const std::vector<ReplayBuffer> buffers =
            collect_random_rollouts(env, rc.n_drones, rc.horizon, rc.seed, rc.sim,
                                    static_cast<size_t>(rc.train.capacity));
        save_transitions(out_path, buffers);
        size_t total = 0;
        for (const ReplayBuffer& b : buffers) total += b.size();
        std::cout << "collected " << total << " transitions from " << rc.n_drones
                  << " drones over " << rc.horizon << " steps -> " << out_path << "\n";
    });

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "pretrain the shared q-network");
    train->add_option("--config", config_path, "config file");
    train->add_option("--seed", seed, "training seed")->required();
    train->add_option("--data", data_path, "transition file from `collect`")->required();
    train->add_option("--out", out_path, "output checkpoint")->required();
    train->add_option("--loss-csv", loss_csv, "write per-epoch mean loss");
    auto* t_epochs = train->add_option("--epochs", epochs, "training epochs");
    auto* t_iters = train->add_option("--iters", iters, "gradient steps per epoch");
    auto* t_batch = train->add_option("--batch", batch, "batch size");
    auto* t_lr = train->add_option("--lr", lr, "learning rate");
    auto* t_gamma = train->add_option("--gamma", gamma, "discount factor");
    auto* t_target = train->add_option("--target-period", target_period,
                                       "epochs between target updates");
    auto* t_cap = train->add_option("--capacity", capacity, "per-drone buffer capacity");
    auto* t_dims = train->add_option("--net-dims", net_dims_str,
                                     "layer widths (csv), or `paper`/`desk`");
    train->callback([&]() {
        ConfigMap cfg = config_path.empty() ? ConfigMap() : ConfigMap::from_file(config_path);
        cfg.set("run.seed", std::to_string(seed));
        if (t_epochs->count()) cfg.set("train.epochs", std::to_string(epochs));
        if (t_iters->count()) cfg.set("train.iters", std::to_string(iters));
        if (t_batch->count()) cfg.set("train.batch", std::to_string(batch));
        if (t_lr->count()) cfg.set("train.lr", fmt_g(lr));
        if (t_gamma->count()) cfg.set("train.gamma", fmt_g(gamma));
        if (t_target->count()) cfg.set("train.target_period", std::to_string(target_period));
        if (t_cap->count()) cfg.set("train.capacity", std::to_string(capacity));
        if (t_dims->count())
            cfg.set("train.net_dims", dims_to_string(dims_from_string(net_dims_str)));
        const RunConfig rc = config_from_map(cfg);
        const std::vector<ReplayBuffer> buffers =
            load_transitions(data_path, static_cast<size_t>(rc.train.capacity));
        const PretrainResult result = pretrain(buffers, rc.train);
        Metadata meta;
        meta["net_dims"] = dims_to_string(result.params.dims);
        meta["action_order"] = "stay,up,down,left,right";
        meta["grid"] = std::to_string(rc.grid.nx) + "x" + std::to_string(rc.grid.ny);
        meta["train_config_hash"] = checkpoint_metadata_hash(rc.train);
        meta["seed"] = std::to_string(rc.train.seed);
        save_checkpoint_file(out_path, result.params, &result.opt, meta);
        if (!loss_csv.empty()) {
            std::string text = "epoch,mean_loss\n";
            for (size_t e = 0; e < result.loss_curve.size(); ++e)
                text += std::to_string(e) + "," + fmt_g(result.loss_curve[e]) + "\n";
            write_text_file(loss_csv, text, true);
        }
        std::cout << "trained " << rc.train.epochs << " epochs (net "
                  << dims_to_string(result.params.dims) << "), final mean loss "
                  << fmt_g(result.loss_curve.back()) << " -> " << out_path << "\n";
    });

    // shared episode options -------------------------------------------------
    const auto add_episode_options = [&](CLI::App* sub, bool frames) {
        sub->add_option("--config", config_path, "config file");
        sub->add_option("--outdir", outdir, "output directory")->required();
        sub->add_option("--checkpoint", ckpt_path, "q-network checkpoint");
        sub->add_flag("--force", force, "overwrite existing outputs");
        sub->add_flag("--frozen", frozen, "disable online learning");
        sub->add_flag("--online", online, "enable online learning");
        auto* o_horizon = sub->add_option("--horizon", horizon, "episode length");
        auto* o_drones = sub->add_option("--drones", drones, "number of drones");
        auto* o_map = sub->add_option("--map", map_str, "synthetic map: train|test");
        auto* o_eps = sub->add_option("--epsilon", epsilon, "exploration rate");
        auto* o_fail = sub->add_option("--coord-fail-step", coord_fail,
                                       "switch to decentralized mode at this step");
        auto* o_every =
            frames ? sub->add_option("--every", every, "frame snapshot cadence") : nullptr;
        return [&, o_horizon, o_drones, o_map, o_eps, o_fail, o_every, frames]() {
            ConfigMap cfg = config_path.empty() ? ConfigMap() : ConfigMap::from_file(config_path);
            if (o_horizon->count()) cfg.set("run.horizon", std::to_string(horizon));
            if (o_drones->count()) cfg.set("run.drones", std::to_string(drones));
            if (o_map->count()) cfg.set("env.map", map_str);
            if (o_eps->count()) cfg.set("run.epsilon", fmt_g(epsilon));
            if (o_fail->count()) cfg.set("run.coord_fail_step", std::to_string(coord_fail));
            if (frames && o_every->count()) cfg.set("run.frames_every", std::to_string(every));
            if (frozen && online) throw std::runtime_error("--frozen conflicts with --online");
            if (frozen) cfg.set("run.learning", "false");
            if (online) cfg.set("run.learning", "true");
            return cfg;
        };
    };

    // eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "run one episode and export metrics");
    eval->add_option("--policy", policy_str, "random|greedy|sweeping|rl|rl-decentralized")
        ->required();
    auto* e_seed = eval->add_option("--seed", seed, "run seed")->required();
    auto eval_cfg = add_episode_options(eval, false);
    eval->callback([&]() {
        ConfigMap cfg = eval_cfg();
        cfg.set("run.policy", policy_str);
        if (e_seed->count()) cfg.set("run.seed", std::to_string(seed));
        RunConfig rc = config_from_map(cfg);
        rc.checkpoint = ckpt_path;
        const EpisodeResult result = run_episode(rc);
        export_run(result.metrics, result.log, outdir, force);
        const Summary& s = result.metrics.summary;
        std::cout << s.policy << ": mean score " << fmt_g(s.mean_score) << ", mean coverage "
                  << fmt_g(s.mean_coverage) << ", map covered " << fmt_g(s.pct_map_covered)
                  << "% -> " << outdir << "\n";
    });

    // compare ---------------------------------------------------------------
    auto* cmp = app.add_subcommand("compare", "run several policies on one environment");
    cmp->add_option("--policies", policies_str, "comma-separated policy list")->required();
    auto* m_seed = cmp->add_option("--seed", seed, "run seed");
    auto cmp_cfg = add_episode_options(cmp, false);
    cmp->callback([&]() {
        ConfigMap cfg = cmp_cfg();
        if (m_seed->count()) cfg.set("run.seed", std::to_string(seed));
        RunConfig base = config_from_map(cfg);
        base.checkpoint = ckpt_path;
        std::vector<RunConfig> runs;
        for (const std::string& name : split(policies_str, ',')) {
            RunConfig rc = base;
            rc.policy = policy_from_name(name);
            runs.push_back(std::move(rc));
        }
        if (runs.empty()) throw std::runtime_error("no policies given");
        const Comparison comparison = compare(runs);
        std::cout << format_comparison(comparison);
        if (!outdir.empty()) export_comparison(comparison, outdir, force);
    });

    // transfer ---------------------------------------------------------------
    auto* transfer = app.add_subcommand(
        "transfer", "run a frozen checkpoint on the stochastic-demand environment");
    transfer->add_option("--checkpoint", ckpt_path, "q-network checkpoint")->required();
    auto* x_seed = transfer->add_option("--seed", seed, "run seed");
    transfer->add_option("--config", config_path, "config file");
    transfer->add_option("--outdir", outdir, "output directory")->required();
    transfer->add_flag("--force", force, "overwrite existing outputs");
    auto* x_horizon = transfer->add_option("--horizon", horizon, "episode length");
    auto* x_drones = transfer->add_option("--drones", drones, "number of drones");
    transfer->callback([&]() {
        ConfigMap cfg = config_path.empty() ? ConfigMap() : ConfigMap::from_file(config_path);
        cfg.set("env.kind", "demand");
        cfg.set("run.policy", "rl");
        cfg.set("run.learning", "false");
        if (x_seed->count()) cfg.set("run.seed", std::to_string(seed));
        if (x_horizon->count())
            cfg.set("run.horizon", std::to_string(horizon));
        else if (!cfg.has("run.horizon"))
            cfg.set("run.horizon", "144");
        if (x_drones->count()) cfg.set("run.drones", std::to_string(drones));
        RunConfig rc = config_from_map(cfg);
        rc.checkpoint = ckpt_path;
        const EpisodeResult result = run_episode(rc);
        export_run(result.metrics, result.log, outdir, force);
        const Summary& s = result.metrics.summary;
        std::cout << "transfer: mean score " << fmt_g(s.mean_score) << ", mean coverage "
                  << fmt_g(s.mean_coverage) << ", map covered " << fmt_g(s.pct_map_covered)
                  << "% -> " << outdir << "\n";
    });

    // render ----------------------------------------------------------------
    auto* render = app.add_subcommand("render", "run an episode and dump plot-ready frames");
    render->add_option("--policy", policy_str, "random|greedy|sweeping|rl|rl-decentralized")
        ->required();
    auto* r_seed = render->add_option("--seed", seed, "run seed");
    auto render_cfg = add_episode_options(render, true);
    render->callback([&]() {
        ConfigMap cfg = render_cfg();
        cfg.set("run.policy", policy_str);
        if (r_seed->count()) cfg.set("run.seed", std::to_string(seed));
        if (!cfg.has("run.frames_every")) cfg.set("run.frames_every", std::to_string(every));
        RunConfig rc = config_from_map(cfg);
        rc.checkpoint = ckpt_path;
        const EpisodeResult result = run_episode(rc);
        export_run(result.metrics, result.log, outdir, force);
        std::cout << "rendered " << result.log.frames.size() << " frames -> " << outdir
                  << "/frames\n";
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace patrol
