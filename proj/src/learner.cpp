#include "patrol/learner.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace patrol {

namespace {

constexpr char kDataMagic[8] = {'P', 'T', 'R', 'L', 'D', 'A', 'T', '1'};

void put_u32(std::ofstream& out, uint32_t v) {
    uint8_t b[4];
    for (int s = 0; s < 4; ++s) b[s] = static_cast<uint8_t>(v >> (8 * s));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, uint64_t v) {
    uint8_t b[8];
    for (int s = 0; s < 8; ++s) b[s] = static_cast<uint8_t>(v >> (8 * s));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

uint32_t take_u32(std::ifstream& in, const std::string& path) {
    uint8_t b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("transition file truncated: " + path);
    uint32_t v = 0;
    for (int s = 0; s < 4; ++s) v |= static_cast<uint32_t>(b[s]) << (8 * s);
    return v;
}

uint64_t take_u64(std::ifstream& in, const std::string& path) {
    uint8_t b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw std::runtime_error("transition file truncated: " + path);
    uint64_t v = 0;
    for (int s = 0; s < 8; ++s) v |= static_cast<uint64_t>(b[s]) << (8 * s);
    return v;
}

double take_f64(std::ifstream& in, const std::string& path) {
    return std::bit_cast<double>(take_u64(in, path));
}

size_t pooled_size(std::span<const ReplayBuffer> buffers) {
    size_t total = 0;
    for (const ReplayBuffer& b : buffers) total += b.size();
    return total;
}

// One training epoch: `iters` gradient steps on batches sampled from the
// pooled buffers, plus the scheduled target hard-update. Returns mean loss.
double train_epoch(QParams& params, TargetParams& target, AdamState& opt,
                   std::span<const ReplayBuffer> buffers, const TrainConfig& cfg, Rng& rng,
                   int& epochs_done) {
    double loss_sum = 0.0;
    for (int it = 0; it < cfg.iters; ++it) {
        const std::vector<Transition> batch =
            sample_batch(buffers, static_cast<size_t>(cfg.batch), rng);
        const LossGrad lg = loss_and_grad(params, target, batch, cfg.gamma);
        optimizer_step(params, lg.grads, opt);
        loss_sum += lg.loss;
    }
    epochs_done += 1;
    if (epochs_done % cfg.target_period == 0) hard_update(target, params);
    return loss_sum / cfg.iters;
}

}  // namespace

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() == capacity_) data_.pop_front();
    data_.push_back(std::move(t));
}

void TrainConfig::validate() const {
    if (epochs < 1 || iters < 1 || batch < 1 || target_period < 1 || capacity < 1)
        throw std::invalid_argument("train config counts must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("gamma must lie in [0,1)");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in [0,1]");
    weights.validate();
    if (net_dims.size() < 2 || net_dims.front() != kStateDim || net_dims.back() != kNumActions)
        throw std::invalid_argument("net dims must run from " + std::to_string(kStateDim) +
                                    " inputs to " + std::to_string(kNumActions) + " outputs");
}

SwarmPositions random_start_cells(const GridSpec& grid, int n_drones, Rng& rng) {
    std::vector<CellIndex> cells = grid.free_cells();
    if (static_cast<int>(cells.size()) < n_drones)
        throw std::invalid_argument("grid has fewer free cells than drones");
    SwarmPositions starts;
    for (int d = 0; d < n_drones; ++d) {
        const size_t pick = static_cast<size_t>(rng.uniform_int(cells.size()));
        starts.push_back(cells[pick]);
        cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return starts;
}

std::vector<ReplayBuffer> collect_random_rollouts(const EnvModel& env, int n_drones, int horizon,
                                                  uint64_t seed, const SimParams& sim,
                                                  size_t capacity, RolloutTrace* trace) {
    if (n_drones < 1) throw std::invalid_argument("need at least one drone");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    const GridSpec& grid = env_grid(env);
    Rng master(seed);
    Rng start_rng = master.child("starts");
    std::vector<Rng> action_rng;
    for (int d = 0; d < n_drones; ++d)
        action_rng.push_back(master.child("drone").child(static_cast<uint64_t>(d)));

    SwarmPositions positions = random_start_cells(grid, n_drones, start_rng);
    IdlenessMap idleness = init_idleness(grid, sim.eta, sim.delta, sim.fill);
    std::vector<ReplayBuffer> buffers(static_cast<size_t>(n_drones), ReplayBuffer(capacity));
    if (trace) {
        trace->starts = positions;
        trace->positions.clear();
        trace->maps.assign(1, idleness);
    }

    for (int k = 0; k < horizon; ++k) {
        std::vector<StateVector> states(static_cast<size_t>(n_drones));
        std::vector<Action> actions(static_cast<size_t>(n_drones));
        for (int d = 0; d < n_drones; ++d) {
            states[static_cast<size_t>(d)] = build_state(env, idleness, positions, d, k);
            actions[static_cast<size_t>(d)] =
                random_policy(grid, positions[static_cast<size_t>(d)], action_rng[static_cast<size_t>(d)]);
        }
        SwarmPositions next(positions.size());
        for (int d = 0; d < n_drones; ++d)
            next[static_cast<size_t>(d)] =
                apply_action(grid, positions[static_cast<size_t>(d)], actions[static_cast<size_t>(d)]);
        const IdlenessMap updated = step_idleness(idleness, grid, next);
        for (int d = 0; d < n_drones; ++d) {
            Transition t;
            t.s = states[static_cast<size_t>(d)];
            t.u = actions[static_cast<size_t>(d)];
            t.r = drone_reward(env, idleness, updated, positions[static_cast<size_t>(d)],
                               next[static_cast<size_t>(d)], k, sim.reward);
            t.s_next = build_state(env, updated, next, d, k + 1);
            t.feasible_next = feasible_mask(grid, next[static_cast<size_t>(d)]);
            buffers[static_cast<size_t>(d)].push(std::move(t));
        }
        positions = std::move(next);
        idleness = updated;
        if (trace) {
            trace->positions.push_back(positions);
            trace->maps.push_back(idleness);
        }
    }
    return buffers;
}

std::vector<Transition> sample_batch(std::span<const ReplayBuffer> buffers, size_t size,
                                     Rng& rng) {
    const size_t total = pooled_size(buffers);
    if (size == 0) throw std::invalid_argument("batch size must be positive");
    if (total < size)
        throw std::invalid_argument("batch size " + std::to_string(size) +
                                    " exceeds pooled buffer size " + std::to_string(total));
    // Floyd's sampling over the flat index space of the pooled union.
    std::vector<size_t> chosen;
    chosen.reserve(size);
    for (size_t i = total - size; i < total; ++i) {
        const size_t pick = static_cast<size_t>(rng.uniform_int(i + 1));
        if (std::find(chosen.begin(), chosen.end(), pick) != chosen.end())
            chosen.push_back(i);
        else
            chosen.push_back(pick);
    }
    std::vector<Transition> batch;
    batch.reserve(size);
    for (size_t flat : chosen) {
        size_t offset = flat;
        for (const ReplayBuffer& b : buffers) {
            if (offset < b.size()) {
                batch.push_back(b[offset]);
                break;
            }
            offset -= b.size();
        }
    }
    return batch;
}

void save_transitions(const std::string& path, std::span<const ReplayBuffer> buffers) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open transition file for writing: " + path);
    out.write(kDataMagic, sizeof(kDataMagic));
    put_u32(out, 1);  // version
    put_u32(out, kStateDim);
    put_u32(out, static_cast<uint32_t>(buffers.size()));
    for (const ReplayBuffer& b : buffers) put_u64(out, b.size());
    for (const ReplayBuffer& b : buffers) {
        for (size_t idx = 0; idx < b.size(); ++idx) {
            const Transition& t = b[idx];
            for (double v : t.s) put_f64(out, v);
            out.put(static_cast<char>(static_cast<int>(t.u)));
            put_f64(out, t.r);
            for (double v : t.s_next) put_f64(out, v);
            uint8_t mask = 0;
            for (int a = 0; a < kNumActions; ++a)
                if (t.feasible_next[static_cast<size_t>(a)]) mask |= static_cast<uint8_t>(1 << a);
            out.put(static_cast<char>(mask));
        }
    }
    if (!out) throw std::runtime_error("transition file write failed: " + path);
}

std::vector<ReplayBuffer> load_transitions(const std::string& path, size_t capacity) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open transition file: " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDataMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a transition file (bad magic): " + path);
    const uint32_t version = take_u32(in, path);
    if (version != 1)
        throw std::runtime_error("unsupported transition file version " + std::to_string(version));
    const uint32_t dim = take_u32(in, path);
    if (dim != kStateDim)
        throw std::runtime_error("transition file state dim " + std::to_string(dim) +
                                 " does not match " + std::to_string(kStateDim));
    const uint32_t n_drones = take_u32(in, path);
    std::vector<uint64_t> counts(n_drones);
    for (uint64_t& c : counts) c = take_u64(in, path);
    std::vector<ReplayBuffer> buffers;
    for (uint64_t count : counts) {
        ReplayBuffer b(std::max(capacity, static_cast<size_t>(count)));
        for (uint64_t i = 0; i < count; ++i) {
            Transition t;
            for (double& v : t.s) v = take_f64(in, path);
            t.u = action_from_int(in.get());
            t.r = take_f64(in, path);
            for (double& v : t.s_next) v = take_f64(in, path);
            const int mask = in.get();
            if (mask < 0) throw std::runtime_error("transition file truncated: " + path);
            for (int a = 0; a < kNumActions; ++a)
                t.feasible_next[static_cast<size_t>(a)] = (mask >> a) & 1;
            b.push(std::move(t));
        }
        buffers.push_back(std::move(b));
    }
    return buffers;
}

PretrainResult pretrain(std::span<const ReplayBuffer> buffers, const TrainConfig& config) {
    config.validate();
    if (pooled_size(buffers) < static_cast<size_t>(config.batch))
        throw std::invalid_argument("pooled buffers smaller than one batch");
    Rng master(config.seed);
    Rng init_rng = master.child("init");
    Rng batch_rng = master.child("batch");
    PretrainResult out;
    out.params = QParams::he_init(config.net_dims, init_rng);
    out.target = out.params;
    out.opt = AdamState::init(out.params, config.lr);
    out.loss_curve.reserve(static_cast<size_t>(config.epochs));
    int epochs_done = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch)
        out.loss_curve.push_back(train_epoch(out.params, out.target, out.opt, buffers, config,
                                             batch_rng, epochs_done));
    return out;
}

OnlineLearner::OnlineLearner(EnvModel env, QParams params, const TrainConfig& config,
                             const SimParams& sim, SwarmPositions starts, bool learning_enabled,
                             uint64_t seed)
    : env_(std::move(env)),
      grid_(env_grid(env_)),
      cfg_(config),
      sim_(sim),
      learning_(learning_enabled),
      params_(std::move(params)),
      target_(params_),
      opt_(AdamState::init(params_, config.lr)),
      positions_(std::move(starts)),
      idleness_(init_idleness(grid_, sim.eta, sim.delta, sim.fill)),
      update_rng_(Rng(seed).child("online-batch")) {
    cfg_.validate();
    if (positions_.empty()) throw std::invalid_argument("swarm must have at least one drone");
    for (const CellIndex& c : positions_)
        if (!grid_.is_free(c))
            throw std::invalid_argument("start cell not free: " + cell_to_string(c));
    if (params_.input_dim() != kStateDim || params_.output_dim() != kNumActions)
        throw std::invalid_argument("q network must map " + std::to_string(kStateDim) +
                                    " state entries to " + std::to_string(kNumActions) +
                                    " actions; got " + std::to_string(params_.input_dim()) +
                                    " -> " + std::to_string(params_.output_dim()));
    Rng master(seed);
    for (size_t d = 0; d < positions_.size(); ++d)
        drone_rng_.push_back(master.child("drone").child(static_cast<uint64_t>(d)));
    buffers_.assign(positions_.size(), ReplayBuffer(static_cast<size_t>(cfg_.capacity)));
}

void OnlineLearner::enter_decentralized() {
    islands_.clear();
    for (size_t d = 0; d < positions_.size(); ++d) {
        DroneIsland island{params_, target_, AdamState::init(params_, cfg_.lr), idleness_,
                           positions_, 0};
        islands_.push_back(std::move(island));
    }
}

double OnlineLearner::train_epoch_shared() {
    return train_epoch(params_, target_, opt_, buffers_, cfg_, update_rng_, epochs_done_);
}

OnlineStepResult OnlineLearner::step(CoordinationMode mode) {
    const int n = static_cast<int>(positions_.size());
    OnlineStepResult result;
    result.actions.assign(static_cast<size_t>(n), Action::Stay);
    std::vector<StateVector> states(static_cast<size_t>(n));

    if (mode == CoordinationMode::Coordinated) {
        // coordinator back online: drones resync to the shared picture
        islands_.clear();
        if (learning_ && pooled_size(buffers_) >= static_cast<size_t>(cfg_.batch))
            result.mean_loss = train_epoch_shared();
        std::vector<std::array<double, 5>> q_rows(static_cast<size_t>(n));
        for (int d = 0; d < n; ++d) {
            states[static_cast<size_t>(d)] = build_state(env_, idleness_, positions_, d, k_);
            const std::vector<double> q = forward(params_, states[static_cast<size_t>(d)]);
            std::copy(q.begin(), q.end(), q_rows[static_cast<size_t>(d)].begin());
        }
        try {
            result.actions = joint_action_solve(q_rows, positions_, grid_);
        } catch (const std::runtime_error&) {
            // no distinct-destination assignment: fall back to per-drone selection
            for (int d = 0; d < n; ++d)
                result.actions[static_cast<size_t>(d)] = rl_decentralized(
                    params_, states[static_cast<size_t>(d)],
                    feasible_mask(grid_, positions_[static_cast<size_t>(d)]), cfg_.epsilon,
                    drone_rng_[static_cast<size_t>(d)]);
        }
    } else {
        if (islands_.empty()) enter_decentralized();
        double loss_sum = 0.0;
        int losses = 0;
        for (int d = 0; d < n; ++d) {
            DroneIsland& island = islands_[static_cast<size_t>(d)];
            if (learning_ &&
                buffers_[static_cast<size_t>(d)].size() >= static_cast<size_t>(cfg_.batch)) {
                loss_sum += train_epoch(
                    island.params, island.target, island.opt,
                    std::span<const ReplayBuffer>(&buffers_[static_cast<size_t>(d)], 1), cfg_,
                    drone_rng_[static_cast<size_t>(d)], island.epochs);
                ++losses;
            }
            SwarmPositions believed = island.last_known;
            believed[static_cast<size_t>(d)] = positions_[static_cast<size_t>(d)];
            states[static_cast<size_t>(d)] = build_state(env_, island.belief, believed, d, k_);
            result.actions[static_cast<size_t>(d)] = rl_decentralized(
                island.params, states[static_cast<size_t>(d)],
                feasible_mask(grid_, positions_[static_cast<size_t>(d)]), cfg_.epsilon,
                drone_rng_[static_cast<size_t>(d)]);
        }
        if (losses > 0) result.mean_loss = loss_sum / losses;
    }

    SwarmPositions next(positions_.size());
    for (int d = 0; d < n; ++d)
        next[static_cast<size_t>(d)] = apply_action(grid_, positions_[static_cast<size_t>(d)],
                                                    result.actions[static_cast<size_t>(d)]);
    const IdlenessMap updated = step_idleness(idleness_, grid_, next);

    for (int d = 0; d < n; ++d) {
        const CellIndex from = positions_[static_cast<size_t>(d)];
        const CellIndex to = next[static_cast<size_t>(d)];
        result.step_score += drone_reward(env_, idleness_, updated, from, to, k_, sim_.reward);
        Transition t;
        t.s = states[static_cast<size_t>(d)];
        t.u = result.actions[static_cast<size_t>(d)];
        t.feasible_next = feasible_mask(grid_, to);
        if (mode == CoordinationMode::Coordinated) {
            t.r = drone_reward(env_, idleness_, updated, from, to, k_, sim_.reward);
            t.s_next = build_state(env_, updated, next, d, k_ + 1);
        } else {
            // the drone's own signal comes from its locally updated belief
            DroneIsland& island = islands_[static_cast<size_t>(d)];
            const IdlenessMap belief_next = step_idleness(island.belief, grid_, {to});
            t.r = drone_reward(env_, island.belief, belief_next, from, to, k_, sim_.reward);
            SwarmPositions believed = island.last_known;
            believed[static_cast<size_t>(d)] = to;
            t.s_next = build_state(env_, belief_next, believed, d, k_ + 1);
            island.belief = belief_next;
        }
        buffers_[static_cast<size_t>(d)].push(std::move(t));
    }

    positions_ = std::move(next);
    idleness_ = updated;
    k_ += 1;
    result.coverage = coverage_score(idleness_, grid_);
    return result;
}

}  // namespace patrol
