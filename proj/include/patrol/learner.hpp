#pragma once

#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "patrol/environment.hpp"
#include "patrol/policies.hpp"
#include "patrol/qnet.hpp"
#include "patrol/transition.hpp"

namespace patrol {

// Bounded per-drone FIFO of experience tuples; eviction is strictly oldest-first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);
    void push(Transition t);
    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& operator[](size_t idx) const { return data_[idx]; }  // 0 = oldest

private:
    size_t capacity_;
    std::deque<Transition> data_;
};

struct TrainConfig {
    int epochs = 30000;
    int iters = 30;       // gradient steps per epoch
    int batch = 32;
    double gamma = 0.95;
    double lr = 1e-4;
    int target_period = 100;  // epochs between target hard-updates
    int capacity = 100000;    // per-drone buffer capacity
    uint64_t seed = 0;
    ScoreWeights weights;
    double epsilon = 0.05;
    std::vector<int> net_dims = paper_net_dims();

    void validate() const;
};

// Environment-dynamics knobs shared by rollouts and episodes.
struct SimParams {
    double eta = 0.1;
    double delta = 0.025;
    double fill = 1.0;
    RewardSpec reward;
};

// Optional instrumentation captured during a rollout, for oracle replays.
struct RolloutTrace {
    SwarmPositions starts;
    std::vector<SwarmPositions> positions;  // after each step
    std::vector<IdlenessMap> maps;          // I^0 .. I^T
};

// N distinct free start cells drawn by the seeded generator.
SwarmPositions random_start_cells(const GridSpec& grid, int n_drones, Rng& rng);

// T steps of uniformly random feasible motion for every drone, recording one
// transition per drone per step while the idleness map evolves.
std::vector<ReplayBuffer> collect_random_rollouts(const EnvModel& env, int n_drones, int horizon,
                                                  uint64_t seed, const SimParams& sim,
                                                  size_t capacity = 100000,
                                                  RolloutTrace* trace = nullptr);

// Uniform sample without replacement from the pooled union of all buffers.
std::vector<Transition> sample_batch(std::span<const ReplayBuffer> buffers, size_t size,
                                     Rng& rng);

// Versioned binary container of per-drone transition buffers.
void save_transitions(const std::string& path, std::span<const ReplayBuffer> buffers);
std::vector<ReplayBuffer> load_transitions(const std::string& path, size_t capacity = 100000);

struct PretrainResult {
    QParams params;
    TargetParams target;
    AdamState opt;
    std::vector<double> loss_curve;  // per-epoch mean loss
};

// Offline Double-DQN pretraining from pooled buffers.
PretrainResult pretrain(std::span<const ReplayBuffer> buffers, const TrainConfig& config);

enum class CoordinationMode { Coordinated, Decentralized };

struct OnlineStepResult {
    std::vector<Action> actions;
    double step_score = 0.0;  // fleet score on the canonical maps
    double coverage = 0.0;    // coverage after the idleness update
    double mean_loss = std::numeric_limits<double>::quiet_NaN();  // NaN: no update ran
};

// Semi-decentralized online loop. Coordinated steps train the shared network
// from pooled buffers and pick actions with the joint solver; decentralized
// steps leave each drone with its last received parameter snapshot, its own
// buffer, and a locally updated idleness belief.
class OnlineLearner {
public:
    OnlineLearner(EnvModel env, QParams params, const TrainConfig& config, const SimParams& sim,
                  SwarmPositions starts, bool learning_enabled, uint64_t seed);

    OnlineStepResult step(CoordinationMode mode);

    const SwarmPositions& positions() const { return positions_; }
    const IdlenessMap& idleness() const { return idleness_; }
    int step_index() const { return k_; }
    const QParams& params() const { return params_; }
    const std::vector<ReplayBuffer>& buffers() const { return buffers_; }

private:
    struct DroneIsland {  // per-drone state while the coordinator is away
        QParams params;
        TargetParams target;
        AdamState opt;
        IdlenessMap belief;
        SwarmPositions last_known;  // positions at the moment of the outage
        int epochs = 0;
    };

    void enter_decentralized();
    double train_epoch_shared();

    EnvModel env_;
    GridSpec grid_;
    TrainConfig cfg_;
    SimParams sim_;
    bool learning_;
    QParams params_;
    TargetParams target_;
    AdamState opt_;
    std::vector<ReplayBuffer> buffers_;
    SwarmPositions positions_;
    IdlenessMap idleness_;
    int k_ = 0;
    int epochs_done_ = 0;
    Rng update_rng_;
    std::vector<Rng> drone_rng_;
    std::vector<DroneIsland> islands_;  // non-empty only in decentralized mode
};

}  // namespace patrol
