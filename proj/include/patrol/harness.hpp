#pragma once

#include <optional>
#include <string>
#include <vector>

#include "patrol/config.hpp"
#include "patrol/environment.hpp"
#include "patrol/learner.hpp"
#include "patrol/policies.hpp"

namespace patrol {

struct RunConfig {
    GridSpec grid{20.0, 30.0, 20, 30, {}};

    // environment
    std::string env_kind = "synthetic";          // synthetic | demand
    std::string synthetic_map = "test";          // train | test (seeded placement)
    std::vector<Disturbance> disturbances;       // explicit layout overrides the seeded one
    double beta1 = 0.7;
    double beta2 = 5.0;
    ObservationBounds bounds;
    int demand_hotspots = 6;
    double demand_noise = 0.1;
    std::vector<Hotspot> hotspots;               // explicit schedule overrides the seeded one

    // episode
    PolicyKind policy = PolicyKind::Random;
    int n_drones = 4;
    std::optional<SwarmPositions> start_cells;   // seeded when absent
    int horizon = 2000;
    SimParams sim;
    TrainConfig train;
    bool net_dims_explicit = false;              // config pinned train.net_dims
    uint64_t seed = 0;
    std::string checkpoint;
    bool learning_enabled = true;                // online updates during RL episodes
    int coord_fail_step = -1;                    // switch to decentralized from this step on
    int frames_every = 0;                        // 0 = no frame snapshots

    void validate() const;
};

// Populate a RunConfig from a parsed config file; rejects unknown keys.
RunConfig config_from_map(const ConfigMap& cfg);

// Build the observation model for this run (seeded placement or explicit lists).
EnvModel build_env(const RunConfig& config);

struct StepRow {
    int k = 0;
    double score = 0.0;
    double cum_score = 0.0;
    double coverage = 0.0;
    double pct_visited = 0.0;
};

struct Summary {
    std::string policy;
    double mean_score = 0.0;
    double mean_coverage = 0.0;
    double pct_time_max_c = 0.0;  // filled by compare(); 0 for single runs
    double pct_map_covered = 0.0;
};

struct MetricsRecord {
    std::vector<StepRow> rows;
    Summary summary;
};

struct FrameSnapshot {
    int k = 0;
    int nx = 0;
    int ny = 0;
    std::vector<double> product;  // idleness * importance, row-major
};

struct TrajectoryLog {
    SwarmPositions starts;
    std::vector<SwarmPositions> steps;  // positions after each step
    std::vector<FrameSnapshot> frames;
};

struct EpisodeResult {
    MetricsRecord metrics;
    TrajectoryLog log;
};

// Simulate one episode: observe -> (optional learn) -> act -> move -> update
// idleness -> score. Fully deterministic given the seed. RL policies take
// their network from `params` or, when null, from the checkpoint path.
EpisodeResult run_episode(const RunConfig& config, const QParams* params = nullptr);

struct Comparison {
    std::vector<Summary> rows;               // one per policy, input order
    std::vector<EpisodeResult> episodes;
};

// Run several policies on an identical environment and score the four summary
// columns; "% of time with max C" counts strict per-step maxima (ties award
// no one).
Comparison compare(const std::vector<RunConfig>& configs, const QParams* params = nullptr);

// Write metrics.csv, summary.csv, trajectory.csv and optional frame dumps.
void export_run(const MetricsRecord& metrics, const TrajectoryLog& log, const std::string& dir,
                bool force = false);

void export_comparison(const Comparison& comparison, const std::string& dir, bool force = false);

std::string format_comparison(const Comparison& comparison);

// Load a checkpoint for a run and validate its shape against the config.
QParams load_params_for_run(const RunConfig& config);

// Entry point behind the `patrol` binary; returns the process exit code.
int cli(const std::vector<std::string>& args);

}  // namespace patrol
