#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "patrol/gridmap.hpp"
#include "patrol/rng.hpp"

namespace patrol {

struct ObservationBounds {
    double z_lo = 0.0;
    double z_hi = 1.0;

    bool operator==(const ObservationBounds&) const = default;
    void validate() const;
};

enum class DisturbanceKind { Big, Small };

struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::Big;
    CellIndex origin;
    double beta1 = 0.7;  // decay horizon fraction of Big disturbances
    double beta2 = 5.0;  // oscillation count of Small disturbances

    bool operator==(const Disturbance&) const = default;
};

struct SyntheticEnv {
    GridSpec grid;
    std::vector<Disturbance> disturbances;
    int horizon = 1;
    ObservationBounds bounds;

    bool operator==(const SyntheticEnv&) const = default;
    void validate() const;
};

// One transient traffic hotspot: Gaussian in space, trapezoidal ramp in time.
struct Hotspot {
    int activation = 0;   // first active step
    CellIndex origin;
    double peak = 1.0;
    double radius = 2.0;  // Gaussian sigma in cell units
    int duration = 1;     // active steps

    bool operator==(const Hotspot&) const = default;
};

// Stochastic-demand environment used for the zero-shot transfer workflow.
struct DemandEnv {
    GridSpec grid;
    std::vector<Hotspot> hotspots;
    uint64_t seed = 0;
    double noise_level = 0.1;  // perturbation bound as a fraction of peak sum
    ObservationBounds bounds;

    bool operator==(const DemandEnv&) const = default;
    void validate() const;
};

// Disturbance amplitude at step k of a horizon-T episode.
// Big: exp(-k/(beta1*T)); Small: max(0, sin(2*beta2*pi*k/T)). Both in [0,1].
double amplitude(const Disturbance& d, int k, int horizon);

// Superposition of all disturbance kernels at cell c, step k.
double raw_observation(const SyntheticEnv& env, CellIndex c, int k);

// Def.-style normalization of a raw observation into [0,1]; obstacles map to 0.
double temporal_importance(const ObservationBounds& bounds, const GridSpec& grid,
                           CellIndex c, double z);

// Seeded disturbance layouts: 4 big + 3 small for training, 2 big + 3 small
// for testing. Origins are drawn without replacement from free cells.
SyntheticEnv training_map(const GridSpec& grid, uint64_t seed, int horizon = 2000,
                          double beta1 = 0.7, double beta2 = 5.0,
                          ObservationBounds bounds = {});
SyntheticEnv test_map(const GridSpec& grid, uint64_t seed, int horizon = 2000,
                      double beta1 = 0.7, double beta2 = 5.0,
                      ObservationBounds bounds = {});

// Hotspot-sum observation with seeded per-(cell,step) noise, clamped at 0.
double demand_observation(const DemandEnv& env, CellIndex c, int k);

// Seeded hotspot schedule covering roughly the whole horizon.
DemandEnv random_demand_env(const GridSpec& grid, uint64_t seed, int horizon,
                            int hotspot_count = 6, double noise_level = 0.1,
                            ObservationBounds bounds = {});

// Runtime-selected observation model.
using EnvModel = std::variant<SyntheticEnv, DemandEnv>;

const GridSpec& env_grid(const EnvModel& env);
const ObservationBounds& env_bounds(const EnvModel& env);
double observe(const EnvModel& env, CellIndex c, int k);

// temporal_importance of observe(env, c, k)
double importance_at(const EnvModel& env, CellIndex c, int k);

}  // namespace patrol
