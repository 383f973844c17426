#include "patrol/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace patrol {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<CellIndex> draw_origins(const GridSpec& grid, int count, Rng& rng) {
    std::vector<CellIndex> cells = grid.free_cells();
    if (static_cast<int>(cells.size()) < count)
        throw std::invalid_argument("grid too small: need " + std::to_string(count) +
                                    " free cells, have " + std::to_string(cells.size()));
    std::vector<CellIndex> out;
    out.reserve(static_cast<size_t>(count));
    for (int n = 0; n < count; ++n) {
        const size_t pick = static_cast<size_t>(rng.uniform_int(cells.size()));
        out.push_back(cells[pick]);
        cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

SyntheticEnv make_map(const GridSpec& grid, uint64_t seed, int big, int small, int horizon,
                      double beta1, double beta2, ObservationBounds bounds) {
    grid.validate();
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    Rng rng = Rng(seed).child("disturbance-origins");
    SyntheticEnv env{grid, {}, horizon, bounds};
    for (const CellIndex& c : draw_origins(grid, big + small, rng)) {
        Disturbance d;
        d.kind = static_cast<int>(env.disturbances.size()) < big ? DisturbanceKind::Big
                                                                 : DisturbanceKind::Small;
        d.origin = c;
        d.beta1 = beta1;
        d.beta2 = beta2;
        env.disturbances.push_back(d);
    }
    env.validate();
    return env;
}

}  // namespace

void ObservationBounds::validate() const {
    if (!(z_hi > z_lo) || z_lo < 0.0)
        throw std::invalid_argument("observation bounds require z_hi > z_lo >= 0");
}

void SyntheticEnv::validate() const {
    grid.validate();
    bounds.validate();
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    for (const Disturbance& d : disturbances) {
        if (!grid.in_bounds(d.origin))
            throw std::invalid_argument("disturbance origin out of bounds: " +
                                        cell_to_string(d.origin));
        if (!(d.beta1 > 0.0) || !(d.beta2 > 0.0))
            throw std::invalid_argument("disturbance beta parameters must be positive");
    }
}

void DemandEnv::validate() const {
    grid.validate();
    bounds.validate();
    if (noise_level < 0.0) throw std::invalid_argument("noise level must be non-negative");
    for (const Hotspot& h : hotspots) {
        if (!grid.in_bounds(h.origin))
            throw std::invalid_argument("hotspot origin out of bounds: " +
                                        cell_to_string(h.origin));
        if (h.peak < 0.0) throw std::invalid_argument("hotspot peak must be non-negative");
        if (h.duration < 1) throw std::invalid_argument("hotspot duration must be at least 1");
        if (!(h.radius > 0.0)) throw std::invalid_argument("hotspot radius must be positive");
    }
}

double amplitude(const Disturbance& d, int k, int horizon) {
    // The formulas are total in k; callers stay inside [0, horizon) except for
    // the arrival term of the final step, which may read one step past the end.
    if (d.kind == DisturbanceKind::Big)
        return std::exp(-static_cast<double>(k) / (d.beta1 * horizon));
    return std::max(0.0, std::sin(2.0 * d.beta2 * kPi * k / horizon));
}

double raw_observation(const SyntheticEnv& env, CellIndex c, int k) {
    if (!env.grid.in_bounds(c))
        throw std::out_of_range("raw_observation: index out of bounds " + cell_to_string(c));
    double z = 0.0;
    for (const Disturbance& d : env.disturbances) {
        const double di = static_cast<double>(c.i - d.origin.i);
        const double dj = static_cast<double>(c.j - d.origin.j);
        z += amplitude(d, k, env.horizon) * std::exp(-0.5 * (di * di + dj * dj));
    }
    return z;
}

double temporal_importance(const ObservationBounds& bounds, const GridSpec& grid,
                           CellIndex c, double z) {
    if (!grid.in_bounds(c))
        throw std::out_of_range("temporal_importance: index out of bounds " + cell_to_string(c));
    if (grid.is_obstacle(c)) return 0.0;
    const double clamped = std::clamp(z, bounds.z_lo, bounds.z_hi);
    return (clamped - bounds.z_lo) / (bounds.z_hi - bounds.z_lo);
}

SyntheticEnv training_map(const GridSpec& grid, uint64_t seed, int horizon, double beta1,
                          double beta2, ObservationBounds bounds) {
    return make_map(grid, seed, 4, 3, horizon, beta1, beta2, bounds);
}

SyntheticEnv test_map(const GridSpec& grid, uint64_t seed, int horizon, double beta1,
                      double beta2, ObservationBounds bounds) {
    return make_map(grid, seed, 2, 3, horizon, beta1, beta2, bounds);
}

double demand_observation(const DemandEnv& env, CellIndex c, int k) {
    if (!env.grid.in_bounds(c))
        throw std::out_of_range("demand_observation: index out of bounds " + cell_to_string(c));
    double z = 0.0;
    for (const Hotspot& h : env.hotspots) {
        const int age = k - h.activation;
        if (age < 0 || age >= h.duration) continue;
        // trapezoid: ramp over the first/last quarter of the active window
        const int ramp = std::max(1, h.duration / 4);
        double gate = 1.0;
        if (age < ramp) gate = static_cast<double>(age + 1) / ramp;
        const int remaining = h.duration - age;
        if (remaining <= ramp) gate = std::min(gate, static_cast<double>(remaining) / ramp);
        const double di = static_cast<double>(c.i - h.origin.i);
        const double dj = static_cast<double>(c.j - h.origin.j);
        z += h.peak * gate * std::exp(-0.5 * (di * di + dj * dj) / (h.radius * h.radius));
    }
    if (env.noise_level > 0.0 && !env.hotspots.empty()) {
        // per-(cell,step) noise as a pure function of the seed
        const uint64_t key = splitmix64(env.seed ^ splitmix64(
            (static_cast<uint64_t>(static_cast<uint32_t>(c.i)) << 40) ^
            (static_cast<uint64_t>(static_cast<uint32_t>(c.j)) << 20) ^
            static_cast<uint64_t>(static_cast<uint32_t>(k))));
        const double u = static_cast<double>(key >> 11) * 0x1.0p-53;  // [0,1)
        const double max_peak =
            std::max_element(env.hotspots.begin(), env.hotspots.end(),
                             [](const Hotspot& a, const Hotspot& b) { return a.peak < b.peak; })
                ->peak;
        z += (2.0 * u - 1.0) * env.noise_level * max_peak;
    }
    return std::max(0.0, z);
}

DemandEnv random_demand_env(const GridSpec& grid, uint64_t seed, int horizon,
                            int hotspot_count, double noise_level, ObservationBounds bounds) {
    grid.validate();
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (hotspot_count < 1) throw std::invalid_argument("need at least one hotspot");
    Rng rng = Rng(seed).child("demand-hotspots");
    DemandEnv env{grid, {}, seed, noise_level, bounds};
    const std::vector<CellIndex> origins = draw_origins(grid, hotspot_count, rng);
    for (const CellIndex& origin : origins) {
        Hotspot h;
        h.origin = origin;
        h.duration = horizon / 6 + static_cast<int>(rng.uniform_int(
            static_cast<uint64_t>(std::max(1, horizon / 6))));
        h.activation = static_cast<int>(rng.uniform_int(
            static_cast<uint64_t>(std::max(1, horizon - h.duration / 2))));
        h.peak = 0.6 + 0.4 * rng.uniform();
        h.radius = 1.5 + 1.5 * rng.uniform();
        env.hotspots.push_back(h);
    }
    env.validate();
    return env;
}

const GridSpec& env_grid(const EnvModel& env) {
    return std::visit([](const auto& e) -> const GridSpec& { return e.grid; }, env);
}

const ObservationBounds& env_bounds(const EnvModel& env) {
    return std::visit([](const auto& e) -> const ObservationBounds& { return e.bounds; }, env);
}

double observe(const EnvModel& env, CellIndex c, int k) {
    if (std::holds_alternative<SyntheticEnv>(env))
        return raw_observation(std::get<SyntheticEnv>(env), c, k);
    return demand_observation(std::get<DemandEnv>(env), c, k);
}

double importance_at(const EnvModel& env, CellIndex c, int k) {
    return temporal_importance(env_bounds(env), env_grid(env), c, observe(env, c, k));
}

}  // namespace patrol
