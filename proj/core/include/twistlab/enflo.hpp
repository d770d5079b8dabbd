#pragma once

#include "twistlab/maps.hpp"

namespace twistlab {

/// Dimension-doubling amplification: for h: l2_m -> l2_r,
///   (Delta h)(x, y) = (h(x), h(y), x |y| / sqrt(|x|^2 + |y|^2)),
/// mapping l2_{2m} -> l2_{2r+m}; the third block is 0 at the origin.
/// Throws when h is not between plain Euclidean spaces.
HomMap enflo_delta(const HomMap& h);

/// Delta^k h0. Guards against domain dimension beyond 2^14.
HomMap enflo_iterate(const HomMap& h0, int k);

struct IncreaseReport {
    double max_ratio = 0.0; // max |sum h(x_i)| / sum |x_i| over the configs
    bool exceeds = false;   // some config beat 1 + 1e-9
    int configs = 0;
    std::vector<Vec> worst_config; // the config achieving max_ratio
};

/// Quasi-additivity scan of h over zero-sum configs.
IncreaseReport check_increase(const HomMap& h, const std::vector<ZeroSumConfig>& configs);

/// Two-sided estimate of dist(h, L(F, E)) with re-checkable payloads: the
/// lower bound carries the zero-sum certificate it came from, the upper bound
/// carries the linear witness and the held-out sample set it was measured on.
struct DistanceEstimate {
    NormedSpace domain, codomain;
    std::string map_dsl;

    double lower = 0.0;
    std::vector<Vec> lower_certificate;

    double upper = std::numeric_limits<double>::infinity();
    Mat upper_witness;
    std::vector<Vec> upper_heldout;

    std::string to_json() const;
    static DistanceEstimate from_json(const std::string& text);
};

/// Certificate ratio |sum h(z_i)| / sum |z_i|; for any linear H and zero-sum
/// {z_i} this is a valid lower bound on dist(h, L).
double certificate_ratio(const HomMap& h, const std::vector<Vec>& config);

/// Held-out measurement sup_i |h(x_i) - H x_i| / |x_i|.
double witness_sup(const HomMap& h, const Mat& witness, const std::vector<Vec>& points);

/// Recomputation from stored payloads only (no optimizer): parses map_dsl and
/// re-evaluates the stored certificate / witness.
double recompute_lower(const DistanceEstimate& est);
double recompute_upper(const DistanceEstimate& est);

/// Subgradient descent on min_H max_i |h(x_i) - H x_i| with restarts (zero,
/// least-squares fit, perturbed fits). The reported upper bound is measured
/// on a held-out sample set, optionally extended by extra points.
DistanceEstimate dist_to_linear_upper(const HomMap& h, int sample_count, int iterations,
                                      uint64_t seed, const std::vector<Vec>& extra_heldout = {});

/// Best certificate ratio over the configs after local refinement
/// (coordinatewise perturbation, re-centered to zero-sum by mean subtraction).
DistanceEstimate dist_to_linear_lower(const HomMap& h, const std::vector<ZeroSumConfig>& configs,
                                      int refine_steps, uint64_t seed);

struct GrowthPoint {
    int k = 0;
    DistanceEstimate estimate;
    double increase_ratio = 0.0; // check_increase over fresh configs
    std::vector<Vec> increase_worst_config;
};

/// dist(Delta^k 0, L) sandwich for k = 0..k_max starting from the zero map on
/// l2_1, with lower-bound configs seeded from lifted level-(k-1) certificates.
std::vector<GrowthPoint> enflo_growth_study(int k_max, int configs_per_level, int refine_steps,
                                            int upper_samples, int upper_iterations,
                                            int increase_configs, uint64_t seed);

} // namespace twistlab
