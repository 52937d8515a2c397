#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hpot/kernel.hpp"
#include "hpot/random.hpp"

namespace hpot {

/// lambda(t | H_t) = mu + kappa * sum_{t_i < t} h(t - t_i).
struct HawkesParams {
    double mu{1.0};
    double kappa{0.5};
    TriggeringKernel kernel{ExponentialKernel{1.0}};

    /// Requires mu >= 0, 0 <= kappa < 1 and a valid kernel. Inference keeps mu > 0 and
    /// kappa in (0, 1); the degenerate values are allowed for simulation and scoring.
    void validate() const;
};

inline constexpr std::int32_t kBackground = -1;

/// Latent parents: parents[i] is the zero-based index of the event that triggered event i,
/// or kBackground. parents[i] < i always, and the first event is background.
struct BranchingStructure {
    std::vector<std::int32_t> parents;

    /// From the 1-based convention where 0 denotes the background process.
    [[nodiscard]] static BranchingStructure from_one_based(std::span<const int> b);
    [[nodiscard]] std::vector<int> to_one_based() const;

    [[nodiscard]] std::size_t size() const noexcept { return parents.size(); }
    [[nodiscard]] std::size_t background_count() const;
    /// |S_j| for every event j.
    [[nodiscard]] std::vector<std::size_t> offspring_counts() const;
    /// Throws std::invalid_argument if the structure is inconsistent with the event times.
    void validate(std::span<const double> times) const;
};

/// Clusters are the time intervals between consecutive background events; since events
/// are time-ordered every cluster is a contiguous index range.
struct ClusterPartition {
    std::vector<std::size_t> boundaries;  // indices of background events, increasing
    std::vector<std::size_t> assignment;  // event index -> cluster index

    [[nodiscard]] std::size_t cluster_count() const noexcept { return boundaries.size(); }
    /// Half-open index range [first, last) of cluster k.
    [[nodiscard]] std::pair<std::size_t, std::size_t> range(std::size_t k) const;
};

[[nodiscard]] double intensity(double t, std::span<const double> history, const HawkesParams& p);

/// Lambda(T) = mu*T + kappa * sum_j H(T - t_j) over events t_j <= T, window starting at 0.
[[nodiscard]] double compensator(double T, std::span<const double> events, const HawkesParams& p);

/// Integrated intensity over (a, b] given all events (those after b are ignored).
[[nodiscard]] double compensator_between(double a, double b, std::span<const double> events, const HawkesParams& p);

/// Log of the branching-conditional likelihood on [0, T].
/// Throws std::invalid_argument if any triggering lag is not positive.
[[nodiscard]] double loglik_conditional(const BranchingStructure& b, std::span<const double> events, double T,
                                        const HawkesParams& p);

/// sum_i log lambda(t_i | H_{t_i}) - Lambda(T): the likelihood with the branching summed out.
[[nodiscard]] double loglik_unconditional(std::span<const double> events, double T, const HawkesParams& p);

/// New events on a window. parents index into (history ++ times), or kBackground.
struct SimulatedPath {
    std::vector<double> times;
    std::vector<std::int32_t> parents;
};

/// Exact cluster (branching) construction on (start, end]: Poisson(mu) immigrants plus
/// recursively generated offspring of every event, including the given history events,
/// whose offspring are restricted to the window. Output is time-sorted.
[[nodiscard]] SimulatedPath simulate(const HawkesParams& p, double start, double end, std::span<const double> history,
                                     Rng& rng);

struct SimulatedSeries {
    std::vector<double> times;
    BranchingStructure branching;
};

/// simulate() on (0, T] without history.
[[nodiscard]] SimulatedSeries simulate(const HawkesParams& p, double T, Rng& rng);

[[nodiscard]] ClusterPartition clusters_from_branching(const BranchingStructure& b, std::span<const double> events,
                                                       double T);

}  // namespace hpot
