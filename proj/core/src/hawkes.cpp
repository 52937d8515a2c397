#include "hpot/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hpot {

void HawkesParams::validate() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("background rate must be finite and nonnegative");
    }
    if (!(kappa >= 0.0 && kappa < 1.0)) {
        throw std::invalid_argument("branching ratio must lie in [0, 1)");
    }
    validate_kernel(kernel);
}

BranchingStructure BranchingStructure::from_one_based(std::span<const int> b) {
    BranchingStructure out;
    out.parents.reserve(b.size());
    for (int v : b) {
        out.parents.push_back(v == 0 ? kBackground : static_cast<std::int32_t>(v - 1));
    }
    return out;
}

std::vector<int> BranchingStructure::to_one_based() const {
    std::vector<int> out;
    out.reserve(parents.size());
    for (auto p : parents) {
        out.push_back(p == kBackground ? 0 : static_cast<int>(p) + 1);
    }
    return out;
}

std::size_t BranchingStructure::background_count() const {
    return static_cast<std::size_t>(std::count(parents.begin(), parents.end(), kBackground));
}

std::vector<std::size_t> BranchingStructure::offspring_counts() const {
    std::vector<std::size_t> counts(parents.size(), 0);
    for (auto p : parents) {
        if (p != kBackground) {
            ++counts[static_cast<std::size_t>(p)];
        }
    }
    return counts;
}

void BranchingStructure::validate(std::span<const double> times) const {
    if (parents.size() != times.size()) {
        throw std::invalid_argument("branching structure length differs from the event count");
    }
    if (!parents.empty() && parents.front() != kBackground) {
        throw std::invalid_argument("the first event must be a background event");
    }
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const auto p = parents[i];
        if (p == kBackground) continue;
        if (p < 0 || static_cast<std::size_t>(p) >= i) {
            throw std::invalid_argument("parent index must precede event " + std::to_string(i));
        }
    }
}

std::pair<std::size_t, std::size_t> ClusterPartition::range(std::size_t k) const {
    const std::size_t first = boundaries.at(k);
    const std::size_t last = k + 1 < boundaries.size() ? boundaries[k + 1] : assignment.size();
    return {first, last};
}

double intensity(double t, std::span<const double> history, const HawkesParams& p) {
    const CompiledKernel h(p.kernel);
    double excitation = 0.0;
    for (double ti : history) {
        if (ti < t) {
            excitation += h.density(t - ti);
        }
    }
    return p.mu + p.kappa * excitation;
}

double compensator(double T, std::span<const double> events, const HawkesParams& p) {
    return compensator_between(0.0, T, events, p);
}

double compensator_between(double a, double b, std::span<const double> events, const HawkesParams& p) {
    if (!(b > a)) {
        return 0.0;
    }
    const CompiledKernel h(p.kernel);
    double triggered = 0.0;
    for (double tj : events) {
        if (tj >= b) continue;
        triggered += h.mass(std::max(0.0, a - tj), b - tj);
    }
    const double background = std::isinf(b) ? (p.mu > 0.0 ? std::numeric_limits<double>::infinity() : 0.0)
                                            : p.mu * (b - a);
    return background + p.kappa * triggered;
}

double loglik_conditional(const BranchingStructure& b, std::span<const double> events, double T,
                          const HawkesParams& p) {
    b.validate(events);
    const CompiledKernel h(p.kernel);
    const std::size_t n = events.size();
    std::size_t background = 0;
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto parent = b.parents[i];
        if (parent == kBackground) {
            ++background;
            continue;
        }
        const double lag = events[i] - events[static_cast<std::size_t>(parent)];
        if (!(lag > 0.0)) {
            throw std::invalid_argument("triggering lag must be positive");
        }
        ll += std::log(p.kappa) + std::log(h.density(lag));
    }
    double hazard = 0.0;
    for (double tj : events) {
        hazard += h.cdf(T - tj);
    }
    ll += (background > 0 ? static_cast<double>(background) * std::log(p.mu) : 0.0) - p.mu * T - p.kappa * hazard;
    return ll;
}

double loglik_unconditional(std::span<const double> events, double T, const HawkesParams& p) {
    const CompiledKernel h(p.kernel);
    double ll = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        double excitation = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            excitation += h.density(events[i] - events[j]);
        }
        ll += std::log(p.mu + p.kappa * excitation);
    }
    return ll - compensator(T, events, p);
}

SimulatedPath simulate(const HawkesParams& p, double start, double end, std::span<const double> history, Rng& rng) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.kappa) || !std::isfinite(start) || !std::isfinite(end)) {
        throw std::invalid_argument("simulate requires finite parameters and window");
    }
    p.validate();
    SimulatedPath path;
    if (!(end > start)) {
        return path;
    }
    const CompiledKernel h(p.kernel);
    const std::size_t n_history = history.size();

    // Unsorted generation: (time, parent in combined indexing with unsorted new events).
    std::vector<double> times;
    std::vector<std::int64_t> parents;  // < n_history: history index; otherwise n_history + unsorted index

    const std::uint64_t immigrants = rng.poisson(p.mu * (end - start));
    for (std::uint64_t k = 0; k < immigrants; ++k) {
        times.push_back(rng.uniform(start, end));
        parents.push_back(kBackground);
    }

    const auto spawn = [&](double parent_time, std::int64_t parent_index) {
        const double lower = std::max(0.0, start - parent_time);
        const double upper = end - parent_time;
        const double mass = h.mass(lower, upper);
        if (!(mass > 0.0) || p.kappa == 0.0) {
            return;
        }
        const std::uint64_t children = rng.poisson(p.kappa * mass);
        for (std::uint64_t c = 0; c < children; ++c) {
            const double lag = h.sample(lower, upper, rng);
            times.push_back(std::clamp(parent_time + lag, std::nextafter(start, end), end));
            parents.push_back(parent_index);
        }
    };

    for (std::size_t j = 0; j < n_history; ++j) {
        if (history[j] < end) {
            spawn(history[j], static_cast<std::int64_t>(j));
        }
    }
    for (std::size_t k = 0; k < times.size(); ++k) {  // times grows as offspring are appended
        spawn(times[k], static_cast<std::int64_t>(n_history + k));
    }

    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    std::vector<std::size_t> rank(times.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        rank[order[r]] = r;
    }
    path.times.reserve(times.size());
    path.parents.reserve(times.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t k = order[r];
        path.times.push_back(times[k]);
        const std::int64_t parent = parents[k];
        if (parent == kBackground) {
            path.parents.push_back(kBackground);
        } else if (parent < static_cast<std::int64_t>(n_history)) {
            path.parents.push_back(static_cast<std::int32_t>(parent));
        } else {
            const std::size_t unsorted = static_cast<std::size_t>(parent) - n_history;
            path.parents.push_back(static_cast<std::int32_t>(n_history + rank[unsorted]));
        }
    }
    return path;
}

SimulatedSeries simulate(const HawkesParams& p, double T, Rng& rng) {
    SimulatedPath path = simulate(p, 0.0, T, {}, rng);
    return {std::move(path.times), BranchingStructure{std::move(path.parents)}};
}

ClusterPartition clusters_from_branching(const BranchingStructure& b, std::span<const double> events, double T) {
    b.validate(events);
    ClusterPartition out;
    out.assignment.resize(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (b.parents[i] == kBackground) {
            out.boundaries.push_back(i);
        }
        out.assignment[i] = out.boundaries.size() - 1;
    }
    if (!events.empty() && events.back() > T) {
        throw std::invalid_argument("events extend beyond the cluster window end");
    }
    return out;
}

}  // namespace hpot
