#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hpot {

// Mixes a root seed with a path of stream keys (chain id, replicate, model...) into a
// child seed. Child streams are independent of the order in which they are created.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] static Rng derive(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
        return Rng(derive_seed(root, keys));
    }

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    // Shape/rate parameterisation.
    double gamma(double shape, double rate);
    double beta(double a, double b);
    std::uint64_t poisson(double mean);
    std::size_t index(std::size_t n);
    // Draws an index with probability proportional to weights[i] (nonnegative, not all zero).
    template <typename Range>
    std::size_t categorical(const Range& weights, double total);

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

template <typename Range>
std::size_t Rng::categorical(const Range& weights, double total) {
    const double target = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    std::size_t i = 0;
    for (double w : weights) {
        if (w > 0.0) {
            acc += w;
            last_positive = i;
            if (target < acc) {
                return i;
            }
        }
        ++i;
    }
    return last_positive;
}

}  // namespace hpot
