#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace prawn {

// Seed expansion used to derive independent stream seeds from (seed, stream).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random stream. All distributions are implemented on top of
// the raw engine output so results are bit-identical across platforms and
// standard library implementations (std::*_distribution are not portable).
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        return next_u64() % n;
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1], safe as a log argument
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // standard normal via Box-Muller (cosine branch)
    double normal() {
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Gamma(shape, rate) by the Marsaglia-Tsang squeeze method
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0, 1.0);
            return g * std::pow(uniform_open01(), 1.0 / shape) / rate;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    // Poisson by Knuth's product method, split into chunks so the cost stays
    // linear in the mean instead of exponential underflow for large means.
    long poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("Rng::poisson: mean must be nonnegative");
        long count = 0;
        while (mean > 30.0) {
            count += poisson_knuth(30.0);
            mean -= 30.0;
        }
        return count + poisson_knuth(mean);
    }

    // NB-2 with variance mean + mean^2/dispersion, drawn as a Gamma-Poisson mixture
    long negative_binomial(double mean, double dispersion) {
        if (mean < 0.0 || !(dispersion > 0.0))
            throw std::invalid_argument("Rng::negative_binomial: bad parameters");
        if (mean == 0.0) return 0;
        const double lambda = gamma(dispersion, dispersion / mean);
        return poisson(lambda);
    }

  private:
    long poisson_knuth(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 engine_;
};

} // namespace prawn
