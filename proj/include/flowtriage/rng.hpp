#ifndef FLOWTRIAGE_RNG_HPP
#define FLOWTRIAGE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace flowtriage {

// Derive a per-module seed from the global seed so adding a consumer never
// perturbs another module's stream. FNV-1a over "seed:tag".
inline std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& tag) {
    const std::string key = std::to_string(global_seed) + ":" + tag;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Seeded generator with explicit draw algorithms. std::mt19937_64 is fully
// specified by the standard; the draws below avoid the library-defined
// distribution objects so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // uniform in [0, 1) with 53-bit resolution
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [lo, hi] via rejection-free modulo of a wide draw;
    // bias is negligible for the desk-scale ranges used here
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    // standard normal via Box-Muller (pair cached)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double lognormal(double log_mean, double log_sigma) {
        return std::exp(normal(log_mean, log_sigma));
    }

    // index draw from unnormalized weights
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace flowtriage

#endif  // FLOWTRIAGE_RNG_HPP
