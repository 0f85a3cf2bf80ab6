#pragma once

#include "hb/core.hpp"

#include <cstdint>
#include <random>

namespace hb {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic splittable RNG: child streams depend only on (seed, stream id),
// so concurrent evaluation of independent estimators reproduces the sequential result.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng split(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
    }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(engine_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }

    // Uniform direction on S^{dim-1} in chart coordinates.
    Vec direction(int dim) {
        Vec v(dim);
        double n = 0.0;
        do {
            for (int i = 0; i < dim; ++i) v[i] = normal();
            n = v.norm();
        } while (n < 1e-12);
        return v / n;
    }

    Vec box_point(const Vec& lo, const Vec& hi) {
        Vec v(lo.size());
        for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
        return v;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace hb
