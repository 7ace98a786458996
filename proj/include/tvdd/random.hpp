#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tvdd/grid.hpp"

namespace tvdd {

/* Seeded draws built directly on mt19937_64 output words. The standard
 * pins the engine bit-exactly, so results are reproducible across
 * platforms; the standard distributions are not, hence these helpers. */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /* uniform in [0, 1) with 53-bit resolution */
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /* uniform integer in [0, n), rejection sampled (no modulo bias) */
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double normal() {
        // Box-Muller; one value per call keeps the stream simple
        double u1 = uniform();
        while (u1 <= 0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    Signal uniform_signal(const GridShape& shape, double lo, double hi) {
        Signal u(shape);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = uniform(lo, hi);
        return u;
    }

    Signal normal_signal(const GridShape& shape) {
        Signal u(shape);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = normal();
        return u;
    }

    DualField feasible_dual(const GridShape& shape) {
        DualField p(shape);
        const int d = shape.ndim();
        for (std::size_t i = 0; i < shape.size(); ++i) {
            double s = 0;
            std::vector<double> raw(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) {
                raw[static_cast<std::size_t>(j)] = normal();
                s += raw[static_cast<std::size_t>(j)] * raw[static_cast<std::size_t>(j)];
            }
            const double r = std::pow(uniform(), 1.0 / d) / std::max(std::sqrt(s), 1e-300);
            for (int j = 0; j < d; ++j) p.component(j)[i] = raw[static_cast<std::size_t>(j)] * r;
        }
        // respect the last-slice invariant
        for (int j = 0; j < d; ++j) {
            const std::size_t stride = shape.stride(j);
            const std::size_t n_axis = static_cast<std::size_t>(shape.dim(j));
            const std::size_t block = stride * n_axis;
            auto& comp = p.component(j);
            for (std::size_t o = 0; o < shape.size() / block; ++o)
                for (std::size_t t = 0; t < stride; ++t)
                    comp[o * block + (n_axis - 1) * stride + t] = 0.0;
        }
        return p;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace tvdd
