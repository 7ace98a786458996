#pragma once

#include <complex>
#include <vector>

#include "tvdd/grid.hpp"

namespace tvdd {

using ComplexVector = std::vector<std::complex<double>>;

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/* In-place radix-2 Cooley-Tukey on a contiguous line, unnormalized. */
inline void fft_pow2(std::complex<double>* a, std::size_t n, bool inverse) {
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/* Direct O(n^2) transform for lines whose length is not a power of
 * two; the grids in play are small enough for this to be cheap. */
inline void dft_direct(std::complex<double>* a, std::size_t n, bool inverse) {
    const double pi = 3.14159265358979323846264338327950288;
    std::vector<std::complex<double>> roots(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang = (inverse ? 2.0 : -2.0) * pi * static_cast<double>(k) / static_cast<double>(n);
        roots[k] = {std::cos(ang), std::sin(ang)};
    }
    std::vector<std::complex<double>> out(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t m = 0; m < n; ++m) out[k] += a[m] * roots[(k * m) % n];
    std::copy(out.begin(), out.end(), a);
}

inline void transform_line(std::complex<double>* a, std::size_t n, bool inverse) {
    if (n == 1) return;
    if (is_power_of_two(n))
        fft_pow2(a, n, inverse);
    else
        dft_direct(a, n, inverse);
}

}  // namespace detail

/* Unitary DFT along every axis of the grid (scale 1/sqrt(N) per axis
 * in both directions, so Parseval holds exactly). */
inline void unitary_dft_in_place(ComplexVector& a, const GridShape& shape, bool inverse) {
    if (a.size() != shape.size()) throw std::invalid_argument("unitary_dft: size mismatch");
    for (int j = 0; j < shape.ndim(); ++j) {
        const std::size_t stride = shape.stride(j);
        const std::size_t n_axis = static_cast<std::size_t>(shape.dim(j));
        const std::size_t block = stride * n_axis;
        const std::size_t outer = shape.size() / block;
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_axis));
        std::vector<std::complex<double>> line(n_axis);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t t = 0; t < stride; ++t) {
                const std::size_t base = o * block + t;
                for (std::size_t k = 0; k < n_axis; ++k) line[k] = a[base + k * stride];
                detail::transform_line(line.data(), n_axis, inverse);
                for (std::size_t k = 0; k < n_axis; ++k) a[base + k * stride] = line[k] * scale;
            }
        }
    }
}

inline ComplexVector unitary_dft(const Signal& u) {
    ComplexVector a(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) a[i] = {u[i], 0.0};
    unitary_dft_in_place(a, u.shape(), false);
    return a;
}

inline Signal unitary_idft_real(ComplexVector spec, const GridShape& shape) {
    unitary_dft_in_place(spec, shape, true);
    Signal u(shape);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = spec[i].real();
    return u;
}

}  // namespace tvdd
