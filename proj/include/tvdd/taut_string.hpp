#pragma once

#include <limits>
#include "tvdd/grid.hpp"

namespace tvdd {

/* Exact minimizer of ||u - g||^2 + 2 alpha TV(u) for 1D signals via
 * the taut string through the tube of radius alpha around the running
 * sums r_k = g_1 + ... + g_k, with both endpoints pinned. Used as a
 * verification oracle; the string is found by walking the tube and
 * restarting from each forced contact point. */
inline Signal taut_string_1d(const Signal& g, double alpha) {
    if (g.shape().ndim() != 1) throw std::invalid_argument("taut_string_1d: signal must be 1D");
    if (alpha < 0) throw std::invalid_argument("taut_string_1d: alpha must be nonnegative");
    const std::size_t n = g.size();
    Signal u(g.shape());
    if (n == 0) return u;
    if (n == 1) {
        u[0] = g[0];
        return u;
    }

    std::vector<double> r(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) r[k + 1] = r[k] + g[k];

    const auto upper = [&](std::size_t k) { return (k == n) ? r[n] : r[k] + alpha; };
    const auto lower = [&](std::size_t k) { return (k == n) ? r[n] : r[k] - alpha; };

    std::size_t anchor = 0;
    double anchor_val = 0.0;
    while (anchor < n) {
        double hi = std::numeric_limits<double>::infinity();
        double lo = -std::numeric_limits<double>::infinity();
        std::size_t m_hi = anchor, m_lo = anchor;
        bool forced = false;
        for (std::size_t k = anchor + 1; k <= n; ++k) {
            const double len = static_cast<double>(k - anchor);
            const double su = (upper(k) - anchor_val) / len;
            const double sl = (lower(k) - anchor_val) / len;
            if (su < lo) {
                // the line to any later upper point dips under the lower
                // hull: the string touches the lower tube at m_lo
                for (std::size_t t = m_lo; t > anchor; --t) u[t - 1] = lo;
                anchor_val += lo * static_cast<double>(m_lo - anchor);
                anchor = m_lo;
                forced = true;
                break;
            }
            if (sl > hi) {
                for (std::size_t t = m_hi; t > anchor; --t) u[t - 1] = hi;
                anchor_val += hi * static_cast<double>(m_hi - anchor);
                anchor = m_hi;
                forced = true;
                break;
            }
            if (su < hi) {
                hi = su;
                m_hi = k;
            }
            if (sl > lo) {
                lo = sl;
                m_lo = k;
            }
        }
        if (!forced) {
            // straight segment from the anchor to the pinned endpoint
            const double slope = (r[n] - anchor_val) / static_cast<double>(n - anchor);
            for (std::size_t t = anchor + 1; t <= n; ++t) u[t - 1] = slope;
            break;
        }
    }
    return u;
}

}  // namespace tvdd
