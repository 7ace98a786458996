#pragma once

#include <sstream>

#include "tvdd/grid.hpp"

namespace tvdd {

/* Splitting of the grid into J slab subdomains along one axis, with
 * internal boundaries and partition-of-unity weights for the
 * overlapping case. Immutable after construction. */
struct Decomposition {
    GridShape shape;
    int axis = 0;
    bool overlapping = false;
    std::vector<std::pair<int, int>> slab_ranges;        // inclusive [start,end] per subdomain along axis
    std::vector<std::vector<std::size_t>> subdomains;    // sorted flat index sets Omega_j
    std::vector<std::vector<std::size_t>> boundaries;    // Gamma_j
    std::vector<Signal> weights;                         // chi_j

    // derived, filled by finalize()
    std::vector<std::vector<std::uint8_t>> in_subdomain;  // membership masks
    std::vector<std::vector<std::size_t>> constrained;    // C_j = complement(Omega_j) + Gamma_j

    int subdomain_count() const { return static_cast<int>(subdomains.size()); }

    std::size_t free_count(int j) const {
        return shape.size() - constrained[static_cast<std::size_t>(j)].size();
    }

    void finalize() {
        const int J = subdomain_count();
        in_subdomain.assign(static_cast<std::size_t>(J),
                            std::vector<std::uint8_t>(shape.size(), 0));
        constrained.assign(static_cast<std::size_t>(J), {});
        for (int j = 0; j < J; ++j) {
            for (std::size_t i : subdomains[static_cast<std::size_t>(j)])
                in_subdomain[static_cast<std::size_t>(j)][i] = 1;
            std::vector<std::uint8_t> blocked(shape.size(), 0);
            for (std::size_t i = 0; i < shape.size(); ++i)
                if (!in_subdomain[static_cast<std::size_t>(j)][i]) blocked[i] = 1;
            for (std::size_t i : boundaries[static_cast<std::size_t>(j)]) blocked[i] = 1;
            for (std::size_t i = 0; i < shape.size(); ++i)
                if (blocked[i]) constrained[static_cast<std::size_t>(j)].push_back(i);
        }
        validate();
    }

    void validate() const {
        const int J = subdomain_count();
        if (J < 1) throw std::invalid_argument("Decomposition: no subdomains");
        if (static_cast<int>(boundaries.size()) != J || static_cast<int>(weights.size()) != J)
            throw std::invalid_argument("Decomposition: inconsistent field sizes");
        std::vector<int> cover(shape.size(), 0);
        for (int j = 0; j < J; ++j)
            for (std::size_t i : subdomains[static_cast<std::size_t>(j)]) {
                if (i >= shape.size()) throw std::invalid_argument("Decomposition: index out of range");
                cover[i] += 1;
            }
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (cover[i] == 0) throw std::invalid_argument("Decomposition: subdomains do not cover the grid");
            if (!overlapping && cover[i] > 1)
                throw std::invalid_argument("Decomposition: nonoverlapping subdomains must be disjoint");
        }
        for (int j = 0; j < J; ++j) {
            const auto& gamma = boundaries[static_cast<std::size_t>(j)];
            if (!overlapping && !gamma.empty())
                throw std::invalid_argument("Decomposition: nonoverlapping boundaries must be empty");
            for (std::size_t i : gamma) {
                if (cover[i] < 2)
                    throw std::invalid_argument("Decomposition: boundary point not shared by two subdomains");
                if (!in_subdomain.empty() && !in_subdomain[static_cast<std::size_t>(j)][i])
                    throw std::invalid_argument("Decomposition: boundary point outside its subdomain");
            }
        }
        for (std::size_t i = 0; i < shape.size(); ++i) {
            double s = 0;
            for (int j = 0; j < J; ++j) {
                const double w = weights[static_cast<std::size_t>(j)][i];
                if (w < 0) throw std::invalid_argument("Decomposition: negative weight");
                if (!in_subdomain.empty() && !in_subdomain[static_cast<std::size_t>(j)][i] && w != 0.0)
                    throw std::invalid_argument("Decomposition: weight supported outside its subdomain");
                s += w;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw std::invalid_argument("Decomposition: weights do not sum to one");
        }
        for (int j = 0; j < J; ++j)
            for (std::size_t i : boundaries[static_cast<std::size_t>(j)])
                if (weights[static_cast<std::size_t>(j)][i] != 0.0)
                    throw std::invalid_argument("Decomposition: weight nonzero on internal boundary");
    }

    std::string describe() const {
        std::ostringstream os;
        os << "grid";
        for (int j = 0; j < shape.ndim(); ++j) os << (j ? "x" : " ") << shape.dim(j);
        os << ", axis " << axis << ", " << (overlapping ? "overlapping" : "nonoverlapping") << "\n";
        for (int j = 0; j < subdomain_count(); ++j) {
            os << "subdomain " << j << ": slab [" << slab_ranges[static_cast<std::size_t>(j)].first
               << ", " << slab_ranges[static_cast<std::size_t>(j)].second << "], "
               << subdomains[static_cast<std::size_t>(j)].size() << " points, boundary {";
            bool first = true;
            for (std::size_t i : boundaries[static_cast<std::size_t>(j)]) {
                if (!first) os << " ";
                first = false;
                const auto c = shape.coords(i);
                for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
            }
            os << "}\n";
        }
        return os.str();
    }
};

namespace detail {

inline std::vector<std::size_t> slab_indices(const GridShape& shape, int axis, int lo, int hi) {
    std::vector<std::size_t> out;
    const std::size_t stride = shape.stride(axis);
    const std::size_t n_axis = static_cast<std::size_t>(shape.dim(axis));
    const std::size_t block = stride * n_axis;
    for (std::size_t o = 0; o < shape.size() / block; ++o)
        for (int k = lo; k <= hi; ++k)
            for (std::size_t t = 0; t < stride; ++t)
                out.push_back(o * block + static_cast<std::size_t>(k) * stride + t);
    std::sort(out.begin(), out.end());
    return out;
}

/* Balanced base cuts: slab j covers [cuts[j], cuts[j+1]-1]. */
inline std::vector<int> base_cuts(int n, int J) {
    std::vector<int> cuts(static_cast<std::size_t>(J) + 1, 0);
    const int base = n / J, extra = n % J;
    for (int j = 0; j < J; ++j)
        cuts[static_cast<std::size_t>(j) + 1] = cuts[static_cast<std::size_t>(j)] + base + (j < extra ? 1 : 0);
    return cuts;
}

}  // namespace detail

inline Decomposition single_domain(GridShape shape) {
    Decomposition dec;
    dec.shape = std::move(shape);
    dec.axis = 0;
    dec.overlapping = false;
    dec.slab_ranges = {{0, dec.shape.dim(0) - 1}};
    dec.subdomains = {detail::slab_indices(dec.shape, 0, 0, dec.shape.dim(0) - 1)};
    dec.boundaries = {{}};
    Signal ones(dec.shape);
    for (std::size_t i = 0; i < ones.size(); ++i) ones[i] = 1.0;
    dec.weights = {std::move(ones)};
    dec.finalize();
    return dec;
}

/* Contiguous disjoint slabs along the given axis, sizes differing by
 * at most one. The subspaces V_j then form a direct sum of H. */
inline Decomposition split_nonoverlapping(GridShape shape, int axis, int J) {
    if (axis < 0 || axis >= shape.ndim()) throw std::invalid_argument("split: bad axis");
    if (J < 2) throw std::invalid_argument("split_nonoverlapping: need J >= 2");
    if (J > shape.dim(axis)) throw std::invalid_argument("split_nonoverlapping: more subdomains than grid lines");
    const auto cuts = detail::base_cuts(shape.dim(axis), J);
    Decomposition dec;
    dec.shape = std::move(shape);
    dec.axis = axis;
    dec.overlapping = false;
    for (int j = 0; j < J; ++j) {
        const int lo = cuts[static_cast<std::size_t>(j)], hi = cuts[static_cast<std::size_t>(j) + 1] - 1;
        dec.slab_ranges.emplace_back(lo, hi);
        dec.subdomains.push_back(detail::slab_indices(dec.shape, axis, lo, hi));
        dec.boundaries.push_back({});
        Signal chi(dec.shape);
        for (std::size_t i : dec.subdomains.back()) chi[i] = 1.0;
        dec.weights.push_back(std::move(chi));
    }
    dec.finalize();
    return dec;
}

/* Slabs extended into their neighbors so consecutive subdomains share
 * an `overlap`-line region (ceil/floor split of the extension). The
 * internal boundary Gamma_j collects the points of Omega_j whose
 * axis-neighbor lies outside Omega_j and that belong to another
 * subdomain; chi_j ramps linearly across each shared region, is 1 on
 * the private part and 0 from Gamma_j outward. */
inline Decomposition split_overlapping(GridShape shape, int axis, int J, int overlap) {
    if (axis < 0 || axis >= shape.ndim()) throw std::invalid_argument("split: bad axis");
    if (J < 2) throw std::invalid_argument("split_overlapping: need J >= 2");
    if (overlap < 2) throw std::invalid_argument("split_overlapping: overlap must be >= 2");
    const int n = shape.dim(axis);
    const auto cuts = detail::base_cuts(n, J);
    const int ext_hi = (overlap + 1) / 2;  // extension past the cut, upper side
    const int ext_lo = overlap / 2;        // extension before the cut, lower side

    std::vector<int> lo(static_cast<std::size_t>(J)), hi(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) {
        lo[static_cast<std::size_t>(j)] = cuts[static_cast<std::size_t>(j)] - (j > 0 ? ext_lo : 0);
        hi[static_cast<std::size_t>(j)] = cuts[static_cast<std::size_t>(j) + 1] - 1 + (j < J - 1 ? ext_hi : 0);
        if (lo[static_cast<std::size_t>(j)] < 0 || hi[static_cast<std::size_t>(j)] > n - 1)
            throw std::invalid_argument("split_overlapping: slabs plus overlap exceed the axis");
    }
    for (int j = 0; j + 2 < J; ++j)
        if (lo[static_cast<std::size_t>(j) + 2] <= hi[static_cast<std::size_t>(j)])
            throw std::invalid_argument("split_overlapping: more than two subdomains share a grid line");
    for (int j = 0; j + 1 < J; ++j)
        if (lo[static_cast<std::size_t>(j) + 1] > hi[static_cast<std::size_t>(j)])
            throw std::invalid_argument("split_overlapping: subdomains fail to overlap");

    Decomposition dec;
    dec.shape = std::move(shape);
    dec.axis = axis;
    dec.overlapping = true;

    // chi profile along the axis, one row of values per subdomain
    std::vector<std::vector<double>> profile(static_cast<std::size_t>(J), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int j = 0; j < J; ++j) {
        for (int k = lo[static_cast<std::size_t>(j)]; k <= hi[static_cast<std::size_t>(j)]; ++k)
            profile[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = 1.0;
    }
    for (int j = 0; j + 1 < J; ++j) {
        const int s = lo[static_cast<std::size_t>(j) + 1];  // first shared line
        const int e = hi[static_cast<std::size_t>(j)];      // last shared line
        const double len = static_cast<double>(e - s);
        for (int k = s; k <= e; ++k) {
            const double t = (len == 0) ? 1.0 : static_cast<double>(k - s) / len;
            profile[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = 1.0 - t;
            profile[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(k)] = t;
        }
    }

    for (int j = 0; j < J; ++j) {
        dec.slab_ranges.emplace_back(lo[static_cast<std::size_t>(j)], hi[static_cast<std::size_t>(j)]);
        dec.subdomains.push_back(detail::slab_indices(dec.shape, axis, lo[static_cast<std::size_t>(j)], hi[static_cast<std::size_t>(j)]));

        std::vector<std::size_t> gamma;
        const bool left_inside = lo[static_cast<std::size_t>(j)] > 0;     // the axis-neighbor exists outside
        const bool right_inside = hi[static_cast<std::size_t>(j)] < n - 1;
        if (left_inside)
            for (std::size_t i : detail::slab_indices(dec.shape, axis, lo[static_cast<std::size_t>(j)], lo[static_cast<std::size_t>(j)]))
                gamma.push_back(i);
        if (right_inside)
            for (std::size_t i : detail::slab_indices(dec.shape, axis, hi[static_cast<std::size_t>(j)], hi[static_cast<std::size_t>(j)]))
                gamma.push_back(i);
        std::sort(gamma.begin(), gamma.end());
        dec.boundaries.push_back(std::move(gamma));

        Signal chi(dec.shape);
        const std::size_t stride = dec.shape.stride(axis);
        const std::size_t n_axis = static_cast<std::size_t>(n);
        const std::size_t block = stride * n_axis;
        for (std::size_t o = 0; o < dec.shape.size() / block; ++o)
            for (std::size_t k = 0; k < n_axis; ++k)
                for (std::size_t t = 0; t < stride; ++t)
                    chi[o * block + k * stride + t] = profile[static_cast<std::size_t>(j)][k];
        dec.weights.push_back(std::move(chi));
    }
    dec.finalize();
    return dec;
}

/* Orthogonal projection onto V_j: zero everything outside Omega_j. */
inline Signal project_onto_subspace(const Signal& u, int j, const Decomposition& dec) {
    if (u.shape() != dec.shape) throw std::invalid_argument("project_onto_subspace: shape mismatch");
    if (j < 0 || j >= dec.subdomain_count()) throw std::invalid_argument("project_onto_subspace: bad index");
    Signal out(u.shape());
    for (std::size_t i : dec.subdomains[static_cast<std::size_t>(j)]) out[i] = u[i];
    return out;
}

}  // namespace tvdd
