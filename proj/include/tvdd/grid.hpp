#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvdd {

using DataVector = std::vector<double>;

/* Extents N_1 x ... x N_d of the discrete grid, row-major layout.
 * Axis j of the array corresponds to gradient component j everywhere
 * in this library; grid spacing is unit. */
class GridShape {
  public:
    GridShape() = default;

    explicit GridShape(std::vector<int> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw std::invalid_argument("GridShape: need at least one axis");
        total_ = 1;
        for (int n : dims_) {
            if (n < 1) throw std::invalid_argument("GridShape: every extent must be >= 1");
            total_ *= static_cast<std::size_t>(n);
        }
        strides_.assign(dims_.size(), 1);
        for (int j = static_cast<int>(dims_.size()) - 2; j >= 0; --j)
            strides_[j] = strides_[j + 1] * static_cast<std::size_t>(dims_[j + 1]);
    }

    int ndim() const { return static_cast<int>(dims_.size()); }
    int dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
    std::size_t size() const { return total_; }

    std::size_t flat_index(const std::vector<int>& coord) const {
        assert(coord.size() == dims_.size());
        std::size_t i = 0;
        for (int j = 0; j < ndim(); ++j) {
            assert(coord[j] >= 0 && coord[j] < dim(j));
            i += static_cast<std::size_t>(coord[j]) * stride(j);
        }
        return i;
    }

    std::vector<int> coords(std::size_t flat) const {
        std::vector<int> c(dims_.size());
        for (int j = 0; j < ndim(); ++j) {
            c[j] = static_cast<int>((flat / stride(j)) % static_cast<std::size_t>(dim(j)));
        }
        return c;
    }

    friend bool operator==(const GridShape& a, const GridShape& b) { return a.dims_ == b.dims_; }
    friend bool operator!=(const GridShape& a, const GridShape& b) { return !(a == b); }

  private:
    std::vector<int> dims_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

/* Real-valued scalar field over the grid. Plain value type; operations
 * never mutate their inputs unless they take the argument by
 * non-const reference explicitly. */
class Signal {
  public:
    Signal() = default;
    explicit Signal(GridShape shape) : shape_(std::move(shape)), v_(shape_.size(), 0.0) {}
    Signal(GridShape shape, std::vector<double> values) : shape_(std::move(shape)), v_(std::move(values)) {
        if (v_.size() != shape_.size())
            throw std::invalid_argument("Signal: value count does not match the shape");
    }

    const GridShape& shape() const { return shape_; }
    std::size_t size() const { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    Signal& operator+=(const Signal& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Signal& operator-=(const Signal& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Signal& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }

    friend Signal operator+(Signal a, const Signal& b) { a += b; return a; }
    friend Signal operator-(Signal a, const Signal& b) { a -= b; return a; }
    friend Signal operator*(double s, Signal a) { a *= s; return a; }

  private:
    void check_same_shape(const Signal& o) const {
        if (shape_ != o.shape_) throw std::invalid_argument("Signal: shape mismatch");
    }

    GridShape shape_;
    std::vector<double> v_;
};

/* One d-vector per grid point, stored as d scalar component fields.
 * Invariant: component j vanishes on the last slice of axis j, so that
 * the divergence below is the exact negative adjoint of the gradient. */
class DualField {
  public:
    DualField() = default;
    explicit DualField(GridShape shape)
        : shape_(std::move(shape)),
          comp_(static_cast<std::size_t>(shape_.ndim()), std::vector<double>(shape_.size(), 0.0)) {}

    const GridShape& shape() const { return shape_; }
    int ndim() const { return shape_.ndim(); }
    std::vector<double>& component(int j) { return comp_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& component(int j) const { return comp_[static_cast<std::size_t>(j)]; }

    void set_zero() {
        for (auto& c : comp_) std::fill(c.begin(), c.end(), 0.0);
    }

    /* Euclidean norm of the d-vector attached to grid point i. */
    double point_norm(std::size_t i) const {
        double s = 0;
        for (const auto& c : comp_) s += c[i] * c[i];
        return std::sqrt(s);
    }

    void check_components() const {
        for (const auto& c : comp_)
            if (c.size() != shape_.size())
                throw std::invalid_argument("DualField: component size does not match the shape");
    }

  private:
    GridShape shape_;
    std::vector<std::vector<double>> comp_;
};

inline double dot(const Signal& a, const Signal& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("dot: shape mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const DualField& p, const DualField& q) {
    if (p.shape() != q.shape()) throw std::invalid_argument("dot: shape mismatch");
    double s = 0;
    for (int j = 0; j < p.ndim(); ++j) {
        const auto& pc = p.component(j);
        const auto& qc = q.component(j);
        for (std::size_t i = 0; i < pc.size(); ++i) s += pc[i] * qc[i];
    }
    return s;
}

inline double norm2(const Signal& u) { return std::sqrt(dot(u, u)); }

inline double sup_norm(const Signal& u) {
    double m = 0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]));
    return m;
}

inline double norm2(const DataVector& y) {
    double s = 0;
    for (double x : y) s += x * x;
    return std::sqrt(s);
}

/* Forward differences along every axis; component j is zero on the
 * last slice of axis j. Output buffer variant for hot loops. */
inline void gradient_into(const Signal& u, DualField& out) {
    const GridShape& sh = u.shape();
    if (out.shape() != sh) throw std::invalid_argument("gradient_into: shape mismatch");
    const auto& v = u.values();
    for (int j = 0; j < sh.ndim(); ++j) {
        const std::size_t stride = sh.stride(j);
        const std::size_t n_axis = static_cast<std::size_t>(sh.dim(j));
        const std::size_t block = stride * n_axis;
        const std::size_t outer = sh.size() / block;
        auto& comp = out.component(j);
        for (std::size_t o = 0; o < outer; ++o) {
            const std::size_t base = o * block;
            for (std::size_t k = 0; k + 1 < n_axis; ++k) {
                const std::size_t row = base + k * stride;
                for (std::size_t t = 0; t < stride; ++t)
                    comp[row + t] = v[row + stride + t] - v[row + t];
            }
            const std::size_t last = base + (n_axis - 1) * stride;
            for (std::size_t t = 0; t < stride; ++t) comp[last + t] = 0.0;
        }
    }
}

inline DualField gradient(const Signal& u) {
    DualField out(u.shape());
    gradient_into(u, out);
    return out;
}

/* div = -grad^*: the unique map with <grad u, p> = -<u, div p> for all
 * u, p. Component j of p is ignored on the last slice of axis j (the
 * gradient never produces anything there), which keeps the identity
 * exact even for fields that violate the DualField invariant. */
inline void divergence_into(const DualField& p, Signal& out) {
    const GridShape& sh = p.shape();
    p.check_components();
    if (out.shape() != sh) throw std::invalid_argument("divergence_into: shape mismatch");
    auto& v = out.values();
    std::fill(v.begin(), v.end(), 0.0);
    for (int j = 0; j < sh.ndim(); ++j) {
        const std::size_t stride = sh.stride(j);
        const std::size_t n_axis = static_cast<std::size_t>(sh.dim(j));
        const std::size_t block = stride * n_axis;
        const std::size_t outer = sh.size() / block;
        const auto& comp = p.component(j);
        for (std::size_t o = 0; o < outer; ++o) {
            const std::size_t base = o * block;
            for (std::size_t k = 0; k < n_axis; ++k) {
                const std::size_t row = base + k * stride;
                for (std::size_t t = 0; t < stride; ++t) {
                    double s = 0;
                    if (k + 1 < n_axis) s += comp[row + t];
                    if (k > 0) s -= comp[row - stride + t];
                    v[row + t] += s;
                }
            }
        }
    }
}

inline Signal divergence(const DualField& p) {
    Signal out(p.shape());
    divergence_into(p, out);
    return out;
}

/* Sum over grid points of the Euclidean norm of the gradient vector. */
inline double total_variation(const Signal& u) {
    const GridShape& sh = u.shape();
    const int d = sh.ndim();
    const auto& v = u.values();
    double tv = 0;
    std::vector<std::size_t> stride(static_cast<std::size_t>(d));
    std::vector<std::size_t> extent(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        stride[static_cast<std::size_t>(j)] = sh.stride(j);
        extent[static_cast<std::size_t>(j)] = static_cast<std::size_t>(sh.dim(j));
    }
    for (std::size_t i = 0; i < sh.size(); ++i) {
        double s = 0;
        for (int j = 0; j < d; ++j) {
            const std::size_t st = stride[static_cast<std::size_t>(j)];
            const std::size_t k = (i / st) % extent[static_cast<std::size_t>(j)];
            if (k + 1 < extent[static_cast<std::size_t>(j)]) {
                const double dj = v[i + st] - v[i];
                s += dj * dj;
            }
        }
        tv += std::sqrt(s);
    }
    return tv;
}

/* ||T u - g||_2^2 + 2 alpha TV(u). Works with any operator type
 * exposing apply(Signal) -> DataVector. */
template <class Op>
double energy(const Signal& u, const Op& T, const DataVector& g, double alpha) {
    if (alpha <= 0) throw std::invalid_argument("energy: alpha must be positive");
    DataVector r = T.apply(u);
    if (r.size() != g.size())
        throw std::invalid_argument("energy: data vector does not match the operator range");
    double fid = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double e = r[k] - g[k];
        fid += e * e;
    }
    return fid + 2.0 * alpha * total_variation(u);
}

}  // namespace tvdd
