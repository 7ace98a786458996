#pragma once

#include <memory>
#include <set>

#include "tvdd/fft.hpp"
#include "tvdd/grid.hpp"
#include "tvdd/random.hpp"

namespace tvdd {

/* Linear measurement map T: H -> R^K with adjoint. Implementations are
 * immutable after construction; apply/adjoint are pure. */
class MeasurementOperator {
  public:
    virtual ~MeasurementOperator() = default;
    virtual const GridShape& domain_shape() const = 0;
    virtual int range_dim() const = 0;
    virtual DataVector apply(const Signal& u) const = 0;
    virtual Signal adjoint(const DataVector& y) const = 0;

  protected:
    void check_domain(const Signal& u) const {
        if (u.shape() != domain_shape())
            throw std::invalid_argument("MeasurementOperator: signal shape does not match the domain");
    }
    void check_range(const DataVector& y) const {
        if (static_cast<int>(y.size()) != range_dim())
            throw std::invalid_argument("MeasurementOperator: data vector does not match the range");
    }
};

/* Scaled restriction to an observed subset S of grid points:
 * apply(u) = c * u|_S, adjoint embeds back with zeros off S. */
class MaskOperator : public MeasurementOperator {
  public:
    MaskOperator(GridShape shape, std::vector<std::size_t> sample_set, double scale = 1.0)
        : shape_(std::move(shape)), set_(std::move(sample_set)), scale_(scale) {
        std::sort(set_.begin(), set_.end());
        if (std::adjacent_find(set_.begin(), set_.end()) != set_.end())
            throw std::invalid_argument("MaskOperator: duplicate sample indices");
        if (!set_.empty() && set_.back() >= shape_.size())
            throw std::invalid_argument("MaskOperator: sample index out of range");
        if (scale_ <= 0) throw std::invalid_argument("MaskOperator: scale must be positive");
    }

    static MaskOperator full(GridShape shape, double scale = 1.0) {
        std::vector<std::size_t> all(shape.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return MaskOperator(std::move(shape), std::move(all), scale);
    }

    const GridShape& domain_shape() const override { return shape_; }
    int range_dim() const override { return static_cast<int>(set_.size()); }
    const std::vector<std::size_t>& sample_set() const { return set_; }
    double scale() const { return scale_; }

    DataVector apply(const Signal& u) const override {
        check_domain(u);
        DataVector y(set_.size());
        for (std::size_t k = 0; k < set_.size(); ++k) y[k] = scale_ * u[set_[k]];
        return y;
    }

    Signal adjoint(const DataVector& y) const override {
        check_range(y);
        Signal u(shape_);
        for (std::size_t k = 0; k < set_.size(); ++k) u[set_[k]] = scale_ * y[k];
        return u;
    }

  private:
    GridShape shape_;
    std::vector<std::size_t> set_;
    double scale_;
};

/* Samples the unitary DFT of a real signal on a fixed frequency set,
 * reported as stacked real parts followed by imaginary parts, so the
 * whole pipeline stays real-valued. The adjoint zero-fills the
 * spectrum and takes the real part of the inverse transform (valid
 * because the primal space is real; no conjugate symmetry is imposed
 * on the frequency set itself). */
class PartialFourierOperator : public MeasurementOperator {
  public:
    PartialFourierOperator(GridShape shape, std::vector<std::size_t> frequency_set, double scale = 1.0)
        : shape_(std::move(shape)), set_(std::move(frequency_set)), scale_(scale) {
        std::sort(set_.begin(), set_.end());
        if (std::adjacent_find(set_.begin(), set_.end()) != set_.end())
            throw std::invalid_argument("PartialFourierOperator: duplicate frequencies");
        if (set_.empty()) throw std::invalid_argument("PartialFourierOperator: empty frequency set");
        if (set_.back() >= shape_.size())
            throw std::invalid_argument("PartialFourierOperator: frequency index out of range");
        if (scale_ <= 0) throw std::invalid_argument("PartialFourierOperator: scale must be positive");
    }

    static PartialFourierOperator full(GridShape shape, double scale = 1.0) {
        std::vector<std::size_t> all(shape.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return PartialFourierOperator(std::move(shape), std::move(all), scale);
    }

    const GridShape& domain_shape() const override { return shape_; }
    int range_dim() const override { return 2 * static_cast<int>(set_.size()); }
    const std::vector<std::size_t>& frequency_set() const { return set_; }
    double scale() const { return scale_; }

    DataVector apply(const Signal& u) const override {
        check_domain(u);
        const ComplexVector spec = unitary_dft(u);
        const std::size_t m = set_.size();
        DataVector y(2 * m);
        for (std::size_t k = 0; k < m; ++k) {
            y[k] = scale_ * spec[set_[k]].real();
            y[m + k] = scale_ * spec[set_[k]].imag();
        }
        return y;
    }

    Signal adjoint(const DataVector& y) const override {
        check_range(y);
        const std::size_t m = set_.size();
        ComplexVector spec(shape_.size(), {0.0, 0.0});
        for (std::size_t k = 0; k < m; ++k) spec[set_[k]] = {scale_ * y[k], scale_ * y[m + k]};
        return unitary_idft_real(std::move(spec), shape_);
    }

  private:
    GridShape shape_;
    std::vector<std::size_t> set_;
    double scale_;
};

/* Generic wrapper multiplying another operator by a constant. */
class ScaledOperator : public MeasurementOperator {
  public:
    ScaledOperator(std::shared_ptr<const MeasurementOperator> inner, double factor)
        : inner_(std::move(inner)), factor_(factor) {
        if (!inner_) throw std::invalid_argument("ScaledOperator: null operator");
    }

    const GridShape& domain_shape() const override { return inner_->domain_shape(); }
    int range_dim() const override { return inner_->range_dim(); }
    double factor() const { return factor_; }

    DataVector apply(const Signal& u) const override {
        DataVector y = inner_->apply(u);
        for (double& x : y) x *= factor_;
        return y;
    }

    Signal adjoint(const DataVector& y) const override {
        Signal u = inner_->adjoint(y);
        u *= factor_;
        return u;
    }

  private:
    std::shared_ptr<const MeasurementOperator> inner_;
    double factor_;
};

/* Power iteration on T*T; returns the square root of the final
 * Rayleigh quotient, an estimate of the largest singular value. */
inline double estimate_norm(const MeasurementOperator& T, int iters = 50) {
    if (iters < 10) throw std::invalid_argument("estimate_norm: need at least 10 iterations");
    Rng rng(0x9e3779b97f4a7c15ull);
    for (int attempt = 0; attempt < 3; ++attempt) {
        Signal u = rng.uniform_signal(T.domain_shape(), -1.0, 1.0);
        const double nu = norm2(u);
        if (nu == 0) continue;
        u *= 1.0 / nu;
        bool dead = false;
        for (int it = 0; it < iters; ++it) {
            Signal w = T.adjoint(T.apply(u));
            const double nw = norm2(w);
            if (nw < 1e-300) {
                dead = true;
                break;
            }
            w *= 1.0 / nw;
            u = std::move(w);
        }
        if (dead) continue;
        return norm2(T.apply(u));  // ||u|| = 1, so this is sqrt(<u, T*T u>)
    }
    return 0.0;
}

struct NormalizedProblem {
    std::shared_ptr<const MeasurementOperator> op;
    DataVector g;
    double alpha;
    double factor;  // the scale c applied to T and g (alpha picked up c^2)
};

/* Rescales (T, g, alpha) so the estimated operator norm becomes 0.9,
 * which the surrogate scheme requires (< 1). The minimizer is
 * unchanged: the objective is scaled by c^2. */
inline NormalizedProblem normalize_problem(std::shared_ptr<const MeasurementOperator> T,
                                           const DataVector& g, double alpha, int norm_iters = 50) {
    if (!T) throw std::invalid_argument("normalize_problem: null operator");
    if (static_cast<int>(g.size()) != T->range_dim())
        throw std::invalid_argument("normalize_problem: data vector does not match the range");
    const double nrm = estimate_norm(*T, norm_iters);
    if (nrm <= 1e-12) throw std::invalid_argument("normalize_problem: degenerate (zero) operator");
    const double c = 0.9 / nrm;
    NormalizedProblem out;
    out.op = std::make_shared<ScaledOperator>(std::move(T), c);
    out.g = g;
    for (double& x : out.g) x *= c;
    out.alpha = c * c * alpha;
    out.factor = c;
    return out;
}

/* The existence condition: constants must not be invisible to T. */
inline bool check_kernel_condition(const MeasurementOperator& T) {
    Signal ones(T.domain_shape());
    for (std::size_t i = 0; i < ones.size(); ++i) ones[i] = 1.0;
    return norm2(T.apply(ones)) > 1e-12 * norm2(ones);
}

/* Frequency pattern for the compressed-sensing experiment: the zero
 * frequency, a low-frequency block of `low_block` indices per axis
 * (split between the low positive and low negative ends of the DFT
 * index range), then uniformly random remaining frequencies from the
 * seeded generator until round(fraction * total) distinct entries. */
inline std::vector<std::size_t> make_frequency_set(const GridShape& shape, double fraction,
                                                   int low_block, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("make_frequency_set: fraction must lie in (0, 1]");
    if (low_block < 0) throw std::invalid_argument("make_frequency_set: low_block must be >= 0");
    const std::size_t n = shape.size();
    std::set<std::size_t> chosen;
    chosen.insert(0);

    const int d = shape.ndim();
    std::vector<std::vector<int>> axis_sets(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        const int nj = shape.dim(j);
        const int b = std::min(low_block, nj);
        const int pos = (b + 1) / 2;  // 0, 1, ..., pos-1
        const int neg = b / 2;        // nj-1, ..., nj-neg
        for (int k = 0; k < pos; ++k) axis_sets[static_cast<std::size_t>(j)].push_back(k);
        for (int k = 0; k < neg; ++k) axis_sets[static_cast<std::size_t>(j)].push_back(nj - 1 - k);
    }
    std::vector<int> coord(static_cast<std::size_t>(d), 0);
    std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
    bool done = axis_sets[0].empty();
    while (!done) {
        for (int j = 0; j < d; ++j) coord[static_cast<std::size_t>(j)] = axis_sets[static_cast<std::size_t>(j)][pick[static_cast<std::size_t>(j)]];
        chosen.insert(shape.flat_index(coord));
        int j = d - 1;
        for (; j >= 0; --j) {
            if (++pick[static_cast<std::size_t>(j)] < axis_sets[static_cast<std::size_t>(j)].size()) break;
            pick[static_cast<std::size_t>(j)] = 0;
        }
        done = (j < 0);
    }

    const std::size_t target =
        std::max<std::size_t>(chosen.size(), static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
    Rng rng(seed);
    while (chosen.size() < target) chosen.insert(static_cast<std::size_t>(rng.below(n)));
    return {chosen.begin(), chosen.end()};
}

}  // namespace tvdd
