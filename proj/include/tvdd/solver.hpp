#pragma once

#include <limits>
#include <functional>
#include <thread>

#include "tvdd/decomposition.hpp"
#include "tvdd/grid.hpp"
#include "tvdd/operators.hpp"
#include "tvdd/projection.hpp"
#include "tvdd/random.hpp"

namespace tvdd {

struct SolverConfig {
    int inner_l = 1;  // inner surrogate steps for subdomains 1,3,... (0-based even)
    int inner_m = 1;  // inner surrogate steps for subdomains 2,4,... (0-based odd)
    int outer_iters = 200;
    double outer_tol = 1e-6;      // on ||u^(n+1) - u^(n)||_2
    int multiplier_iters = 60;    // fixed-point updates for the constraint multiplier
    double multiplier_tol = 1e-9; // sup-norm of the constrained residual
    ProjectionConfig projection{std::nullopt, 2000, 1e-7};  // tol acts as the floor
    double projection_tol_start = 1e-4;  // loose early projections, tightened geometrically
    double projection_tol_decay = 0.85;
    bool use_partition_correction = true;  // overlapping scheme only
    int threads = 1;  // parallel scheme fan-out; 0 = hardware concurrency
};

struct TraceRow {
    int iter;
    double energy;
    double increment_norm;
    double max_component_norm;
    double projection_residual;
};

struct SolverDiagnostics {
    bool projections_converged = true;
    bool multipliers_converged = true;
    double worst_projection_residual = 0.0;
    double worst_multiplier_residual = 0.0;
    std::vector<double> multiplier_residuals;  // per outer iteration
};

struct SolverState {
    Signal u;
    std::vector<Signal> components;
    std::vector<TraceRow> energy_trace;
    SolverDiagnostics diagnostics;
    int outer_iterations = 0;
    bool reached_tol = false;
};

/* Lagrange multiplier enforcing the support and trace constraints of a
 * subdomain solve; supported only on the constrained coordinate set. */
struct MultiplierField {
    Signal values;
};

/* J^s_j(u_j + u_other, a) = J(u_j + u_other) + ||u_j - a||^2 - ||T(u_j - a)||^2.
 * Majorizes J(u_j + u_other) whenever ||T|| < 1, with equality at u_j = a. */
inline double surrogate_energy(const Signal& u_j, const Signal& u_other, const Signal& a,
                               const MeasurementOperator& T, const DataVector& g, double alpha) {
    Signal diff = u_j;
    diff -= a;
    const DataVector Tdiff = T.apply(diff);
    double tn = 0;
    for (double x : Tdiff) tn += x * x;
    return energy(u_j + u_other, T, g, alpha) + dot(diff, diff) - tn;
}

struct InnerStepResult {
    Signal u_j;
    double multiplier_residual = 0.0;
    int multiplier_iterations = 0;
    bool multiplier_converged = true;
    double projection_residual = 0.0;
    bool projection_converged = true;
};

struct InnerWarmState {
    DualField dual;
    MultiplierField eta;
    ProjectionWorkspace ws;
    bool ready = false;

    void ensure(const GridShape& shape) {
        if (!ready || dual.shape() != shape) {
            dual = DualField(shape);
            eta.values = Signal(shape);
            ready = true;
        }
    }
};

/* One exact minimization of the surrogate over
 *   { u_j supported in Omega_j, u_j = 0 on Gamma_j }.
 *
 * With z = u_j_prev + pi_{V_j} T*(g - T u_other - T u_j_prev) and C the
 * constrained coordinate set, the minimizer is
 *   u_j = [I - pi_{alphaK}](z + u_other - eta) - u_other
 * for the multiplier eta supported on C that zeroes the result there.
 * eta is found by the fixed point
 *   eta <- eta + restrict_C([I - pi_{alphaK}](z + u_other - eta) - u_other),
 * stopped on the restricted residual; the output is hard-zeroed on C so
 * feasibility holds regardless of how far the fixed point got. */
inline InnerStepResult surrogate_inner_step(const Signal& u_j_prev, const Signal& u_other, int j,
                                            const Decomposition& dec, const MeasurementOperator& T,
                                            const DataVector& g, double alpha,
                                            const ProjectionConfig& proj_cfg, int multiplier_iters,
                                            double multiplier_tol, InnerWarmState& warm) {
    const GridShape& shape = dec.shape;
    if (u_j_prev.shape() != shape || u_other.shape() != shape)
        throw std::invalid_argument("surrogate_inner_step: shape mismatch");
    if (j < 0 || j >= dec.subdomain_count())
        throw std::invalid_argument("surrogate_inner_step: bad subdomain index");
    warm.ensure(shape);

    InnerStepResult out;
    if (dec.free_count(j) == 0) {
        out.u_j = Signal(shape);
        return out;
    }
    const auto& constrained = dec.constrained[static_cast<std::size_t>(j)];

    DataVector resid = T.apply(u_other);
    {
        const DataVector Tprev = T.apply(u_j_prev);
        for (std::size_t k = 0; k < resid.size(); ++k) resid[k] = g[k] - resid[k] - Tprev[k];
    }
    const Signal back = T.adjoint(resid);
    Signal z = u_j_prev;
    for (std::size_t i : dec.subdomains[static_cast<std::size_t>(j)]) z[i] += back[i];

    Signal v = z;
    v += u_other;

    Signal& eta = warm.eta.values;
    Signal arg(shape);
    Signal cand(shape);
    out.multiplier_converged = false;
    int updates = 0;
    while (true) {
        arg = v;
        arg -= eta;
        const ProjectionResult prox = tv_denoise(arg, alpha, proj_cfg, warm.dual, warm.ws);
        out.projection_residual = std::max(out.projection_residual, prox.diag.last_increment);
        out.projection_converged = out.projection_converged && prox.diag.converged;
        cand = prox.value;
        cand -= u_other;

        double r = 0;
        for (std::size_t i : constrained) r = std::max(r, std::abs(cand[i]));
        out.multiplier_residual = r;
        out.multiplier_iterations = updates;
        if (r <= multiplier_tol) {
            out.multiplier_converged = true;
            break;
        }
        if (updates >= multiplier_iters) break;
        for (std::size_t i : constrained) eta[i] += cand[i];
        ++updates;
    }
    for (std::size_t i : constrained) cand[i] = 0.0;
    out.u_j = std::move(cand);
    return out;
}

inline InnerStepResult surrogate_inner_step(const Signal& u_j_prev, const Signal& u_other, int j,
                                            const Decomposition& dec, const MeasurementOperator& T,
                                            const DataVector& g, double alpha,
                                            const SolverConfig& cfg = {}) {
    InnerWarmState warm;
    return surrogate_inner_step(u_j_prev, u_other, j, dec, T, g, alpha, cfg.projection,
                                cfg.multiplier_iters, cfg.multiplier_tol, warm);
}

enum class Scheme {
    SequentialNonoverlapping,
    ParallelNonoverlapping,
    SequentialOverlapping,
};

using IterationCallback = std::function<void(int, const Signal&)>;

namespace detail {

inline Signal sum_except(const std::vector<Signal>& comps, int skip, const GridShape& shape) {
    Signal s(shape);
    for (int k = 0; k < static_cast<int>(comps.size()); ++k)
        if (k != skip) s += comps[static_cast<std::size_t>(k)];
    return s;
}

inline Signal sum_all(const std::vector<Signal>& comps, const GridShape& shape) {
    Signal s(shape);
    for (const Signal& c : comps) s += c;
    return s;
}

}  // namespace detail

/* Shared engine for the three outer algorithms. They differ only in
 * which neighbor state each subdomain solve sees, how the new outer
 * iterate is merged, and how it is re-split into components:
 *
 *  - sequential nonoverlapping: Gauss-Seidel sweep, u = sum of
 *    components (which are the restrictions of u, supports disjoint);
 *  - parallel nonoverlapping: Jacobi sweep against the previous outer
 *    iterate, merge u = (sum_j u_j + (J-1) u_prev)/J, re-split by
 *    orthogonal projection onto the V_j;
 *  - sequential overlapping: Gauss-Seidel with trace constraints
 *    u_j = 0 on Gamma_j, re-split by the partition of unity
 *    (the correction that keeps local components bounded; switchable
 *    off for the ablation).
 */
inline SolverState run_scheme(Scheme scheme, const MeasurementOperator& T, const DataVector& g,
                              double alpha, const Decomposition& dec, const SolverConfig& cfg,
                              const IterationCallback& on_iterate = {}) {
    const GridShape& shape = dec.shape;
    if (T.domain_shape() != shape) throw std::invalid_argument("solver: operator domain mismatch");
    if (static_cast<int>(g.size()) != T.range_dim())
        throw std::invalid_argument("solver: data vector does not match the operator range");
    if (alpha <= 0) throw std::invalid_argument("solver: alpha must be positive");
    if (cfg.inner_l < 1 || cfg.inner_m < 1 || cfg.outer_iters < 1)
        throw std::invalid_argument("solver: inner and outer iteration counts must be >= 1");
    const bool wants_overlap = (scheme == Scheme::SequentialOverlapping);
    if (dec.overlapping != wants_overlap)
        throw std::invalid_argument(wants_overlap
                                        ? "solver: overlapping scheme needs an overlapping decomposition"
                                        : "solver: nonoverlapping scheme needs a nonoverlapping decomposition");
    if (!check_kernel_condition(T))
        throw std::invalid_argument("solver: constant signals lie in the kernel of the operator");

    const int J = dec.subdomain_count();
    SolverState st;
    st.u = Signal(shape);
    st.components.assign(static_cast<std::size_t>(J), Signal(shape));
    std::vector<InnerWarmState> warm(static_cast<std::size_t>(J));

    st.energy_trace.push_back({0, energy(st.u, T, g, alpha), 0.0, 0.0, 0.0});

    int thread_count = 1;
    if (scheme == Scheme::ParallelNonoverlapping) {
        thread_count = cfg.threads == 0
                           ? std::max(1u, std::thread::hardware_concurrency())
                           : std::max(1, cfg.threads);
        thread_count = std::min(thread_count, J);
    }

    for (int n = 1; n <= cfg.outer_iters; ++n) {
        ProjectionConfig pcfg = cfg.projection;
        pcfg.tol = std::max(cfg.projection.tol,
                            cfg.projection_tol_start * std::pow(cfg.projection_tol_decay, n - 1));

        double iter_proj_residual = 0.0;
        double iter_mult_residual = 0.0;
        bool iter_proj_ok = true;
        bool iter_mult_ok = true;
        const auto absorb = [&](const InnerStepResult& r) {
            iter_proj_residual = std::max(iter_proj_residual, r.projection_residual);
            iter_mult_residual = std::max(iter_mult_residual, r.multiplier_residual);
            iter_proj_ok = iter_proj_ok && r.projection_converged;
            iter_mult_ok = iter_mult_ok && r.multiplier_converged;
        };

        Signal u_new(shape);
        if (scheme == Scheme::ParallelNonoverlapping) {
            const std::vector<Signal> snapshot = st.components;
            std::vector<Signal> updated(static_cast<std::size_t>(J), Signal(shape));
            std::vector<InnerStepResult> results(static_cast<std::size_t>(J));
            const auto solve_range = [&](int begin, int end) {
                for (int j = begin; j < end; ++j) {
                    const Signal u_other = detail::sum_except(snapshot, j, shape);
                    Signal u_j = snapshot[static_cast<std::size_t>(j)];
                    const int steps = (j % 2 == 0) ? cfg.inner_l : cfg.inner_m;
                    InnerStepResult last;
                    for (int l = 0; l < steps; ++l) {
                        last = surrogate_inner_step(u_j, u_other, j, dec, T, g, alpha, pcfg,
                                                    cfg.multiplier_iters, cfg.multiplier_tol,
                                                    warm[static_cast<std::size_t>(j)]);
                        u_j = last.u_j;
                    }
                    updated[static_cast<std::size_t>(j)] = std::move(u_j);
                    results[static_cast<std::size_t>(j)] = std::move(last);
                }
            };
            if (thread_count == 1) {
                solve_range(0, J);
            } else {
                std::vector<std::thread> pool;
                const int chunk = (J + thread_count - 1) / thread_count;
                for (int t = 0; t < thread_count; ++t) {
                    const int begin = t * chunk;
                    const int end = std::min(J, begin + chunk);
                    if (begin < end) pool.emplace_back(solve_range, begin, end);
                }
                for (auto& th : pool) th.join();
            }
            for (const auto& r : results) absorb(r);
            u_new = detail::sum_all(updated, shape);
            u_new += static_cast<double>(J - 1) * st.u;
            u_new *= 1.0 / static_cast<double>(J);
            for (int j = 0; j < J; ++j)
                st.components[static_cast<std::size_t>(j)] = project_onto_subspace(u_new, j, dec);
        } else {
            for (int j = 0; j < J; ++j) {
                const Signal u_other = detail::sum_except(st.components, j, shape);
                const int steps = (j % 2 == 0) ? cfg.inner_l : cfg.inner_m;
                for (int l = 0; l < steps; ++l) {
                    InnerStepResult r = surrogate_inner_step(
                        st.components[static_cast<std::size_t>(j)], u_other, j, dec, T, g, alpha,
                        pcfg, cfg.multiplier_iters, cfg.multiplier_tol,
                        warm[static_cast<std::size_t>(j)]);
                    st.components[static_cast<std::size_t>(j)] = std::move(r.u_j);
                    absorb(r);
                }
            }
            u_new = detail::sum_all(st.components, shape);
            if (scheme == Scheme::SequentialOverlapping && cfg.use_partition_correction) {
                for (int j = 0; j < J; ++j) {
                    Signal& c = st.components[static_cast<std::size_t>(j)];
                    const Signal& chi = dec.weights[static_cast<std::size_t>(j)];
                    for (std::size_t i = 0; i < c.size(); ++i) c[i] = chi[i] * u_new[i];
                }
            }
        }

        Signal delta = u_new;
        delta -= st.u;
        const double increment = norm2(delta);
        double max_comp = 0.0;
        for (const Signal& c : st.components) max_comp = std::max(max_comp, norm2(c));

        st.u = std::move(u_new);
        st.outer_iterations = n;
        st.energy_trace.push_back({n, energy(st.u, T, g, alpha), increment, max_comp, iter_proj_residual});
        st.diagnostics.multiplier_residuals.push_back(iter_mult_residual);
        st.diagnostics.worst_projection_residual =
            std::max(st.diagnostics.worst_projection_residual, iter_proj_residual);
        st.diagnostics.worst_multiplier_residual =
            std::max(st.diagnostics.worst_multiplier_residual, iter_mult_residual);
        st.diagnostics.projections_converged = st.diagnostics.projections_converged && iter_proj_ok;
        st.diagnostics.multipliers_converged = st.diagnostics.multipliers_converged && iter_mult_ok;
        if (on_iterate) on_iterate(n, st.u);

        if (increment <= cfg.outer_tol) {
            st.reached_tol = true;
            break;
        }
    }
    return st;
}

inline SolverState solve_sequential_nonoverlapping(const MeasurementOperator& T, const DataVector& g,
                                                   double alpha, const Decomposition& dec,
                                                   const SolverConfig& cfg,
                                                   const IterationCallback& on_iterate = {}) {
    return run_scheme(Scheme::SequentialNonoverlapping, T, g, alpha, dec, cfg, on_iterate);
}

inline SolverState solve_parallel_nonoverlapping(const MeasurementOperator& T, const DataVector& g,
                                                 double alpha, const Decomposition& dec,
                                                 const SolverConfig& cfg,
                                                 const IterationCallback& on_iterate = {}) {
    return run_scheme(Scheme::ParallelNonoverlapping, T, g, alpha, dec, cfg, on_iterate);
}

inline SolverState solve_sequential_overlapping(const MeasurementOperator& T, const DataVector& g,
                                                double alpha, const Decomposition& dec,
                                                const SolverConfig& cfg,
                                                const IterationCallback& on_iterate = {}) {
    return run_scheme(Scheme::SequentialOverlapping, T, g, alpha, dec, cfg, on_iterate);
}

struct OracleResult {
    Signal u;
    bool converged = false;
    int iterations = 0;
};

/* Single-domain reference: the thresholded Landweber iteration
 * u <- tv_denoise(u + T*(g - T u), alpha), run to tight tolerance.
 * This is the J = 1 specialization of the surrogate scheme and serves
 * as the energy oracle for the decomposition algorithms. */
inline OracleResult oracle_minimize(const MeasurementOperator& T, const DataVector& g, double alpha,
                                    const SolverConfig& cfg) {
    const GridShape& shape = T.domain_shape();
    if (static_cast<int>(g.size()) != T.range_dim())
        throw std::invalid_argument("oracle_minimize: data vector does not match the operator range");
    OracleResult out;
    out.u = Signal(shape);
    DualField dual(shape);
    ProjectionWorkspace ws;
    for (int k = 1; k <= cfg.outer_iters; ++k) {
        DataVector r = T.apply(out.u);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] - r[i];
        Signal u_half = out.u;
        u_half += T.adjoint(r);
        ProjectionResult d = tv_denoise(u_half, alpha, cfg.projection, dual, ws);
        Signal delta = d.value;
        delta -= out.u;
        out.u = std::move(d.value);
        out.iterations = k;
        if (norm2(delta) <= cfg.outer_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

/* Largest one-sided descent rate (J(u) - J(u + eps v)) / eps over
 * random unit directions v and eps in {1e-3, 1e-2}. Near-minimizers
 * yield small values; a clearly positive value certifies a descent
 * direction. */
inline double check_optimality(const Signal& u, const MeasurementOperator& T, const DataVector& g,
                               double alpha, int trials, std::uint64_t seed = 0x51a7e5eedULL) {
    Rng rng(seed);
    const double e0 = energy(u, T, g, alpha);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        Signal v = rng.normal_signal(u.shape());
        const double nv = norm2(v);
        if (nv == 0) continue;
        v *= 1.0 / nv;
        for (const double eps : {1e-3, 1e-2}) {
            Signal w = u;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += eps * v[i];
            worst = std::max(worst, (e0 - energy(w, T, g, alpha)) / eps);
        }
    }
    return worst;
}

}  // namespace tvdd
