#pragma once

#include <optional>

#include "tvdd/grid.hpp"

namespace tvdd {

/* Controls the semi-implicit dual iteration used to project onto
 * alpha K, K = { div p : |p_i| <= 1 at every grid point }. */
struct ProjectionConfig {
    std::optional<double> tau;  // step size; default 1/(4d), the sufficient bound
    long max_iters = 2000;
    double tol = 1e-6;  // sup-norm of successive dual iterates
};

struct ProjectionDiagnostics {
    long iterations = 0;
    double last_increment = 0.0;
    bool converged = true;
};

struct ProjectionResult {
    Signal value;
    ProjectionDiagnostics diag;
};

/* Scratch buffers so solver hot loops do not reallocate per call. */
struct ProjectionWorkspace {
    Signal w;
    DualField grad;

    void ensure(const GridShape& shape) {
        if (w.shape() != shape) {
            w = Signal(shape);
            grad = DualField(shape);
        }
    }
};

inline double resolve_tau(const ProjectionConfig& cfg, int d) {
    const double bound = 1.0 / (4.0 * d);
    if (!cfg.tau) return bound;
    if (*cfg.tau <= 0 || *cfg.tau > bound)
        throw std::invalid_argument("ProjectionConfig: tau must lie in (0, 1/(4d)]");
    return *cfg.tau;
}

/* Projection of g onto alpha K by the semi-implicit dual update
 *
 *   p_i <- (p_i + tau (grad(div p - g/alpha))_i) / (1 + tau |(grad(div p - g/alpha))_i|)
 *
 * starting from the supplied dual field (zero for the plain overload).
 * The iterate alpha div p converges to the projection; every p stays
 * pointwise inside the unit ball. Non-convergence within max_iters is
 * reported through the diagnostics, not thrown: callers in outer
 * solver loops continue with the best-effort value. */
inline ProjectionResult project_onto_alpha_k(const Signal& g, double alpha,
                                             const ProjectionConfig& cfg, DualField& p,
                                             ProjectionWorkspace& ws) {
    if (alpha <= 0) throw std::invalid_argument("project_onto_alpha_k: alpha must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("project_onto_alpha_k: max_iters must be >= 1");
    if (cfg.tol < 0) throw std::invalid_argument("project_onto_alpha_k: tol must be nonnegative");
    const GridShape& shape = g.shape();
    if (p.shape() != shape) throw std::invalid_argument("project_onto_alpha_k: dual shape mismatch");
    const int d = shape.ndim();
    const std::size_t n = shape.size();
    const double tau = resolve_tau(cfg, d);

    ws.ensure(shape);
    Signal goa = g;
    goa *= 1.0 / alpha;

    ProjectionDiagnostics diag;
    diag.converged = false;
    for (long it = 1; it <= cfg.max_iters; ++it) {
        divergence_into(p, ws.w);
        ws.w -= goa;
        gradient_into(ws.w, ws.grad);

        double sup = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double gn2 = 0;
            for (int j = 0; j < d; ++j) {
                const double gj = ws.grad.component(j)[i];
                gn2 += gj * gj;
            }
            const double denom = 1.0 + tau * std::sqrt(gn2);
            for (int j = 0; j < d; ++j) {
                auto& pc = p.component(j);
                const double pn = (pc[i] + tau * ws.grad.component(j)[i]) / denom;
                const double step = std::abs(pn - pc[i]);
                if (step > sup) sup = step;
                pc[i] = pn;
            }
            assert(p.point_norm(i) <= 1.0 + 1e-12);
        }
        diag.iterations = it;
        diag.last_increment = sup;
        if (sup <= cfg.tol) {
            diag.converged = true;
            break;
        }
    }

    ProjectionResult out{Signal(shape), diag};
    divergence_into(p, out.value);
    out.value *= alpha;
    return out;
}

inline ProjectionResult project_onto_alpha_k(const Signal& g, double alpha,
                                             const ProjectionConfig& cfg = {}) {
    DualField p(g.shape());
    ProjectionWorkspace ws;
    return project_onto_alpha_k(g, alpha, cfg, p, ws);
}

/* Minimizer of ||u - g||^2 + 2 alpha TV(u), computed as g minus the
 * projection of g onto alpha K. */
inline ProjectionResult tv_denoise(const Signal& g, double alpha, const ProjectionConfig& cfg,
                                   DualField& p, ProjectionWorkspace& ws) {
    ProjectionResult r = project_onto_alpha_k(g, alpha, cfg, p, ws);
    Signal v = g;
    v -= r.value;
    r.value = std::move(v);
    return r;
}

inline ProjectionResult tv_denoise(const Signal& g, double alpha, const ProjectionConfig& cfg = {}) {
    DualField p(g.shape());
    ProjectionWorkspace ws;
    return tv_denoise(g, alpha, cfg, p, ws);
}

}  // namespace tvdd
