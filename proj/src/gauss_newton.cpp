#include "contactkit/gauss_newton.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace contactkit {

namespace {

bool finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

NewtonResult gauss_newton(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Matrix(const Vec&)>& jacobian,
                          Vec seed, const NewtonConfig& cfg) {
    NewtonResult out;
    Vec z = std::move(seed);
    Vec R = residual(z);
    if (!finite(R)) throw EvaluationError("gauss_newton: non-finite residual at seed");
    double rn = norm2(R);

    int it = 0;
    while (it < cfg.max_iters && rn > cfg.residual_tol) {
        const Matrix J = jacobian(z);
        const Vec step = pseudo_inverse(J) * R;
        if (!finite(step)) break;

        double t = 1.0;
        Vec zc, Rc;
        double rc = rn;
        bool accepted = false;
        while (t >= cfg.min_damping) {
            zc = axpy(-t, step, z);
            Rc = residual(zc);
            rc = finite(Rc) ? norm2(Rc) : std::numeric_limits<double>::infinity();
            if (rc < rn) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++it;
        if (!accepted) break;

        const double moved = t * norm2(step);
        z = std::move(zc);
        R = std::move(Rc);
        rn = rc;
        if (moved <= cfg.step_tol * std::max(1.0, norm2(z))) break;
    }

    out.z = std::move(z);
    out.residual_norm = rn;
    out.iterations = it;
    out.converged = rn <= cfg.residual_tol;
    return out;
}

}  // namespace contactkit
