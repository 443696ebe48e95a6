#pragma once

#include <functional>

#include "contactkit/errors.hpp"
#include "contactkit/linalg.hpp"

namespace contactkit {

// Shared Newton/Gauss-Newton settings for projection, root searches, and
// continuation correctors.
struct NewtonConfig {
    int max_iters = 50;
    double step_tol = 1e-12;
    double residual_tol = 1e-12;
    // Backtracking halves the step until the residual norm decreases; the
    // damping factor never drops below min_damping.
    double min_damping = 1.0 / (1 << 20);
};

struct NewtonResult {
    Vec z;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Damped Gauss-Newton for R(z) = 0 with the Moore-Penrose step
// dz = pinv(J) R. For underdetermined systems this is the minimal-norm
// update, which keeps iterates near the seed. Returns without throwing;
// callers decide which error to raise on non-convergence.
NewtonResult gauss_newton(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Matrix(const Vec&)>& jacobian,
                          Vec seed, const NewtonConfig& cfg = {});

}  // namespace contactkit
