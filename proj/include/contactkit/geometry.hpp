#pragma once

#include "contactkit/gauss_newton.hpp"
#include "contactkit/model.hpp"

namespace contactkit {

// Result of an equilibrium search for the desingularized layer field z' = N(z).
struct EquilibriumResult {
    Vec z;
    SpectrumResult spectrum;  // eigenvalues of DN at the equilibrium
    double residual = 0.0;
    int iterations = 0;
};

// det(Df(z) N(z)), the scalar whose zero set on the critical manifold is the
// contact set.
double contact_determinant(const FactorizedModel& model, const Vec& z);

// Residual of the augmented contact system: the m components of f followed by
// det(Df N). Its zero set is the contact set F.
Vec contact_residual(const FactorizedModel& model, const Vec& z);

// (m+1) x n Jacobian of contact_residual. The determinant row uses the
// adjugate identity d(det M) = tr(adj(M) dM) when analytic tensors are
// available, and central differences otherwise.
Matrix contact_jacobian(const FactorizedModel& model, const Vec& z);

// Gauss-Newton projection onto the critical manifold f = 0. The Moore-Penrose
// step keeps the result near the seed (minimal-norm updates). Throws
// ProjectionError when the iteration does not reach cfg.residual_tol.
Vec project_to_S(const FactorizedModel& model, const Vec& seed,
                 const NewtonConfig& cfg = {});

// Gauss-Newton search for a point of the contact set {f = 0, det(Df N) = 0}.
// Throws SearchError on non-convergence.
Vec find_contact_point(const FactorizedModel& model, const Vec& seed,
                       const NewtonConfig& cfg = {});

// Newton search for an equilibrium of the desingularized layer field
// z' = N(z) (requires m = 1), reporting the spectrum of DN there. Throws
// SearchError on non-convergence and DimensionError when m != 1.
EquilibriumResult desingularized_equilibria(const FactorizedModel& model,
                                            const Vec& seed,
                                            const NewtonConfig& cfg = {});

}  // namespace contactkit
