#include "contactkit/geometry.hpp"

#include <cmath>
#include <sstream>

#include "contactkit/errors.hpp"

namespace contactkit {

namespace {

Matrix layer_matrix(const FactorizedModel& model, const Vec& z) {
    return jacobian_f(model.provider, z) * model.provider.N(z);
}

// Gradient of z -> det(Df N)(z) from the chain rule through the adjugate:
// d(det M) = tr(adj(M) dM) with dM/dz_j = D2f(.,.,j) N + Df DN(.,.,j).
Vec det_gradient_analytic(const FactorizedModel& model, const Vec& z) {
    const DerivativeProvider& p = model.provider;
    const int n = p.n, m = p.m;
    const Matrix Df = p.Df(z);
    const Matrix N = p.N(z);
    const MultilinearMap D2f = p.D2f(z);
    const MultilinearMap DN = p.DN(z);
    const Matrix adj = adjugate(Df * N);

    Vec grad(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double g = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double dM = 0.0;
                for (int i = 0; i < n; ++i)
                    dM += D2f.at({a, i, j}) * N(i, b) + Df(a, i) * DN.at({i, b, j});
                g += adj(b, a) * dM;
            }
        grad[j] = g;
    }
    return grad;
}

Vec det_gradient_fd(const FactorizedModel& model, const Vec& z) {
    const int n = model.provider.n;
    Vec grad(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double h = model.provider.fd.coordinate_step(z, i);
        Vec zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        grad[i] = (contact_determinant(model, zp) - contact_determinant(model, zm)) / (2 * h);
    }
    return grad;
}

}  // namespace

double contact_determinant(const FactorizedModel& model, const Vec& z) {
    return determinant(layer_matrix(model, z));
}

Vec contact_residual(const FactorizedModel& model, const Vec& z) {
    Vec r = model.provider.f(z);
    r.push_back(contact_determinant(model, z));
    return r;
}

Matrix contact_jacobian(const FactorizedModel& model, const Vec& z) {
    const int n = model.provider.n, m = model.provider.m;
    const Matrix Df = jacobian_f(model.provider, z);
    const Vec dg = model.provider.has_analytic_tensors() ? det_gradient_analytic(model, z)
                                                         : det_gradient_fd(model, z);
    Matrix J(m + 1, n);
    for (int a = 0; a < m; ++a)
        for (int j = 0; j < n; ++j) J(a, j) = Df(a, j);
    for (int j = 0; j < n; ++j) J(m, j) = dg[j];
    return J;
}

Vec project_to_S(const FactorizedModel& model, const Vec& seed, const NewtonConfig& cfg) {
    const NewtonResult res = gauss_newton(
        [&](const Vec& z) { return model.provider.f(z); },
        [&](const Vec& z) { return jacobian_f(model.provider, z); }, seed, cfg);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "projection onto the critical manifold stalled at residual "
            << res.residual_norm << " after " << res.iterations << " iterations";
        throw ProjectionError(msg.str(), res.residual_norm);
    }
    return res.z;
}

Vec find_contact_point(const FactorizedModel& model, const Vec& seed, const NewtonConfig& cfg) {
    if (model.provider.m + 1 > model.provider.n)
        throw DimensionError("contact search needs m + 1 <= n");
    const NewtonResult res = gauss_newton(
        [&](const Vec& z) { return contact_residual(model, z); },
        [&](const Vec& z) { return contact_jacobian(model, z); }, seed, cfg);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "contact-point search stalled at residual " << res.residual_norm << " after "
            << res.iterations << " iterations";
        throw SearchError(msg.str());
    }
    return res.z;
}

EquilibriumResult desingularized_equilibria(const FactorizedModel& model, const Vec& seed,
                                            const NewtonConfig& cfg) {
    const DerivativeProvider& p = model.provider;
    if (p.m != 1)
        throw DimensionError("the desingularized layer field z' = N(z) needs m = 1");
    const int n = p.n;

    const auto field_jacobian = [&](const Vec& z) {
        const MultilinearMap T = dN(p, z);
        Matrix J(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) J(i, j) = T.at({i, 0, j});
        return J;
    };

    const NewtonResult res =
        gauss_newton([&](const Vec& z) { return p.N(z).col(0); }, field_jacobian, seed, cfg);
    if (!res.converged) {
        std::ostringstream msg;
        msg << "equilibrium search for z' = N(z) stalled at residual " << res.residual_norm
            << " after " << res.iterations << " iterations";
        throw SearchError(msg.str());
    }

    EquilibriumResult out;
    out.z = res.z;
    out.spectrum = eigenvalues(field_jacobian(res.z));
    out.residual = res.residual_norm;
    out.iterations = res.iterations;
    return out;
}

}  // namespace contactkit
