#include "contactkit/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contactkit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw EvaluationError("non-finite function value");
}

void check_finite(const Matrix& M) {
    for (double x : M.data())
        if (!std::isfinite(x)) throw EvaluationError("non-finite function value");
}

Vec eval_f(const DerivativeProvider& p, const Vec& z) {
    Vec v = p.f(z);
    if (static_cast<int>(v.size()) != p.m) throw DimensionError("f output dim mismatch");
    check_finite(v);
    return v;
}

Matrix eval_N(const DerivativeProvider& p, const Vec& z) {
    Matrix M = p.N(z);
    if (M.rows() != p.n || M.cols() != p.m) throw DimensionError("N shape mismatch");
    check_finite(M);
    return M;
}

Vec displaced(const Vec& z, int i, double h) {
    Vec y = z;
    y[i] += h;
    return y;
}

// --- pure-FD tensor builders (never consult analytic callbacks) ---

Matrix fd_jacobian(const DerivativeProvider& p, const Vec& z) {
    Matrix J(p.m, p.n);
    for (int i = 0; i < p.n; ++i) {
        const double h = p.fd.coordinate_step(z, i);
        const Vec fp = eval_f(p, displaced(z, i, h));
        const Vec fm = eval_f(p, displaced(z, i, -h));
        for (int a = 0; a < p.m; ++a) J(a, i) = (fp[a] - fm[a]) / (2 * h);
    }
    return J;
}

MultilinearMap fd_hessian(const DerivativeProvider& p, const Vec& z) {
    MultilinearMap H(p.m, {p.n, p.n});
    const double h0 = p.fd.tensor_step(2);
    for (int i = 0; i < p.n; ++i) {
        const double hi = h0 * std::max(1.0, std::fabs(z[i]));
        for (int j = i; j < p.n; ++j) {
            const double hj = h0 * std::max(1.0, std::fabs(z[j]));
            Vec d(p.m);
            if (i == j) {
                const Vec fp = eval_f(p, displaced(z, i, hi));
                const Vec f0 = eval_f(p, z);
                const Vec fm = eval_f(p, displaced(z, i, -hi));
                for (int a = 0; a < p.m; ++a)
                    d[a] = (fp[a] - 2 * f0[a] + fm[a]) / (hi * hi);
            } else {
                Vec zpp = displaced(displaced(z, i, hi), j, hj);
                Vec zpm = displaced(displaced(z, i, hi), j, -hj);
                Vec zmp = displaced(displaced(z, i, -hi), j, hj);
                Vec zmm = displaced(displaced(z, i, -hi), j, -hj);
                const Vec fpp = eval_f(p, zpp), fpm = eval_f(p, zpm);
                const Vec fmp = eval_f(p, zmp), fmm = eval_f(p, zmm);
                for (int a = 0; a < p.m; ++a)
                    d[a] = (fpp[a] - fpm[a] - fmp[a] + fmm[a]) / (4 * hi * hj);
            }
            for (int a = 0; a < p.m; ++a) {
                H.at({a, i, j}) = d[a];
                H.at({a, j, i}) = d[a];
            }
        }
    }
    return H;
}

MultilinearMap fd_third(const DerivativeProvider& p, const Vec& z) {
    // Third derivative as a central difference of pure-FD Hessians; the
    // Hessian uses step ~eps^{1/4}, so its noise ~eps^{1/2} calls for an
    // outer step ~eps^{1/6}.
    MultilinearMap T(p.m, {p.n, p.n, p.n});
    const double h0 = std::pow(kEps, 1.0 / 6.0) * p.fd.chain_step_scale;
    for (int k = 0; k < p.n; ++k) {
        const double hk = h0 * std::max(1.0, std::fabs(z[k]));
        const MultilinearMap Hp = fd_hessian(p, displaced(z, k, hk));
        const MultilinearMap Hm = fd_hessian(p, displaced(z, k, -hk));
        for (int a = 0; a < p.m; ++a)
            for (int i = 0; i < p.n; ++i)
                for (int j = 0; j < p.n; ++j)
                    T.at({a, i, j, k}) =
                        (Hp.at({a, i, j}) - Hm.at({a, i, j})) / (2 * hk);
    }
    // Symmetrize over the three input slots.
    MultilinearMap S(p.m, {p.n, p.n, p.n});
    for (int a = 0; a < p.m; ++a)
        for (int i = 0; i < p.n; ++i)
            for (int j = 0; j < p.n; ++j)
                for (int k = 0; k < p.n; ++k)
                    S.at({a, i, j, k}) =
                        (T.at({a, i, j, k}) + T.at({a, i, k, j}) + T.at({a, j, i, k}) +
                         T.at({a, j, k, i}) + T.at({a, k, i, j}) + T.at({a, k, j, i})) /
                        6.0;
    return S;
}

MultilinearMap fd_dN(const DerivativeProvider& p, const Vec& z) {
    MultilinearMap D(p.n, {p.m, p.n});
    for (int k = 0; k < p.n; ++k) {
        const double h = p.fd.coordinate_step(z, k);
        const Matrix Np = eval_N(p, displaced(z, k, h));
        const Matrix Nm = eval_N(p, displaced(z, k, -h));
        for (int i = 0; i < p.n; ++i)
            for (int a = 0; a < p.m; ++a)
                D.at({i, a, k}) = (Np(i, a) - Nm(i, a)) / (2 * h);
    }
    return D;
}

MultilinearMap fd_d2N(const DerivativeProvider& p, const Vec& z) {
    MultilinearMap D(p.n, {p.m, p.n, p.n});
    const double h0 = p.fd.tensor_step(2);
    for (int j = 0; j < p.n; ++j) {
        const double hj = h0 * std::max(1.0, std::fabs(z[j]));
        for (int k = j; k < p.n; ++k) {
            const double hk = h0 * std::max(1.0, std::fabs(z[k]));
            Matrix d(p.n, p.m);
            if (j == k) {
                const Matrix Np = eval_N(p, displaced(z, j, hj));
                const Matrix N0 = eval_N(p, z);
                const Matrix Nm = eval_N(p, displaced(z, j, -hj));
                for (int i = 0; i < p.n; ++i)
                    for (int a = 0; a < p.m; ++a)
                        d(i, a) = (Np(i, a) - 2 * N0(i, a) + Nm(i, a)) / (hj * hj);
            } else {
                const Matrix Npp = eval_N(p, displaced(displaced(z, j, hj), k, hk));
                const Matrix Npm = eval_N(p, displaced(displaced(z, j, hj), k, -hk));
                const Matrix Nmp = eval_N(p, displaced(displaced(z, j, -hj), k, hk));
                const Matrix Nmm = eval_N(p, displaced(displaced(z, j, -hj), k, -hk));
                for (int i = 0; i < p.n; ++i)
                    for (int a = 0; a < p.m; ++a)
                        d(i, a) = (Npp(i, a) - Npm(i, a) - Nmp(i, a) + Nmm(i, a)) /
                                  (4 * hj * hk);
            }
            for (int i = 0; i < p.n; ++i)
                for (int a = 0; a < p.m; ++a) {
                    D.at({i, a, j, k}) = d(i, a);
                    D.at({i, a, k, j}) = d(i, a);
                }
        }
    }
    return D;
}

MultilinearMap symmetrized_pair(const MultilinearMap& H, int slot_a, int slot_b) {
    MultilinearMap S = H;
    const auto& dims = H.input_dims();
    if (dims[slot_a] != dims[slot_b]) return S;
    // Only used for (m; n, n) maps: average the two input slots.
    for (int o = 0; o < H.output_dim(); ++o)
        for (int i = 0; i < dims[0]; ++i)
            for (int j = 0; j < dims[1]; ++j)
                S.at({o, i, j}) = 0.5 * (H.at({o, i, j}) + H.at({o, j, i}));
    return S;
}

// w(z) = N(z) r
Vec contact_direction(const DerivativeProvider& p, const Vec& z, const Vec& r) {
    return eval_N(p, z) * r;
}

// Closed forms of the chain through order 3 (valid with analytic tensors):
//   g1 = Df w
//   g2 = D2f(w,w) + Df DN(w,r)
//   g3 = D3f(w,w,w) + 3 D2f(w, DN(w,r)) + Df (D2N(w,w,r) + DN(DN(w,r),r))
// where w = N(z0) r and DN(u,r) is the derivative of the field N r along u.
struct AnalyticChainContext {
    Matrix Df;
    MultilinearMap D2f, D3f, DN, D2N;
    Vec w;       // N r
    Vec dNr_w;   // DN(w, r)
};

AnalyticChainContext analytic_context(const DerivativeProvider& p, const Vec& z,
                                      const Vec& r) {
    AnalyticChainContext c;
    c.Df = p.Df(z);
    c.D2f = symmetrized_pair(p.D2f(z), 0, 1);
    c.D3f = p.D3f(z);
    c.DN = p.DN(z);
    c.D2N = p.D2N(z);
    c.w = contact_direction(p, z, r);
    c.dNr_w = c.DN.apply({&r, &c.w});
    return c;
}

}  // namespace

double FDConfig::coordinate_step(const Vec& z, int i) const {
    const double base = base_step > 0 ? base_step : std::cbrt(kEps);
    const double scale =
        characteristic_scale.empty() ? 1.0 : characteristic_scale[static_cast<size_t>(i)];
    return base * std::max(1.0, std::fabs(z[static_cast<size_t>(i)]) * scale);
}

double FDConfig::chain_step(int depth) const {
    // Balance 2^{d(d-1)/2} eps / H^d noise against H^2 bias.
    const double amp = std::pow(2.0, 0.5 * depth * (depth - 1));
    return chain_step_scale * std::pow(amp * kEps, 1.0 / (depth + 2));
}

double FDConfig::tensor_step(int order) const {
    return chain_step_scale * std::pow(kEps, 1.0 / (order + 2));
}

double FDConfig::chain_noise(int depth) const {
    const double H = chain_step(depth);
    const double amp = std::pow(2.0, 0.5 * depth * (depth - 1));
    return amp * kEps / std::pow(H, depth) + H * H;
}

Matrix jacobian_f(const DerivativeProvider& p, const Vec& z) {
    if (p.Df) {
        Matrix J = p.Df(z);
        if (J.rows() != p.m || J.cols() != p.n) throw DimensionError("Df shape mismatch");
        check_finite(J);
        return J;
    }
    return fd_jacobian(p, z);
}

MultilinearMap hessian_f(const DerivativeProvider& p, const Vec& z) {
    if (p.D2f) return symmetrized_pair(p.D2f(z), 0, 1);
    return fd_hessian(p, z);
}

MultilinearMap third_f(const DerivativeProvider& p, const Vec& z) {
    if (p.D3f) return p.D3f(z);
    return fd_third(p, z);
}

MultilinearMap dN(const DerivativeProvider& p, const Vec& z) {
    if (p.DN) return p.DN(z);
    return fd_dN(p, z);
}

MultilinearMap d2N(const DerivativeProvider& p, const Vec& z) {
    if (p.D2N) return p.D2N(z);
    return fd_d2N(p, z);
}

namespace {

// FD evaluation of g_target at z. The step for the difference producing g_j
// is H / 2^{target-j}: the top difference uses the full step and each deeper
// nesting level halves it.
Vec fd_chain_value(const DerivativeProvider& p, const Vec& z, const Vec& r,
                   int target, double H, double direction_scale) {
    const std::function<Vec(int, const Vec&)> eval = [&](int j, const Vec& zz) -> Vec {
        if (j == 0) return eval_f(p, zz);
        const Vec w = contact_direction(p, zz, r);
        const double h = H / std::pow(2.0, target - j) / direction_scale;
        const Vec gp = eval(j - 1, axpy(h, w, zz));
        const Vec gm = eval(j - 1, axpy(-h, w, zz));
        Vec out(gp.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = (gp[i] - gm[i]) / (2 * h);
        return out;
    };
    return eval(target, z);
}

}  // namespace

ChainValues chain_values(const DerivativeProvider& p, const Vec& z0, const Vec& r,
                         const Vec& l, int j_max, ChainMode mode) {
    if (j_max < 0 || j_max > 6) throw DimensionError("chain order must be in 0..6");
    if (inf_norm(r) == 0.0 || inf_norm(l) == 0.0)
        throw DimensionError("nullvectors must be nonzero");
    ChainValues out;
    out.z0 = z0;
    out.r = r;
    out.l = l;
    out.values.resize(static_cast<size_t>(j_max) + 1);
    out.projected.resize(static_cast<size_t>(j_max) + 1);
    const bool analytic = p.has_analytic_tensors() && mode == ChainMode::Auto;
    out.analytic_path = analytic;

    const Vec f0 = eval_f(p, z0);
    out.values[0] = f0;

    // Keep FD displacements comparable to the chain step even for large N.
    const Vec w0 = contact_direction(p, z0, r);
    const double direction_scale = std::max(1.0, inf_norm(w0));

    if (analytic) {
        const AnalyticChainContext c = analytic_context(p, z0, r);
        if (j_max >= 1) out.values[1] = c.Df * c.w;
        if (j_max >= 2) {
            Vec g = c.D2f.apply({&c.w, &c.w});
            const Vec t = c.Df * c.dNr_w;
            for (size_t i = 0; i < g.size(); ++i) g[i] += t[i];
            out.values[2] = g;
        }
        if (j_max >= 3) {
            Vec g = c.D3f.apply({&c.w, &c.w, &c.w});
            const Vec t2 = c.D2f.apply({&c.w, &c.dNr_w});
            const Vec d2n = c.D2N.apply({&r, &c.w, &c.w});
            const Vec dn2 = c.DN.apply({&r, &c.dNr_w});
            Vec inner(d2n.size());
            for (size_t i = 0; i < inner.size(); ++i) inner[i] = d2n[i] + dn2[i];
            const Vec t3 = c.Df * inner;
            for (size_t i = 0; i < g.size(); ++i) g[i] += 3 * t2[i] + t3[i];
            out.values[3] = g;
        }
        for (int j = 4; j <= j_max; ++j)
            out.values[static_cast<size_t>(j)] =
                fd_chain_value(p, z0, r, j, p.fd.chain_step(j), direction_scale);
    } else {
        for (int j = 1; j <= j_max; ++j)
            out.values[static_cast<size_t>(j)] =
                fd_chain_value(p, z0, r, j, p.fd.chain_step(j), direction_scale);
    }
    for (int j = 0; j <= j_max; ++j) {
        check_finite(out.values[static_cast<size_t>(j)]);
        out.projected[static_cast<size_t>(j)] = dot(l, out.values[static_cast<size_t>(j)]);
    }
    return out;
}

Matrix chain_gradients(const DerivativeProvider& p, const Vec& z0, const Vec& r,
                       const Vec& l, int c) {
    if (c < 1) throw DimensionError("chain_gradients needs c >= 1");
    Matrix C0(c, p.n);
    const bool analytic = p.has_analytic_tensors();

    // Row 0: l . Df
    {
        const Matrix Df = jacobian_f(p, z0);
        for (int j = 0; j < p.n; ++j) {
            double s = 0;
            for (int a = 0; a < p.m; ++a) s += l[a] * Df(a, j);
            C0(0, j) = s;
        }
    }
    if (c == 1) return C0;

    if (analytic) {
        // Row 1: l . (D2f(w, I) + Df DN(r, I)) with w = N r.
        const AnalyticChainContext ctx = analytic_context(p, z0, r);
        const Matrix A = ctx.D2f.apply_open(1, {&ctx.w});   // m x n
        const Matrix B = ctx.DN.apply_open(1, {&r});        // n x n, column j = DN(e_j, r)
        for (int j = 0; j < p.n; ++j) {
            double s = 0;
            for (int a = 0; a < p.m; ++a) {
                double dfb = 0;
                for (int i = 0; i < p.n; ++i) dfb += ctx.Df(a, i) * B(i, j);
                s += l[a] * (A(a, j) + dfb);
            }
            C0(1, j) = s;
        }
    }

    // Scalar chain psi_j(z) = l . g_j(z) with l, r frozen; rows >= 2 (and row
    // 1 without analytic tensors) by central differences per coordinate.
    const auto psi = [&](int j, const Vec& z) -> double {
        if (analytic && j <= 3) {
            const ChainValues cv = chain_values(p, z, r, l, j, ChainMode::Auto);
            return cv.projected[static_cast<size_t>(j)];
        }
        const Vec w0 = contact_direction(p, z0, r);
        const double dscale = std::max(1.0, inf_norm(w0));
        const Vec g = fd_chain_value(p, z, r, j, p.fd.chain_step(j), dscale);
        return dot(l, g);
    };

    const int first_fd_row = analytic ? 2 : 1;
    for (int row = first_fd_row; row < c; ++row) {
        // Gradient step balances the chain value's own evaluation noise.
        const double noise =
            (analytic && row <= 3) ? kEps : p.fd.chain_noise(row);
        const double h0 = std::max(std::cbrt(noise), std::cbrt(kEps));
        for (int i = 0; i < p.n; ++i) {
            const double h = h0 * std::max(1.0, std::fabs(z0[i]));
            const double fp = psi(row, displaced(z0, i, h));
            const double fm = psi(row, displaced(z0, i, -h));
            C0(row, i) = (fp - fm) / (2 * h);
        }
    }
    return C0;
}

ProviderReport validate_provider(const DerivativeProvider& p,
                                 const std::vector<Vec>& sample_points) {
    ProviderReport report;
    const auto add = [&](const std::string& name, int order, double rel) {
        const double tol = order <= 2 ? 1e-5 : 1e-3;
        TensorCheck c{name, order, rel, rel > tol};
        if (c.flagged) report.passed = false;
        report.checks.push_back(c);
    };

    double dJ = 0, dH = 0, dT = 0, dDN = 0, dD2N = 0;
    for (const Vec& z : sample_points) {
        if (p.Df) {
            const Matrix a = p.Df(z);
            const Matrix b = fd_jacobian(p, z);
            dJ = std::max(dJ, (a - b).max_abs() / (1 + a.max_abs()));
        }
        if (p.D2f) {
            const MultilinearMap a = symmetrized_pair(p.D2f(z), 0, 1);
            const MultilinearMap b = fd_hessian(p, z);
            double d = 0;
            for (size_t i = 0; i < a.data().size(); ++i)
                d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
            dH = std::max(dH, d / (1 + a.max_abs()));
        }
        if (p.D3f) {
            const MultilinearMap a = p.D3f(z);
            const MultilinearMap b = fd_third(p, z);
            double d = 0;
            for (size_t i = 0; i < a.data().size(); ++i)
                d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
            dT = std::max(dT, d / (1 + a.max_abs()));
        }
        if (p.DN) {
            const MultilinearMap a = p.DN(z);
            const MultilinearMap b = fd_dN(p, z);
            double d = 0;
            for (size_t i = 0; i < a.data().size(); ++i)
                d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
            dDN = std::max(dDN, d / (1 + a.max_abs()));
        }
        if (p.D2N) {
            const MultilinearMap a = p.D2N(z);
            const MultilinearMap b = fd_d2N(p, z);
            double d = 0;
            for (size_t i = 0; i < a.data().size(); ++i)
                d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
            dD2N = std::max(dD2N, d / (1 + a.max_abs()));
        }
    }
    if (p.Df) add("Df", 1, dJ);
    if (p.D2f) add("D2f", 2, dH);
    if (p.D3f) add("D3f", 3, dT);
    if (p.DN) add("DN", 1, dDN);
    if (p.D2N) add("D2N", 2, dD2N);
    return report;
}

}  // namespace contactkit
