#include "contactkit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "contactkit/errors.hpp"
#include "contactkit/geometry.hpp"

namespace contactkit {

namespace {

constexpr double kComponentFloor = 1e-9;

void normalize_direction(Vec& v) {
    const double n = norm2(v);
    if (n == 0.0) return;
    for (double& x : v) x /= n;
    for (double x : v) {
        if (std::fabs(x) > kComponentFloor) {
            if (x < 0)
                for (double& y : v) y = -y;
            break;
        }
    }
}

double eigen_zero_tolerance(const Tolerances& tol, const Matrix& Df, const Matrix& N) {
    return tol.zero_abs + tol.zero_rel * (Df.inf_norm() * N.inf_norm());
}

// Scaled zero test for the j-th chain value. `ref` carries the magnitude of
// comparable quantities (derivative scale and previously seen chain values);
// `noise_floor` guards finite-difference values against their own noise.
bool chain_value_is_zero(double value, double ref, double noise_floor, const Tolerances& tol) {
    return std::fabs(value) <= std::max(tol.zero_abs + tol.zero_rel * ref, noise_floor);
}

struct ChainScan {
    ChainValues chain;
    Vec full_norms;          // ||g_j||_2, indices 0..j_max
    int order = 0;           // smallest c with projected chain zero through c, nonzero at c+1
    int full_order = 0;      // same criterion on the full-vector norms
    bool inconclusive = false;
    bool first_value_nonzero = false;  // l g_1 already nonzero: not a contact point
};

// Scans the projected chain for the first significantly nonzero value.
// Returns the index j of that value via `order = j - 1` semantics.
int first_nonzero(const std::vector<double>& magnitudes, double deriv_scale, double length_scale,
                  const std::function<double(int)>& noise_floor, const Tolerances& tol) {
    double seen = 0.0;
    double pow_scale = deriv_scale;
    for (size_t j = 1; j < magnitudes.size(); ++j) {
        pow_scale *= length_scale;
        const double ref = std::max(pow_scale, seen);
        if (!chain_value_is_zero(magnitudes[j], ref, noise_floor(static_cast<int>(j)), tol))
            return static_cast<int>(j);
        seen = std::max(seen, magnitudes[j]);
    }
    return 0;  // nothing nonzero through the end of the chain
}

ChainScan scan_chain(const DerivativeProvider& p, const Vec& z, const Vec& r, const Vec& l,
                     const Tolerances& tol, int max_order) {
    const int j_max = max_order + 1;
    const Matrix Df = jacobian_f(p, z);
    const double deriv_scale = Df.inf_norm();
    const double length_scale = std::max(inf_norm(p.N(z) * r), 1e-300);

    ChainScan scan;
    scan.chain = chain_values(p, z, r, l, std::min(3, j_max));
    const auto noise_floor = [&](int j) {
        if (scan.chain.analytic_path && j <= 3) return 0.0;
        return 10.0 * p.fd.chain_noise(j) * std::max(1.0, deriv_scale);
    };
    const auto magnitudes = [&]() {
        std::vector<double> mags(scan.chain.projected.size());
        for (size_t j = 0; j < mags.size(); ++j) mags[j] = std::fabs(scan.chain.projected[j]);
        return mags;
    };

    // Deep orders always go through finite differences; only extend the chain
    // when the prefix through order 3 did not already resolve the order.
    if (j_max > 3 &&
        first_nonzero(magnitudes(), deriv_scale, length_scale, noise_floor, tol) == 0)
        scan.chain = chain_values(p, z, r, l, j_max);

    scan.full_norms.resize(scan.chain.values.size());
    std::vector<double> full(scan.chain.values.size());
    for (size_t j = 0; j < full.size(); ++j) {
        scan.full_norms[j] = norm2(scan.chain.values[j]);
        full[j] = scan.full_norms[j];
    }

    const int hit_proj = first_nonzero(magnitudes(), deriv_scale, length_scale, noise_floor, tol);
    const int hit_full = first_nonzero(full, deriv_scale, length_scale, noise_floor, tol);
    if (hit_proj == 1) {
        scan.first_value_nonzero = true;
        return scan;
    }
    if (hit_proj == 0) {
        scan.inconclusive = true;
        return scan;
    }
    scan.order = hit_proj - 1;
    scan.full_order = hit_full > 0 ? hit_full - 1 : 0;
    return scan;
}

}  // namespace

bool Classification::has_flag(const std::string& name) const {
    return std::find(flags.begin(), flags.end(), name) != flags.end();
}

ManifoldCheck on_critical_manifold(const FactorizedModel& model, const Vec& z,
                                   const Tolerances& tol) {
    const DerivativeProvider& p = model.provider;
    ManifoldCheck out;
    out.residual = inf_norm(p.f(z));
    const Matrix Df = jacobian_f(p, z);
    out.scale = std::max(1.0, Df.inf_norm() * std::max(1.0, inf_norm(z)));
    out.on_manifold = out.residual <= tol.manifold_dist * out.scale;
    return out;
}

SpectrumResult nontrivial_spectrum(const FactorizedModel& model, const Vec& z) {
    const DerivativeProvider& p = model.provider;
    const Matrix Df = jacobian_f(p, z);
    const Matrix N = p.N(z);
    SpectrumResult s = eigenvalues(Df * N);
    s.tolerance_used = eigen_zero_tolerance({}, Df, N);
    return s;
}

NullvectorResult nullvectors(const FactorizedModel& model, const Vec& z, const Tolerances& tol) {
    const DerivativeProvider& p = model.provider;
    const Matrix Df = jacobian_f(p, z);
    const Matrix DfN = Df * p.N(z);
    const int m = p.m;
    const Matrix adj = adjugate(DfN);

    NullvectorResult out;
    const double adj_scale =
        tol.rank.absolute + tol.rank.relative * std::max(1.0, std::pow(DfN.max_abs(), m - 1));
    if (adj.max_abs() <= adj_scale) {
        out.degenerate = true;
        return out;
    }

    int best_col = 0, best_row = 0;
    double best_col_norm = -1.0, best_row_norm = -1.0;
    for (int j = 0; j < m; ++j) {
        const double cn = norm2(adj.col(j));
        if (cn > best_col_norm) {
            best_col_norm = cn;
            best_col = j;
        }
        const double rn = norm2(adj.row(j));
        if (rn > best_row_norm) {
            best_row_norm = rn;
            best_row = j;
        }
    }
    out.r = adj.col(best_col);
    out.l = adj.row(best_row);
    normalize_direction(out.r);
    normalize_direction(out.l);
    out.right_residual = norm2(DfN * out.r);
    Vec lt(m, 0.0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) lt[j] += out.l[i] * DfN(i, j);
    out.left_residual = norm2(lt);
    return out;
}

OrderResult contact_order(const FactorizedModel& model, const Vec& z, const Tolerances& tol,
                          int max_order) {
    if (max_order < 0) max_order = tol.max_order;
    if (max_order < 1) throw ParameterError("max_order must be at least 1");
    const NullvectorResult nv = nullvectors(model, z, tol);
    if (nv.degenerate)
        throw NumericalError("contact_order: adjugate of Df N vanished (rank drop >= 2)");

    const ChainScan scan = scan_chain(model.provider, z, nv.r, nv.l, tol, max_order);
    OrderResult out;
    out.chain = scan.chain;
    out.full_vector_chain_norms = scan.full_norms;
    out.inconclusive = scan.inconclusive || scan.first_value_nonzero;
    out.order = scan.order;
    out.disagreement = !out.inconclusive && scan.full_order != scan.order;
    return out;
}

FoldReport fold_test(const FactorizedModel& model, const Vec& z, const Tolerances& tol) {
    const DerivativeProvider& p = model.provider;
    FoldReport out;
    out.submersion_rank = numerical_rank(jacobian_f(p, z), tol.rank);
    const NullvectorResult nv = nullvectors(model, z, tol);
    if (nv.degenerate) return out;

    const ChainScan scan = scan_chain(p, z, nv.r, nv.l, tol, 1);
    out.coefficient = scan.chain.projected[2];
    out.is_fold = out.submersion_rank == p.m && !scan.inconclusive &&
                  !scan.first_value_nonzero && scan.order == 1;
    return out;
}

CuspReport cusp_test(const FactorizedModel& model, const Vec& z, const Tolerances& tol) {
    const DerivativeProvider& p = model.provider;
    CuspReport out;
    out.submersion_rank = numerical_rank(jacobian_f(p, z), tol.rank);
    const NullvectorResult nv = nullvectors(model, z, tol);
    if (nv.degenerate) return out;

    const ChainScan scan = scan_chain(p, z, nv.r, nv.l, tol, 2);
    out.fold_coefficient = scan.chain.projected[2];
    out.third_order_coefficient = scan.chain.projected[3];
    out.C0 = chain_gradients(p, z, nv.r, nv.l, 2);
    out.C0_rank = numerical_rank(out.C0, tol.rank);
    out.is_cusp = out.submersion_rank == p.m && !scan.inconclusive && !scan.first_value_nonzero &&
                  scan.order == 2 && out.C0_rank == 2;
    return out;
}

GenericityReport slow_generic_test(const FactorizedModel& model, const Vec& z, int c,
                                   const Tolerances& tol) {
    if (c < 1) throw ParameterError("contact order must be at least 1");
    const DerivativeProvider& p = model.provider;
    GenericityReport out;
    out.submersion_rank = numerical_rank(jacobian_f(p, z), tol.rank);
    out.k_too_small = model.k() < c;
    const NullvectorResult nv = nullvectors(model, z, tol);
    if (nv.degenerate) return out;

    const ChainScan scan = scan_chain(p, z, nv.r, nv.l, tol, c);
    out.C0 = chain_gradients(p, z, nv.r, nv.l, c);
    out.C0_rank = numerical_rank(out.C0, tol.rank);
    out.is_slow_generic = out.submersion_rank == p.m && !out.k_too_small && !scan.inconclusive &&
                          !scan.first_value_nonzero && scan.order == c && out.C0_rank == c;
    return out;
}

ContactDiagnostics classify(const FactorizedModel& model, const Vec& z, const Tolerances& tol) {
    const DerivativeProvider& p = model.provider;
    ContactDiagnostics d;
    d.input = z;
    d.z = z;
    d.f_value = p.f(z);

    const ManifoldCheck mc = on_critical_manifold(model, z, tol);
    d.manifold_residual = mc.residual;
    if (!mc.on_manifold) {
        d.classification.kind = VerdictKind::NotOnCriticalManifold;
        return d;
    }
    if (mc.residual > 0.0) {
        try {
            const Vec zs = project_to_S(model, z);
            d.projection_displacement = norm2(axpy(-1.0, z, zs));
            d.z = zs;
            d.f_value = p.f(zs);
            if (d.projection_displacement > 0.0) d.classification.flags.push_back("projected");
        } catch (const ProjectionError& e) {
            d.classification.kind = VerdictKind::Inconclusive;
            d.classification.reason = e.what();
            return d;
        }
    }

    const Matrix Df = jacobian_f(p, d.z);
    const Matrix N = p.N(d.z);
    d.DfN = Df * N;
    d.submersion_rank = numerical_rank(Df, tol.rank);
    d.spectrum = eigenvalues(d.DfN);
    d.spectrum.tolerance_used = eigen_zero_tolerance(tol, Df, N);

    const int m = p.m;
    const int rank = numerical_rank(d.DfN, tol.rank);
    if (rank == m) {
        d.classification.kind = VerdictKind::NormallyHyperbolic;
        return d;
    }
    if (rank <= m - 2) {
        d.classification.kind = VerdictKind::Degenerate;
        d.classification.rank_deficiency = m - rank;
        return d;
    }

    const NullvectorResult nv = nullvectors(model, d.z, tol);
    if (nv.degenerate) {
        d.classification.kind = VerdictKind::Degenerate;
        d.classification.rank_deficiency = 2;
        return d;
    }
    d.l = nv.l;
    d.r = nv.r;

    const ChainScan scan = scan_chain(p, d.z, nv.r, nv.l, tol, tol.max_order);
    d.chain = scan.chain;
    d.full_vector_chain_norms = scan.full_norms;
    if (scan.chain.projected.size() > 2) d.fold_coefficient = scan.chain.projected[2];
    if (scan.chain.projected.size() > 3) d.cusp_coefficient = scan.chain.projected[3];

    if (scan.first_value_nonzero) {
        d.classification.kind = VerdictKind::Inconclusive;
        d.classification.reason =
            "rank test marks a contact point but the first chain value is significantly nonzero";
        return d;
    }
    if (scan.inconclusive) {
        std::ostringstream msg;
        msg << "no significantly nonzero chain value through order " << (tol.max_order + 1);
        d.classification.kind = VerdictKind::Inconclusive;
        d.classification.reason = msg.str();
        return d;
    }

    const int c = scan.order;
    d.C0 = chain_gradients(p, d.z, nv.r, nv.l, c);
    d.C0_rank = numerical_rank(d.C0, tol.rank);

    d.classification.kind = VerdictKind::Contact;
    d.classification.order = c;
    d.classification.C0_rank = d.C0_rank;
    d.classification.slow_generic =
        d.submersion_rank == m && model.k() >= c && d.C0_rank == c;
    if (d.submersion_rank < m) d.classification.flags.push_back("submersion_failure");
    if (scan.full_order != scan.order) d.classification.flags.push_back("chain_disagreement");
    return d;
}

ContactDiagnostics classify_projected(const FactorizedModel& model, const Vec& seed,
                                      const Tolerances& tol, const NewtonConfig& cfg) {
    const Vec zs = project_to_S(model, seed, cfg);
    ContactDiagnostics d = classify(model, zs, tol);
    d.input = seed;
    d.projection_displacement = norm2(axpy(-1.0, seed, zs));
    if (d.projection_displacement > 0.0 && !d.classification.has_flag("projected"))
        d.classification.flags.push_back("projected");
    return d;
}

std::string verdict_name(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::NotOnCriticalManifold: return "not_on_critical_manifold";
        case VerdictKind::NormallyHyperbolic: return "normally_hyperbolic";
        case VerdictKind::Contact: return "contact";
        case VerdictKind::Degenerate: return "degenerate";
        case VerdictKind::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

}  // namespace contactkit
