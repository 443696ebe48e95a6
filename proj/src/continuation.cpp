#include "contactkit/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "contactkit/errors.hpp"
#include "contactkit/geometry.hpp"

namespace contactkit {

namespace {

double domain_scale(const FactorizedModel& model) {
    double s = 0.0;
    for (const auto& [lo, hi] : model.domain_hint) s = std::max(s, hi - lo);
    return s > 0 ? s : 1.0;
}

bool in_domain(const FactorizedModel& model, const Vec& z) {
    if (model.domain_hint.size() != z.size()) return true;
    for (size_t i = 0; i < z.size(); ++i) {
        const auto& [lo, hi] = model.domain_hint[i];
        if (z[i] < lo || z[i] > hi) return false;
    }
    return true;
}

Vec normalized(Vec v) {
    const double n = norm2(v);
    if (n > 0)
        for (double& x : v) x /= n;
    return v;
}

// Unit tangent of the contact curve: the nullspace direction of the
// augmented Jacobian. Empty when the nullspace is not one-dimensional.
Vec curve_tangent(const FactorizedModel& model, const Vec& z, const RankTolerance& tol) {
    const std::vector<Vec> ns = nullspace(contact_jacobian(model, z), tol);
    if (ns.size() != 1) return {};
    return ns[0];
}

// Gauss-Newton corrector for the augmented system with the orthogonality
// constraint t . (z - z_pred) = 0.
NewtonResult correct(const FactorizedModel& model, const Vec& z_pred, const Vec& t,
                     const NewtonConfig& cfg) {
    const auto residual = [&](const Vec& z) {
        Vec r = contact_residual(model, z);
        double c = 0.0;
        for (size_t i = 0; i < z.size(); ++i) c += t[i] * (z[i] - z_pred[i]);
        r.push_back(c);
        return r;
    };
    const auto jacobian = [&](const Vec& z) {
        const Matrix Jc = contact_jacobian(model, z);
        Matrix J(Jc.rows() + 1, Jc.cols());
        for (int i = 0; i < Jc.rows(); ++i)
            for (int j = 0; j < Jc.cols(); ++j) J(i, j) = Jc(i, j);
        for (int j = 0; j < Jc.cols(); ++j) J(Jc.rows(), j) = t[j];
        return J;
    };
    return gauss_newton(residual, jacobian, z_pred, cfg);
}

double branch_fold_coefficient(const FactorizedModel& model, const Vec& z,
                               const Tolerances& tol) {
    const NullvectorResult nv = nullvectors(model, z, tol);
    if (nv.degenerate) return 0.0;
    return chain_values(model.provider, z, nv.r, nv.l, 2).projected[2];
}

BranchPoint make_point(const FactorizedModel& model, const Vec& z, double s,
                       const Tolerances& tol) {
    BranchPoint bp;
    bp.z = z;
    bp.arclength = s;
    const ContactDiagnostics d = classify(model, z, tol);
    bp.classification = d.classification;
    bp.fold_coefficient = d.fold_coefficient;
    return bp;
}

// Bisection between two branch points whose fold coefficients have opposite
// sign, correcting midpoints back onto the curve, until the bracket is
// narrower than `width`.
BranchEvent bisect_sign_change(const FactorizedModel& model, const BranchPoint& a,
                               const BranchPoint& b, const ContinuationConfig& cfg) {
    Vec za = a.z, zb = b.z;
    double ca = a.fold_coefficient;
    const Vec dir = normalized(axpy(-1.0, a.z, b.z));
    while (norm2(axpy(-1.0, za, zb)) > cfg.special_point_tol) {
        Vec mid(za.size());
        for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (za[i] + zb[i]);
        const NewtonResult res = correct(model, mid, dir, cfg.corrector);
        if (!res.converged) break;
        const double cm = branch_fold_coefficient(model, res.z, cfg.tol);
        if ((cm < 0) == (ca < 0)) {
            za = res.z;
            ca = cm;
        } else {
            zb = res.z;
        }
    }
    Vec mid(za.size());
    for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (za[i] + zb[i]);
    const NewtonResult res = correct(model, mid, dir, cfg.corrector);
    const Vec located = res.converged ? res.z : mid;

    BranchEvent ev;
    ev.z = located;
    ev.arclength = a.arclength + norm2(axpy(-1.0, a.z, located));
    ev.classification = classify(model, located, cfg.tol).classification;
    return ev;
}

}  // namespace

Branch continue_contact_curve(const FactorizedModel& model, const Vec& z0,
                              const ContinuationConfig& cfg) {
    if (model.k() != 2)
        throw DimensionError(
            "contact-set continuation supports k = 2 only (the contact set is a curve)");

    const double scale = domain_scale(model);
    const double h_min = cfg.min_step > 0 ? cfg.min_step : 1e-6 * scale;
    const double h_max = cfg.max_step > 0 ? cfg.max_step : 0.1 * scale;
    double h = cfg.initial_step > 0 ? cfg.initial_step : 1e-2 * scale;
    h = std::clamp(h, h_min, h_max);

    // Polish the seed onto the curve.
    const NewtonResult seed = gauss_newton(
        [&](const Vec& z) { return contact_residual(model, z); },
        [&](const Vec& z) { return contact_jacobian(model, z); }, z0, cfg.corrector);
    if (!seed.converged || norm2(axpy(-1.0, z0, seed.z)) > 0.05 * scale)
        throw SearchError("continuation seed is not on the contact curve");

    Branch br;
    br.points.push_back(make_point(model, seed.z, 0.0, cfg.tol));

    Vec tangent = curve_tangent(model, seed.z, cfg.tol.rank);
    if (tangent.empty()) throw SearchError("contact curve has no unique tangent at the seed");
    {
        int imax = 0;
        for (size_t i = 1; i < tangent.size(); ++i)
            if (std::fabs(tangent[i]) > std::fabs(tangent[imax])) imax = static_cast<int>(i);
        const double sign = (tangent[imax] >= 0 ? 1.0 : -1.0) * cfg.direction;
        for (double& x : tangent) x *= sign;
    }

    int successes = 0;
    br.termination = BranchTermination::MaxPoints;
    while (static_cast<int>(br.points.size()) < cfg.max_points) {
        const BranchPoint& cur = br.points.back();

        Vec t = curve_tangent(model, cur.z, cfg.tol.rank);
        if (t.empty()) {
            br.termination = BranchTermination::StepFailure;
            break;
        }
        if (dot(t, tangent) < 0)
            for (double& x : t) x = -x;
        br.points.back().tangent = t;

        // Secant predictor once two points exist; tangent predictor first.
        Vec d = t;
        if (br.points.size() >= 2) {
            d = normalized(axpy(-1.0, br.points[br.points.size() - 2].z, cur.z));
            if (dot(d, t) < 0) d = t;
        }

        const Vec z_pred = axpy(h, d, cur.z);
        const NewtonResult res = correct(model, z_pred, t, cfg.corrector);
        const double moved = res.converged ? norm2(axpy(-1.0, cur.z, res.z)) : 0.0;
        if (!res.converged || moved > 3.0 * h || moved == 0.0) {
            h *= 0.5;
            successes = 0;
            if (h < h_min) {
                br.termination = BranchTermination::StepFailure;
                break;
            }
            continue;
        }

        tangent = t;
        br.step_history.push_back(h);
        BranchPoint bp = make_point(model, res.z, cur.arclength + moved, cfg.tol);

        const bool sign_flip = cur.fold_coefficient * bp.fold_coefficient < 0.0 &&
                               cur.classification.kind == VerdictKind::Contact &&
                               bp.classification.kind == VerdictKind::Contact;
        if (sign_flip) {
            br.special_points.push_back(bisect_sign_change(model, cur, bp, cfg));
        } else if (bp.classification.kind == VerdictKind::Contact &&
                   cur.classification.kind == VerdictKind::Contact &&
                   bp.classification.order != cur.classification.order &&
                   bp.classification.order > 1) {
            // The step landed directly on a higher-order point.
            BranchEvent ev;
            ev.z = bp.z;
            ev.arclength = bp.arclength;
            ev.classification = bp.classification;
            br.special_points.push_back(ev);
        }

        br.points.push_back(std::move(bp));

        if (!in_domain(model, br.points.back().z)) {
            br.termination = BranchTermination::DomainExit;
            break;
        }
        if (br.points.size() > 10 && br.points.back().arclength > 10 * h &&
            norm2(axpy(-1.0, br.points.front().z, br.points.back().z)) < 0.5 * h) {
            br.termination = BranchTermination::ClosedLoop;
            break;
        }
        if (++successes >= 3) {
            h = std::min(1.3 * h, h_max);
            successes = 0;
        }
    }
    if (br.points.back().tangent.empty()) {
        Vec t = curve_tangent(model, br.points.back().z, cfg.tol.rank);
        if (!t.empty()) {
            if (dot(t, tangent) < 0)
                for (double& x : t) x = -x;
            br.points.back().tangent = t;
        }
    }
    return br;
}

std::string termination_name(BranchTermination t) {
    switch (t) {
        case BranchTermination::DomainExit: return "domain_exit";
        case BranchTermination::StepFailure: return "step_failure";
        case BranchTermination::ClosedLoop: return "closed_loop";
        case BranchTermination::MaxPoints: return "max_points";
    }
    return "max_points";
}

}  // namespace contactkit
