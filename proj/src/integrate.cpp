#include "contactkit/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "contactkit/geometry.hpp"

namespace contactkit {

namespace {

// Dormand-Prince 5(4) tableau (nodes are implicit: the fields here are
// autonomous, so stage times never enter).
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights equal the last tableau row (first-same-as-last pair);
// the embedded 4th-order weights follow.
constexpr double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Cubic Hermite interpolation on one accepted step.
struct HermiteSegment {
    double t0, t1;
    const Vec *y0, *y1, *f0, *f1;

    Vec at(double t) const {
        const double h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        Vec out(y0->size());
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = h00 * (*y0)[i] + h10 * h * (*f0)[i] + h01 * (*y1)[i] + h11 * h * (*f1)[i];
        return out;
    }
};

// Locates a sign change of `g` on the segment by bisection in time down to
// machine resolution in t. Works for either time orientation of the segment.
Event locate_event(const HermiteSegment& seg, const EventSpec& spec, double ga) {
    const bool from_positive = ga > 0;
    double ta = seg.t0, tb = seg.t1;
    for (int it = 0; it < 200; ++it) {
        const double tm = 0.5 * (ta + tb);
        if (tm == ta || tm == tb) break;
        const double gm = spec.value(seg.at(tm));
        const bool crossed = from_positive ? (gm <= 0) : (gm >= 0);
        (crossed ? tb : ta) = tm;
    }
    Event ev;
    ev.t = 0.5 * (ta + tb);
    ev.z = seg.at(ev.t);
    ev.kind = spec.kind;
    return ev;
}

// The cubic interpolant on a full accepted step limits event-state accuracy
// to O(h^4), which is far coarser than the integration tolerance when steps
// are large. Re-integrates the bracketing step with tightened tolerances and
// a bounded substep, then bisects on the much shorter local interpolant.
Event refine_event(const OdeField& field, const EventSpec& spec, const HermiteSegment& coarse,
                   double ga, const IntegratorConfig& cfg, IntegratorStats& stats) {
    const double ta = coarse.t0, tb = coarse.t1;
    IntegratorConfig sub;
    sub.abs_tol = std::max(cfg.abs_tol * 1e-3, 1e-15);
    sub.rel_tol = std::max(cfg.rel_tol * 1e-3, 1e-15);
    sub.max_step = std::fabs(tb - ta) / 32.0;
    sub.initial_step = sub.max_step;
    try {
        const Trajectory fine = integrate_ode(field, *coarse.y0, ta, tb, sub, {});
        stats.rhs_evaluations += fine.stats.rhs_evaluations;
        double g_lo = ga;
        for (size_t i = 1; i < fine.times.size(); ++i) {
            const double g_hi = spec.value(fine.states[i]);
            if ((g_lo < 0 && g_hi >= 0) || (g_lo > 0 && g_hi <= 0)) {
                const Vec fa = field(fine.states[i - 1]);
                const Vec fb = field(fine.states[i]);
                stats.rhs_evaluations += 2;
                const HermiteSegment seg{fine.times[i - 1], fine.times[i], &fine.states[i - 1],
                                         &fine.states[i], &fa, &fb};
                return locate_event(seg, spec, g_lo);
            }
            g_lo = g_hi;
        }
    } catch (const IntegrationError&) {
        // The refinement pass is best-effort; fall back to the coarse segment.
    }
    return locate_event(coarse, spec, ga);
}

// Classic automatic initial-step heuristic for explicit Runge-Kutta methods.
double initial_step(const OdeField& field, const Vec& y0, const Vec& f0, double direction,
                    double order, const IntegratorConfig& cfg, IntegratorStats& stats) {
    const auto sc_norm = [&](const Vec& v, const Vec& ref) {
        double s = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(ref[i]);
            const double q = v[i] / sc;
            s += q * q;
        }
        return std::sqrt(s / v.size());
    };
    const double d0 = sc_norm(y0, y0);
    const double d1 = sc_norm(f0, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;

    const Vec y1 = axpy(direction * h0, f0, y0);
    const Vec f1 = field(y1);
    ++stats.rhs_evaluations;
    Vec df(f0.size());
    for (size_t i = 0; i < df.size(); ++i) df[i] = f1[i] - f0[i];
    const double d2 = sc_norm(df, y0) / h0;

    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 1.0 / order);
    return std::min(100 * h0, h1);
}

}  // namespace

Trajectory integrate_ode(const OdeField& field, Vec z0, double t0, double t1,
                         const IntegratorConfig& cfg, const std::vector<EventSpec>& events) {
    Trajectory tr;
    if (!all_finite(z0)) throw EvaluationError("integrate_ode: non-finite initial state");
    const size_t n = z0.size();
    const double span = t1 - t0;
    const double direction = span >= 0 ? 1.0 : -1.0;

    tr.times.push_back(t0);
    tr.states.push_back(z0);
    if (span == 0) return tr;

    Vec y = std::move(z0);
    double t = t0;
    Vec f0 = field(y);
    ++tr.stats.rhs_evaluations;
    if (!all_finite(f0)) throw EvaluationError("integrate_ode: non-finite field at initial state");

    std::vector<double> g_prev(events.size());
    for (size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].value(y);

    const double h_max = cfg.max_step > 0 ? cfg.max_step : std::fabs(span) / 10.0;
    double h = cfg.initial_step > 0
                   ? cfg.initial_step
                   : initial_step(field, y, f0, direction, 6.0, cfg, tr.stats);
    h = std::min(h, h_max);

    double facold = 1e-4;
    Vec k[7];
    k[0] = f0;

    while (direction * (t1 - t) > 0) {
        if (tr.stats.steps_accepted + tr.stats.steps_rejected >= cfg.max_steps) {
            std::ostringstream msg;
            msg << "integration exceeded " << cfg.max_steps << " steps at t = " << t;
            throw IntegrationError(msg.str(), std::move(tr));
        }
        bool last = false;
        if (h >= std::fabs(t1 - t)) {
            h = std::fabs(t1 - t);
            last = true;
        }
        if (h <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t))) {
            if (last) {
                // Arrived within roundoff of the endpoint: snap and finish.
                tr.times.back() = t1;
                break;
            }
            std::ostringstream msg;
            msg << "step size underflow (h = " << h << ") at t = " << t;
            throw IntegrationError(msg.str(), std::move(tr));
        }
        const double dt = direction * h;

        bool stages_ok = true;
        for (int s = 1; s < 7 && stages_ok; ++s) {
            Vec ys = y;
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) ys = axpy(dt * kA[s][j], k[j], ys);
            k[s] = field(ys);
            ++tr.stats.rhs_evaluations;
            stages_ok = all_finite(k[s]);
        }

        // 5th-order solution is stage 7's argument by the FSAL property.
        Vec y1 = y;
        for (int j = 0; j < 6; ++j)
            if (kA[6][j] != 0.0) y1 = axpy(dt * kA[6][j], k[j], y1);

        double err = std::numeric_limits<double>::infinity();
        if (stages_ok && all_finite(y1)) {
            double acc = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double e = 0.0;
                for (int j = 0; j < 7; ++j) {
                    const double db = (j < 6 ? kA[6][j] : 0.0) - kB4[j];
                    e += db * k[j][i];
                }
                e *= dt;
                const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[i]),
                                                                       std::fabs(y1[i]));
                acc += (e / sc) * (e / sc);
            }
            err = std::sqrt(acc / n);
        }

        if (err <= 1.0) {
            const double t_new = last ? t1 : t + dt;
            const HermiteSegment seg{t, t_new, &y, &y1, &k[0], &k[6]};
            std::vector<Event> fired;
            for (size_t e = 0; e < events.size(); ++e) {
                const double g_now = events[e].value(y1);
                if ((g_prev[e] < 0 && g_now >= 0) || (g_prev[e] > 0 && g_now <= 0))
                    fired.push_back(refine_event(field, events[e], seg, g_prev[e], cfg, tr.stats));
                g_prev[e] = g_now;
            }
            if (fired.size() > 1)
                std::sort(fired.begin(), fired.end(), [direction](const Event& a, const Event& b) {
                    return direction * (a.t - b.t) < 0;
                });
            for (Event& ev : fired) tr.events.push_back(std::move(ev));
            t = t_new;
            y = y1;
            k[0] = k[6];  // first-same-as-last
            tr.times.push_back(t);
            tr.states.push_back(y);
            tr.step_sizes.push_back(h);
            ++tr.stats.steps_accepted;

            const double fac11 = std::pow(std::max(err, 1e-30), 0.17);
            double fac = fac11 / std::pow(facold, 0.04);
            fac = std::max(0.1, std::min(5.0, fac / 0.9));
            h = std::min(h / fac, h_max);
            facold = std::max(err, 1e-4);
        } else {
            ++tr.stats.steps_rejected;
            const double fac11 = std::pow(err, 0.17);
            h = h / std::min(5.0, fac11 / 0.9);
        }
    }
    return tr;
}

Trajectory integrate_full(const FactorizedModel& model, const Vec& z0, double t0, double t1,
                          const IntegratorConfig& cfg) {
    std::vector<EventSpec> events;
    for (int a = 0; a < model.m; ++a) {
        std::ostringstream kind;
        kind << "f" << a << "_zero";
        events.push_back({kind.str(), [&model, a](const Vec& z) { return model.provider.f(z)[a]; }});
    }
    events.push_back(
        {"contact_det_zero", [&model](const Vec& z) { return contact_determinant(model, z); }});
    return integrate_ode([&model](const Vec& z) { return eval_full(model, z); }, z0, t0, t1, cfg,
                         events);
}

std::vector<Trajectory> fiber_family(const FactorizedModel& model, const std::vector<Vec>& seeds,
                                     double t_back, double t_forward,
                                     const IntegratorConfig& cfg) {
    if (model.m != 1)
        throw DimensionError("the desingularized layer field z' = N(z) needs m = 1");
    if (t_back > 0 || t_forward < 0)
        throw ParameterError("fiber span must satisfy t_back <= 0 <= t_forward");
    const OdeField field = [&model](const Vec& z) { return model.provider.N(z).col(0); };

    std::vector<Trajectory> fibers;
    fibers.reserve(seeds.size());
    for (const Vec& seed : seeds) {
        Trajectory merged;
        if (t_back < 0) {
            Trajectory back = integrate_ode(field, seed, 0.0, t_back, cfg);
            merged.stats = back.stats;
            for (size_t i = back.times.size(); i-- > 1;) {
                merged.times.push_back(back.times[i]);
                merged.states.push_back(std::move(back.states[i]));
            }
            merged.step_sizes.assign(back.step_sizes.rbegin(), back.step_sizes.rend());
        }
        merged.times.push_back(0.0);
        merged.states.push_back(seed);
        if (t_forward > 0) {
            Trajectory fwd = integrate_ode(field, seed, 0.0, t_forward, cfg);
            merged.stats.steps_accepted += fwd.stats.steps_accepted;
            merged.stats.steps_rejected += fwd.stats.steps_rejected;
            merged.stats.rhs_evaluations += fwd.stats.rhs_evaluations;
            for (size_t i = 1; i < fwd.times.size(); ++i) {
                merged.times.push_back(fwd.times[i]);
                merged.states.push_back(std::move(fwd.states[i]));
            }
            merged.step_sizes.insert(merged.step_sizes.end(), fwd.step_sizes.begin(),
                                     fwd.step_sizes.end());
        }
        fibers.push_back(std::move(merged));
    }
    return fibers;
}

}  // namespace contactkit
