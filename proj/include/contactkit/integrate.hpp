#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "contactkit/model.hpp"

namespace contactkit {

struct IntegratorConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double initial_step = 0.0;  // 0: automatic selection
    double max_step = 0.0;      // 0: |t1 - t0| / 10
    std::size_t max_steps = 20'000'000;
};

// A located zero crossing of an event function along the trajectory.
struct Event {
    double t = 0.0;
    Vec z;
    std::string kind;
};

struct EventSpec {
    std::string kind;
    std::function<double(const Vec&)> value;
};

struct IntegratorStats {
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    std::size_t rhs_evaluations = 0;
};

struct Trajectory {
    std::vector<double> times;   // strictly monotone
    std::vector<Vec> states;
    std::vector<double> step_sizes;  // per accepted step
    IntegratorStats stats;
    std::vector<Event> events;
};

// Step underflow or step-budget exhaustion; carries whatever part of the
// trajectory was completed.
class IntegrationError : public Error {
  public:
    IntegrationError(const std::string& msg, Trajectory partial)
        : Error(msg), partial_trajectory(std::move(partial)) {}
    Trajectory partial_trajectory;
};

using OdeField = std::function<Vec(const Vec&)>;

// Adaptive embedded Runge-Kutta pair of orders 5(4) (Dormand-Prince
// coefficients) with PI step-size control. Integrates the autonomous field
// from t0 to t1 (either direction). Event-function zero crossings are located
// by bisection on the cubic-Hermite dense output of the step that brackets
// them.
Trajectory integrate_ode(const OdeField& field, Vec z0, double t0, double t1,
                         const IntegratorConfig& cfg = {},
                         const std::vector<EventSpec>& events = {});

// Full slow-fast system z' = N(z) f(z) + eps G(z, eps) with the model's eps.
// Records crossings of each component of f and of det(Df N).
Trajectory integrate_full(const FactorizedModel& model, const Vec& z0, double t0, double t1,
                          const IntegratorConfig& cfg = {});

// Fast fibers: trajectories of the desingularized layer field z' = N(z)
// (m = 1 only). Each seed yields one trajectory covering [t_back, t_forward]
// around the seed at t = 0.
std::vector<Trajectory> fiber_family(const FactorizedModel& model, const std::vector<Vec>& seeds,
                                     double t_back, double t_forward,
                                     const IntegratorConfig& cfg = {});

}  // namespace contactkit
