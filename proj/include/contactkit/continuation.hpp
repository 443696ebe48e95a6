#pragma once

#include <string>
#include <vector>

#include "contactkit/classify.hpp"
#include "contactkit/model.hpp"

namespace contactkit {

enum class BranchTermination {
    DomainExit,
    StepFailure,
    ClosedLoop,
    MaxPoints,
};

struct BranchPoint {
    Vec z;
    double arclength = 0.0;
    Classification classification;
    double fold_coefficient = 0.0;  // l-projected order-2 chain value
    Vec tangent;                    // unit curve tangent, oriented along the branch
};

// A verdict change located along the branch (e.g. a fold line passing
// through a cusp), bisected to cfg.special_point_tol in arclength.
struct BranchEvent {
    Vec z;
    double arclength = 0.0;
    Classification classification;  // verdict at the located point
};

struct ContinuationConfig {
    int max_points = 2000;
    double initial_step = 0.0;      // 0: 1e-2 * domain scale
    double min_step = 0.0;          // 0: 1e-6 * domain scale
    double max_step = 0.0;          // 0: 0.1  * domain scale
    double special_point_tol = 1e-10;  // arclength width of the bisection bracket
    int direction = +1;             // initial orientation along the curve
    NewtonConfig corrector;
    Tolerances tol;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<double> step_history;   // accepted predictor step lengths
    std::vector<BranchEvent> special_points;
    BranchTermination termination = BranchTermination::MaxPoints;
};

// Pseudo-arclength continuation of the contact curve {f = 0, det(Df N) = 0}
// from a point of it. Supported for k = 2 (the contact set is a curve);
// other k throw DimensionError. A seed that cannot be corrected onto the
// curve throws SearchError.
Branch continue_contact_curve(const FactorizedModel& model, const Vec& z0,
                              const ContinuationConfig& cfg = {});

// Stable lower-case name of a termination reason, as used in serialized
// output.
std::string termination_name(BranchTermination t);

}  // namespace contactkit
