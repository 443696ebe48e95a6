#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contactkit/derivatives.hpp"

namespace contactkit {

// One named model parameter with its admissible range. Bounds may be
// infinite; strict flags distinguish "> lo" from ">= lo".
struct ParameterSpec {
    std::string name;
    double value = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_strict = false;
    bool hi_strict = false;
    bool integer = false;
    std::string constraint;  // human-readable, e.g. "alpha2 > 1"

    bool admits(double v) const;
};

// Provenance of a known-answer entry: "reference" (quoted from the source
// material), "derived" (obtained by substituting parameters into a quoted
// formula or by an independent symbolic computation), or "elementary"
// (immediate from definitions).
struct KnownPoint {
    Vec z;
    int order = 1;            // expected contact order (1 fold, 2 cusp, c for A_c)
    bool slow_generic = true;
    std::string label;
    std::string provenance;
};

struct KnownCurve {
    std::string label;
    std::function<Vec(double)> point;  // parameterization s -> point on the contact set
    double s_lo = 0.0;
    double s_hi = 1.0;
    // Expected fold coefficient along the curve as a function of s (null if unknown).
    std::function<double(double)> fold_coefficient;
    std::string provenance;
};

struct KnownScalar {
    std::string label;
    std::string kind;  // "fold_coefficient" | "third_order_coefficient" | "eigenvalue"
    Vec at;
    double value = 0.0;
    std::string provenance;
};

struct KnownAnswers {
    std::vector<KnownPoint> contact_points;
    std::vector<KnownCurve> contact_curves;
    std::vector<KnownPoint> equilibria;  // zeros of the desingularized field N
    std::vector<KnownScalar> coefficients;
};

// A slow-fast system in the factorized form z' = N(z) f(z) + eps G(z, eps).
// The provider carries f, N and their analytic derivative tensors; G is the
// perturbation term. When the exact eps-dependent right side is known in
// closed form (not merely as layer + eps*G), full_field supplies it.
struct FactorizedModel {
    std::string name;
    int n = 0;  // phase dimension
    int m = 0;  // fast codimension, = n - k
    std::vector<ParameterSpec> parameters;
    DerivativeProvider provider;
    std::function<Vec(const Vec&, double)> G;
    std::function<Vec(const Vec&, double)> full_field;  // optional exact full system
    double eps = 0.0;
    std::vector<std::pair<double, double>> domain_hint;  // per-coordinate box
    KnownAnswers known;
    std::string face;  // face-local variant tag ("X=0", ...), empty otherwise
    std::vector<std::string> coordinate_names;

    double parameter(const std::string& pname) const;
    int k() const { return n - m; }
};

// N(z) f(z)
Vec eval_layer(const FactorizedModel& model, const Vec& z);

// Full right side at the model's eps (or an explicit eps): full_field when
// present, otherwise N f + eps G.
Vec eval_full(const FactorizedModel& model, const Vec& z);
Vec eval_full(const FactorizedModel& model, const Vec& z, double eps);

// The five built-in systems with default parameters: planar_parabola,
// cusp_normal_form, ac_family, three_component, mitotic (face X=0).
std::vector<FactorizedModel> zoo();

// All loadable names, including the face-qualified mitotic variants.
std::vector<std::string> model_names();

// Loads a model by name with parameter overrides, validating ranges and
// running the load-time checks (seeded root of f in domain_hint; column rank
// of N there). Accepts "mitotic[X=1]"-style face qualifiers; bare "mitotic"
// means the X=0 face.
FactorizedModel load_model(const std::string& name,
                           const std::map<std::string, double>& overrides = {});

// Loads a user-defined model from a structured text file. The format is
// line-oriented ('#' starts a comment):
//
//   n = 3                                # phase dimension (required)
//   k = 2                                # slow dimension, 0 <= k < n (required)
//   name = my_system                     # optional; default: file stem
//   coords = x y z                       # optional; default: x1 .. xn
//   param alpha = 0.2 min 0 strict       # optional range clauses: min/max [strict]
//   f[1] = y                            # components of f, 1-based, all m = n-k required
//   N[1][1] = alpha*(1/(1+z^2) - x)      # entries of the n x m matrix N; missing = 0
//   G[1] = ...                           # optional perturbation; may reference `eps`
//   domain = 0:2 -0.5:2 0:2              # optional per-coordinate box
//
// Expressions use + - * / integer powers (^k), exp, ln, sqrt, numbers,
// coordinates, and parameter names. f and N may not reference `eps`; G may
// (it binds to the runtime value). Derivative tensors through third order
// are produced by symbolic differentiation. Throws ModelParseError on
// malformed input and ParameterError on out-of-range overrides.
FactorizedModel load_model_from_file(const std::string& path,
                                     const std::map<std::string, double>& overrides = {});

// Change of coordinates z = A y + b: returns the model in y-coordinates with
// f~ = f(Ay+b), N~ = A^{-1} N(Ay+b), tensors transformed by the chain rule,
// and KnownAnswers points mapped through A^{-1}(z - b). Used by invariance
// tests; skips the load-time root check.
FactorizedModel affine_conjugate(const FactorizedModel& model, const Matrix& A,
                                 const Vec& b);

}  // namespace contactkit
