#pragma once

#include <string>
#include <vector>

#include "contactkit/derivatives.hpp"
#include "contactkit/gauss_newton.hpp"
#include "contactkit/model.hpp"

namespace contactkit {

// Tolerances for the classification pipeline. Zero tests are scaled:
// |value| <= zero_abs + zero_rel * scale, with per-quantity scales built from
// |f|, ||Df||, ||N|| at the point.
struct Tolerances {
    double zero_abs = 1e-8;
    double zero_rel = 1e-6;
    RankTolerance rank{};
    double manifold_dist = 1e-9;  // relative bound for the |f(z)| on-manifold test
    int max_order = 4;            // deepest contact order searched
};

enum class VerdictKind {
    NotOnCriticalManifold,
    NormallyHyperbolic,
    Contact,
    Degenerate,
    Inconclusive,
};

// Flat verdict record. `order`, `slow_generic`, `C0_rank` are meaningful for
// Contact; `rank_deficiency` for Degenerate; `reason` for Inconclusive.
struct Classification {
    VerdictKind kind = VerdictKind::Inconclusive;
    int order = 0;
    bool slow_generic = false;
    int C0_rank = 0;
    int rank_deficiency = 0;
    std::string reason;
    std::vector<std::string> flags;

    bool has_flag(const std::string& name) const;
};

struct ManifoldCheck {
    bool on_manifold = false;
    double residual = 0.0;  // ||f(z)||_inf
    double scale = 1.0;     // reference magnitude the residual was compared against
};

struct NullvectorResult {
    bool degenerate = false;  // adjugate numerically zero: rank drop >= 2
    Vec l, r;                 // unit length, first nonzero component positive
    double right_residual = 0.0;  // ||(Df N) r||
    double left_residual = 0.0;   // ||l^T (Df N)||
};

struct FoldReport {
    bool is_fold = false;
    double coefficient = 0.0;  // l (D2f(Nr,Nr) + Df DN(Nr, r))
    int submersion_rank = 0;   // rank of Df
};

struct CuspReport {
    bool is_cusp = false;
    double fold_coefficient = 0.0;
    double third_order_coefficient = 0.0;
    Matrix C0;  // 2 x n matrix of chain gradients
    int C0_rank = 0;
    int submersion_rank = 0;
};

struct GenericityReport {
    bool is_slow_generic = false;
    Matrix C0;  // c x n matrix of chain gradients
    int C0_rank = 0;
    int submersion_rank = 0;
    bool k_too_small = false;  // fewer slow variables than the contact order
};

// Everything the pipeline computed for one point.
struct ContactDiagnostics {
    Vec z;                           // the classified point (after any projection)
    Vec input;                       // the point as supplied
    double projection_displacement = 0.0;
    Vec f_value;
    double manifold_residual = 0.0;
    Matrix DfN;
    SpectrumResult spectrum;
    int submersion_rank = 0;  // rank of Df
    Vec l, r;
    ChainValues chain;
    Vec full_vector_chain_norms;  // ||g_j|| per order
    Matrix C0;
    int C0_rank = 0;
    double fold_coefficient = 0.0;  // l-projected order-2 chain value
    double cusp_coefficient = 0.0;  // l-projected order-3 chain value
    Classification classification;
};

// True iff ||f(z)||_inf <= manifold_dist * scale.
ManifoldCheck on_critical_manifold(const FactorizedModel& model, const Vec& z,
                                   const Tolerances& tol = {});

// Eigenvalues of the m x m matrix Df(z) N(z): the nontrivial eigenvalues of
// the layer problem at a point of the critical manifold.
SpectrumResult nontrivial_spectrum(const FactorizedModel& model, const Vec& z);

// Left/right nullvectors of Df N from its adjugate (largest row / column).
// For m = 1 both are the scalar 1. A numerically zero adjugate marks a rank
// drop of two or more and is reported as degenerate.
NullvectorResult nullvectors(const FactorizedModel& model, const Vec& z,
                             const Tolerances& tol = {});

// Smallest c >= 1 with the l-projected chain zero through order c and
// significantly nonzero at order c+1. Returns c = 0 with an Inconclusive
// marker when no nonzero value is found through max_order + 1.
struct OrderResult {
    int order = 0;  // 0 = inconclusive
    ChainValues chain;
    Vec full_vector_chain_norms;
    bool disagreement = false;  // full-vector criterion picked another order
    bool inconclusive = false;
};
OrderResult contact_order(const FactorizedModel& model, const Vec& z, const Tolerances& tol = {},
                          int max_order = -1);

// Order-1 contact test: Df surjective and the order-2 chain value nonzero.
FoldReport fold_test(const FactorizedModel& model, const Vec& z, const Tolerances& tol = {});

// Order-2 contact test: Df surjective, order-2 chain value zero, order-3
// chain value nonzero, and the 2 x n chain-gradient matrix C0 of rank 2.
CuspReport cusp_test(const FactorizedModel& model, const Vec& z, const Tolerances& tol = {});

// Versality test at a detected order-c point: Df surjective, the chain
// conditions hold, rank(C0) = c, and at least c slow variables exist.
GenericityReport slow_generic_test(const FactorizedModel& model, const Vec& z, int c,
                                   const Tolerances& tol = {});

// Full pipeline at a point assumed to lie on (or within manifold_dist of) the
// critical manifold. Points farther away are reported NotOnCriticalManifold.
ContactDiagnostics classify(const FactorizedModel& model, const Vec& z,
                            const Tolerances& tol = {});

// Projects the seed onto the critical manifold first (ProjectionError
// surfaces if that fails), then classifies; records the displacement.
ContactDiagnostics classify_projected(const FactorizedModel& model, const Vec& seed,
                                      const Tolerances& tol = {}, const NewtonConfig& cfg = {});

// Stable lower-case name of a verdict kind, as used in serialized output.
std::string verdict_name(VerdictKind kind);

}  // namespace contactkit
