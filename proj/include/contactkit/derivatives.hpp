#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contactkit/linalg.hpp"
#include "contactkit/multilinear.hpp"

namespace contactkit {

// Finite-difference stepping policy. Central differences throughout; nested
// directional chains halve the step per nesting level, so the top-level step
// for a depth-j chain balances the 2^{j(j-1)/2} noise amplification of the
// nested quotients against the O(h^2) truncation bias.
struct FDConfig {
    double base_step = 0.0;           // default eps_mach^{1/3} when 0
    Vec characteristic_scale;         // per-coordinate; empty means all ones
    double chain_step_scale = 1.0;    // multiplier on the per-order chain steps

    double coordinate_step(const Vec& z, int i) const;
    // Top-level step for a nested directional chain of depth j >= 1.
    double chain_step(int depth) const;
    // Step for a direct central stencil of the given derivative order.
    double tensor_step(int order) const;
    // Estimated relative evaluation noise of a depth-j FD chain value.
    double chain_noise(int depth) const;
};

// Callbacks for one factorized system. f and N are required; the analytic
// tensors are optional and finite differences fill any gaps.
struct DerivativeProvider {
    int n = 0;  // phase dimension
    int m = 0;  // fast codimension (f maps to R^m, N is n x m)

    std::function<Vec(const Vec&)> f;
    std::function<Matrix(const Vec&)> N;

    std::function<Matrix(const Vec&)> Df;           // m x n
    std::function<MultilinearMap(const Vec&)> D2f;  // (m; n, n)
    std::function<MultilinearMap(const Vec&)> D3f;  // (m; n, n, n)
    std::function<MultilinearMap(const Vec&)> DN;   // (n; m, n): d N_{i,col} / d z_spatial
    std::function<MultilinearMap(const Vec&)> D2N;  // (n; m, n, n)

    FDConfig fd;

    bool has_analytic_tensors() const { return Df && D2f && D3f && DN && D2N; }
};

// Values of the nested directional-derivative chain g_0 = f,
// g_{j+1}(z) = Jacobian(g_j)(z) . (N(z) r), with r and l frozen at z0.
struct ChainValues {
    Vec z0;
    Vec r;
    Vec l;
    std::vector<Vec> values;  // g_j(z0), j = 0..j_max
    Vec projected;            // l . g_j(z0)
    bool analytic_path = false;
};

enum class ChainMode { Auto, ForceFD };

Matrix jacobian_f(const DerivativeProvider& p, const Vec& z);
MultilinearMap hessian_f(const DerivativeProvider& p, const Vec& z);
MultilinearMap third_f(const DerivativeProvider& p, const Vec& z);
MultilinearMap dN(const DerivativeProvider& p, const Vec& z);
MultilinearMap d2N(const DerivativeProvider& p, const Vec& z);

// Evaluates the chain through order j_max (<= 6). With analytic tensors and
// ChainMode::Auto, orders <= 3 use the expanded closed forms; higher orders
// and ChainMode::ForceFD use nested central differences along w(z) = N(z) r.
ChainValues chain_values(const DerivativeProvider& p, const Vec& z0, const Vec& r,
                         const Vec& l, int j_max, ChainMode mode = ChainMode::Auto);

// c x n matrix whose row j is the spatial gradient of z -> l . g_j(z) at z0.
// Rows 0 and 1 use the analytic expansions when tensors are present; higher
// rows use central differences on the scalar chain.
Matrix chain_gradients(const DerivativeProvider& p, const Vec& z0, const Vec& r,
                       const Vec& l, int c);

struct TensorCheck {
    std::string tensor;
    int order = 0;
    double max_rel_discrepancy = 0.0;
    bool flagged = false;
};

struct ProviderReport {
    std::vector<TensorCheck> checks;
    bool passed = true;
};

// Compares each analytic tensor against pure finite differences of f and N at
// the sample points. Flags relative discrepancies above 1e-5 for orders 1-2
// and 1e-3 for order 3.
ProviderReport validate_provider(const DerivativeProvider& p,
                                 const std::vector<Vec>& sample_points);

}  // namespace contactkit
