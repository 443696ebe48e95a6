#include "contactkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "contactkit/gauss_newton.hpp"

namespace contactkit {

bool ParameterSpec::admits(double v) const {
    if (!std::isfinite(v)) return false;
    if (integer && v != std::floor(v)) return false;
    if (lo_strict ? v <= lo : v < lo) return false;
    if (hi_strict ? v >= hi : v > hi) return false;
    return true;
}

double FactorizedModel::parameter(const std::string& pname) const {
    for (const auto& p : parameters)
        if (p.name == pname) return p.value;
    throw ParameterError("model '" + name + "' has no parameter '" + pname + "'");
}

Vec eval_layer(const FactorizedModel& model, const Vec& z) {
    if (static_cast<int>(z.size()) != model.n)
        throw DimensionError("eval_layer: point dimension mismatch");
    return model.provider.N(z) * model.provider.f(z);
}

Vec eval_full(const FactorizedModel& model, const Vec& z, double eps) {
    if (static_cast<int>(z.size()) != model.n)
        throw DimensionError("eval_full: point dimension mismatch");
    if (model.full_field) return model.full_field(z, eps);
    Vec v = eval_layer(model, z);
    if (eps != 0.0 && model.G) {
        const Vec g = model.G(z, eps);
        for (size_t i = 0; i < v.size(); ++i) v[i] += eps * g[i];
    }
    return v;
}

Vec eval_full(const FactorizedModel& model, const Vec& z) {
    return eval_full(model, z, model.eps);
}

namespace {

// Fixed seeds spread across the domain box for the load-time root check;
// coordinates are staggered so seeds avoid symmetry axes of the models.
std::vector<Vec> box_seeds(const std::vector<std::pair<double, double>>& box) {
    const int n = static_cast<int>(box.size());
    std::vector<Vec> seeds;
    for (double t : {0.5, 0.31, 0.73, 0.11, 0.89}) {
        Vec z(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double u = std::fmod(t + 0.17 * i, 1.0);
            z[static_cast<size_t>(i)] =
                box[static_cast<size_t>(i)].first +
                u * (box[static_cast<size_t>(i)].second - box[static_cast<size_t>(i)].first);
        }
        seeds.push_back(std::move(z));
    }
    return seeds;
}

// Load-time sanity checks: f must vanish somewhere in the domain box (seeded
// Gauss-Newton) and N must have full column rank m at the located root.
void check_model(const FactorizedModel& model) {
    if (model.m < 1 || model.m >= model.n)
        throw ParameterError("model '" + model.name + "': need 1 <= m < n");
    if (model.domain_hint.empty()) return;

    const auto residual = [&](const Vec& z) { return model.provider.f(z); };
    const auto jac = [&](const Vec& z) { return jacobian_f(model.provider, z); };

    for (const Vec& seed : box_seeds(model.domain_hint)) {
        NewtonResult r = gauss_newton(residual, jac, seed);
        if (!r.converged) continue;
        const Matrix N = model.provider.N(r.z);
        if (numerical_rank(N) != model.m)
            throw ParameterError("model '" + model.name +
                                 "': N loses column rank on the zero set of f");
        return;
    }
    throw ParameterError("model '" + model.name +
                         "': no zero of f found in the domain hint");
}

}  // namespace

namespace detail {
// Implemented in zoo.cpp. Builds the named model from validated parameter
// values; face is empty or one of X=0, X=1, M=0, M=1 (mitotic only).
FactorizedModel build_model(const std::string& base_name, const std::string& face,
                            const std::map<std::string, double>& params);
std::vector<ParameterSpec> parameter_specs(const std::string& base_name);
std::vector<std::string> base_names();
}  // namespace detail

std::vector<std::string> model_names() {
    std::vector<std::string> names = detail::base_names();
    names.push_back("mitotic[X=0]");
    names.push_back("mitotic[X=1]");
    names.push_back("mitotic[M=0]");
    names.push_back("mitotic[M=1]");
    return names;
}

FactorizedModel load_model(const std::string& name,
                           const std::map<std::string, double>& overrides) {
    // Split an optional "[face]" qualifier off the base name.
    std::string base = name, face;
    const auto lb = name.find('[');
    if (lb != std::string::npos) {
        if (name.back() != ']')
            throw UnknownModelError("malformed model name '" + name + "'");
        base = name.substr(0, lb);
        face = name.substr(lb + 1, name.size() - lb - 2);
    }

    const auto known = detail::base_names();
    if (std::find(known.begin(), known.end(), base) == known.end())
        throw UnknownModelError("unknown model '" + base + "'");

    if (!face.empty() && base != "mitotic")
        throw UnknownModelError("model '" + base + "' has no face-local variants");
    if (base == "mitotic") {
        if (face.empty()) face = "X=0";
        if (face != "X=0" && face != "X=1" && face != "M=0" && face != "M=1")
            throw UnknownModelError("unknown mitotic face '" + face +
                                    "' (expected X=0, X=1, M=0, or M=1)");
    }

    std::vector<ParameterSpec> specs = detail::parameter_specs(base);
    std::map<std::string, double> values;
    for (const auto& s : specs) values[s.name] = s.value;
    for (const auto& [k, v] : overrides) {
        auto it = std::find_if(specs.begin(), specs.end(),
                               [&](const ParameterSpec& s) { return s.name == k; });
        if (it == specs.end())
            throw ParameterError("model '" + base + "' has no parameter '" + k + "'");
        if (!it->admits(v)) {
            std::ostringstream os;
            os << "parameter " << k << "=" << v << " violates " << it->constraint;
            throw ParameterError(os.str());
        }
        values[k] = v;
    }

    FactorizedModel model = detail::build_model(base, face, values);
    check_model(model);
    return model;
}

std::vector<FactorizedModel> zoo() {
    std::vector<FactorizedModel> models;
    for (const std::string& name : detail::base_names()) models.push_back(load_model(name));
    return models;
}

FactorizedModel affine_conjugate(const FactorizedModel& model, const Matrix& A,
                                 const Vec& b) {
    const int n = model.n, m = model.m;
    if (A.rows() != n || A.cols() != n || static_cast<int>(b.size()) != n)
        throw DimensionError("affine_conjugate: A must be n x n and b length n");
    const Matrix invA = pseudo_inverse(A);

    const auto phi = [A, b, n](const Vec& y) {
        Vec z = A * y;
        for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] += b[static_cast<size_t>(i)];
        return z;
    };
    const auto pull_point = [invA, b, n](const Vec& z) {
        Vec d(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            d[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] - b[static_cast<size_t>(i)];
        return invA * d;
    };

    FactorizedModel out;
    out.name = model.name + "~affine";
    out.n = n;
    out.m = m;
    out.parameters = model.parameters;
    out.eps = model.eps;
    out.face = model.face;
    out.coordinate_names.clear();

    const DerivativeProvider& p = model.provider;
    DerivativeProvider q;
    q.n = n;
    q.m = m;
    q.fd = p.fd;
    q.fd.characteristic_scale.clear();
    q.f = [p, phi](const Vec& y) { return p.f(phi(y)); };
    q.N = [p, phi, invA](const Vec& y) { return invA * p.N(phi(y)); };

    if (p.Df) q.Df = [p, phi, A](const Vec& y) { return p.Df(phi(y)) * A; };
    if (p.D2f)
        q.D2f = [p, phi, A, n, m](const Vec& y) {
            const MultilinearMap T = p.D2f(phi(y));
            MultilinearMap R(m, {n, n});
            for (int a = 0; a < m; ++a)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double s = 0;
                        for (int u = 0; u < n; ++u)
                            for (int v = 0; v < n; ++v)
                                s += T.at({a, u, v}) * A(u, i) * A(v, j);
                        R.at({a, i, j}) = s;
                    }
            return R;
        };
    if (p.D3f)
        q.D3f = [p, phi, A, n, m](const Vec& y) {
            const MultilinearMap T = p.D3f(phi(y));
            MultilinearMap R(m, {n, n, n});
            for (int a = 0; a < m; ++a)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k) {
                            double s = 0;
                            for (int u = 0; u < n; ++u)
                                for (int v = 0; v < n; ++v)
                                    for (int w = 0; w < n; ++w)
                                        s += T.at({a, u, v, w}) * A(u, i) * A(v, j) *
                                             A(w, k);
                            R.at({a, i, j, k}) = s;
                        }
            return R;
        };
    if (p.DN)
        q.DN = [p, phi, A, invA, n, m](const Vec& y) {
            const MultilinearMap T = p.DN(phi(y));
            MultilinearMap R(n, {m, n});
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < m; ++a)
                    for (int k = 0; k < n; ++k) {
                        double s = 0;
                        for (int j = 0; j < n; ++j)
                            for (int u = 0; u < n; ++u)
                                s += invA(i, j) * T.at({j, a, u}) * A(u, k);
                        R.at({i, a, k}) = s;
                    }
            return R;
        };
    if (p.D2N)
        q.D2N = [p, phi, A, invA, n, m](const Vec& y) {
            const MultilinearMap T = p.D2N(phi(y));
            MultilinearMap R(n, {m, n, n});
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < m; ++a)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            double s = 0;
                            for (int j = 0; j < n; ++j)
                                for (int u = 0; u < n; ++u)
                                    for (int v = 0; v < n; ++v)
                                        s += invA(i, j) * T.at({j, a, u, v}) * A(u, k) *
                                             A(v, l);
                            R.at({i, a, k, l}) = s;
                        }
            return R;
        };
    out.provider = std::move(q);

    if (model.G) {
        auto g = model.G;
        out.G = [g, phi, invA](const Vec& y, double eps) { return invA * g(phi(y), eps); };
    }
    if (model.full_field) {
        auto ff = model.full_field;
        out.full_field = [ff, phi, invA](const Vec& y, double eps) {
            return invA * ff(phi(y), eps);
        };
    }

    for (const KnownPoint& kp : model.known.contact_points) {
        KnownPoint t = kp;
        t.z = pull_point(kp.z);
        out.known.contact_points.push_back(std::move(t));
    }
    for (const KnownPoint& kp : model.known.equilibria) {
        KnownPoint t = kp;
        t.z = pull_point(kp.z);
        out.known.equilibria.push_back(std::move(t));
    }
    // Curves and coefficient closures are stated in the original coordinates;
    // they are not carried over.
    return out;
}

}  // namespace contactkit
