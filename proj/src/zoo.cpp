#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "contactkit/model.hpp"

namespace contactkit {
namespace detail {

namespace {

ParameterSpec positive(const std::string& name, double value) {
    ParameterSpec s;
    s.name = name;
    s.value = value;
    s.lo = 0.0;
    s.lo_strict = true;
    s.constraint = name + " > 0";
    return s;
}

ParameterSpec nonneg(const std::string& name, double value) {
    ParameterSpec s;
    s.name = name;
    s.value = value;
    s.lo = 0.0;
    s.constraint = name + " >= 0";
    return s;
}

MultilinearMap zero_map(int out, std::vector<int> dims) {
    return MultilinearMap(out, std::move(dims));
}

// ---------------------------------------------------------------- planar

FactorizedModel build_planar(const std::map<std::string, double>& params) {
    FactorizedModel md;
    md.name = "planar_parabola";
    md.n = 2;
    md.m = 1;
    md.eps = params.at("eps");
    md.coordinate_names = {"x", "y"};
    md.domain_hint = {{-3, 3}, {-3, 3}};

    DerivativeProvider p;
    p.n = 2;
    p.m = 1;
    p.f = [](const Vec& z) { return Vec{z[1] + z[0] * z[0] - 1.0}; };
    p.N = [](const Vec& z) {
        Matrix N(2, 1);
        N(0, 0) = z[0] - 2.0;
        N(1, 0) = 1.0;
        return N;
    };
    p.Df = [](const Vec& z) {
        Matrix J(1, 2);
        J(0, 0) = 2.0 * z[0];
        J(0, 1) = 1.0;
        return J;
    };
    p.D2f = [](const Vec&) {
        MultilinearMap H(1, {2, 2});
        H.at({0, 0, 0}) = 2.0;
        return H;
    };
    p.D3f = [](const Vec&) { return zero_map(1, {2, 2, 2}); };
    p.DN = [](const Vec&) {
        MultilinearMap D(2, {1, 2});
        D.at({0, 0, 0}) = 1.0;
        return D;
    };
    p.D2N = [](const Vec&) { return zero_map(2, {1, 2, 2}); };
    md.provider = std::move(p);

    md.G = [](const Vec& z, double) { return Vec(z.size(), 0.0); };

    const double r2 = std::sqrt(2.0);
    const double xm = (2.0 - r2) / 2.0, xp = (2.0 + r2) / 2.0;
    md.known.contact_points.push_back(
        {{xm, 1.0 - xm * xm}, 1, true, "fold at x = (2 - sqrt 2)/2", "reference"});
    md.known.contact_points.push_back(
        {{xp, 1.0 - xp * xp}, 1, true, "fold at x = (2 + sqrt 2)/2", "reference"});
    md.known.coefficients.push_back({"fold coefficient at left fold", "fold_coefficient",
                                     {xm, 1.0 - xm * xm}, 2.0 + 2.0 * r2, "derived"});
    md.known.coefficients.push_back({"fold coefficient at right fold", "fold_coefficient",
                                     {xp, 1.0 - xp * xp}, 2.0 - 2.0 * r2, "derived"});
    md.known.coefficients.push_back({"nontrivial eigenvalue at the parabola apex",
                                     "eigenvalue",
                                     {0.0, 1.0},
                                     1.0,
                                     "derived"});
    return md;
}

// ------------------------------------------------------ cusp normal form

FactorizedModel build_cusp(const std::map<std::string, double>& params) {
    FactorizedModel md;
    md.name = "cusp_normal_form";
    md.n = 3;
    md.m = 1;
    md.eps = params.at("eps");
    md.coordinate_names = {"x", "y", "z"};
    md.domain_hint = {{-1, 1}, {-1, 1}, {-1, 1}};

    DerivativeProvider p;
    p.n = 3;
    p.m = 1;
    p.f = [](const Vec& z) { return Vec{z[0] + z[1] * z[2] + z[2] * z[2] * z[2]}; };
    p.N = [](const Vec&) {
        Matrix N(3, 1);
        N(2, 0) = 1.0;
        return N;
    };
    p.Df = [](const Vec& z) {
        Matrix J(1, 3);
        J(0, 0) = 1.0;
        J(0, 1) = z[2];
        J(0, 2) = z[1] + 3.0 * z[2] * z[2];
        return J;
    };
    p.D2f = [](const Vec& z) {
        MultilinearMap H(1, {3, 3});
        H.at({0, 1, 2}) = 1.0;
        H.at({0, 2, 1}) = 1.0;
        H.at({0, 2, 2}) = 6.0 * z[2];
        return H;
    };
    p.D3f = [](const Vec&) {
        MultilinearMap T(1, {3, 3, 3});
        T.at({0, 2, 2, 2}) = 6.0;
        return T;
    };
    p.DN = [](const Vec&) { return zero_map(3, {1, 3}); };
    p.D2N = [](const Vec&) { return zero_map(3, {1, 3, 3}); };
    md.provider = std::move(p);

    md.G = [](const Vec&, double) { return Vec{1.0, 0.0, 0.0}; };

    md.known.contact_points.push_back({{0, 0, 0}, 2, true, "cusp at the origin", "reference"});
    KnownCurve branch;
    branch.label = "contact parabola y = -3z^2 on S";
    branch.point = [](double s) { return Vec{2.0 * s * s * s, -3.0 * s * s, s}; };
    branch.s_lo = -0.7;
    branch.s_hi = 0.7;
    branch.fold_coefficient = [](double s) { return 6.0 * s; };
    branch.provenance = "reference";
    md.known.contact_curves.push_back(std::move(branch));
    md.known.coefficients.push_back(
        {"third-order coefficient at the origin", "third_order_coefficient", {0, 0, 0}, 6.0,
         "reference"});
    return md;
}

// -------------------------------------------------------------- A_c family

FactorizedModel build_ac(const std::map<std::string, double>& params) {
    const int c = static_cast<int>(params.at("c"));
    const int n = c + 1;

    FactorizedModel md;
    md.name = "ac_family";
    md.n = n;
    md.m = 1;
    md.eps = params.at("eps");
    for (int i = 1; i <= c; ++i) md.coordinate_names.push_back("z" + std::to_string(i));
    md.coordinate_names.push_back("x");
    md.domain_hint.assign(static_cast<size_t>(n), {-1.0, 1.0});

    // State layout: (z_1, ..., z_c, x); f = x^{c+1} + sum_{i=2}^c z_i x^{i-1} + z_1.
    DerivativeProvider p;
    p.n = n;
    p.m = 1;
    p.f = [c](const Vec& s) {
        const double x = s[static_cast<size_t>(c)];
        double v = std::pow(x, c + 1) + s[0];
        for (int i = 2; i <= c; ++i) v += s[static_cast<size_t>(i - 1)] * std::pow(x, i - 1);
        return Vec{v};
    };
    p.N = [n, c](const Vec&) {
        Matrix N(n, 1);
        N(c, 0) = 1.0;
        return N;
    };
    p.Df = [n, c](const Vec& s) {
        const double x = s[static_cast<size_t>(c)];
        Matrix J(1, n);
        J(0, 0) = 1.0;
        for (int i = 2; i <= c; ++i) J(0, i - 1) = std::pow(x, i - 1);
        double dx = (c + 1) * std::pow(x, c);
        for (int i = 2; i <= c; ++i)
            dx += s[static_cast<size_t>(i - 1)] * (i - 1) * std::pow(x, i - 2);
        J(0, c) = dx;
        return J;
    };
    p.D2f = [n, c](const Vec& s) {
        const double x = s[static_cast<size_t>(c)];
        MultilinearMap H(1, {n, n});
        for (int i = 2; i <= c; ++i) {
            const double v = (i - 1) * std::pow(x, i - 2);
            H.at({0, i - 1, c}) = v;
            H.at({0, c, i - 1}) = v;
        }
        double dxx = (c + 1) * c * std::pow(x, c - 1);
        for (int i = 3; i <= c; ++i)
            dxx += s[static_cast<size_t>(i - 1)] * (i - 1) * (i - 2) * std::pow(x, i - 3);
        H.at({0, c, c}) = dxx;
        return H;
    };
    p.D3f = [n, c](const Vec& s) {
        const double x = s[static_cast<size_t>(c)];
        MultilinearMap T(1, {n, n, n});
        for (int i = 3; i <= c; ++i) {
            const double v = (i - 1) * (i - 2) * std::pow(x, i - 3);
            T.at({0, i - 1, c, c}) = v;
            T.at({0, c, i - 1, c}) = v;
            T.at({0, c, c, i - 1}) = v;
        }
        double dxxx = 0.0;
        if (c >= 2) dxxx = (c + 1) * c * (c - 1) * std::pow(x, c - 2);
        for (int i = 4; i <= c; ++i)
            dxxx += s[static_cast<size_t>(i - 1)] * (i - 1) * (i - 2) * (i - 3) *
                    std::pow(x, i - 4);
        T.at({0, c, c, c}) = dxxx;
        return T;
    };
    p.DN = [n](const Vec&) { return zero_map(n, {1, n}); };
    p.D2N = [n](const Vec&) { return zero_map(n, {1, n, n}); };
    md.provider = std::move(p);

    md.G = [n](const Vec&, double) {
        Vec g(static_cast<size_t>(n), 0.0);
        g[0] = 1.0;
        return g;
    };

    double factorial = 1.0;
    for (int i = 2; i <= c + 1; ++i) factorial *= i;
    md.known.contact_points.push_back({Vec(static_cast<size_t>(n), 0.0), c, true,
                                       "order-" + std::to_string(c) + " point at the origin",
                                       "derived"});
    if (c == 1)
        md.known.coefficients.push_back({"fold coefficient at the origin", "fold_coefficient",
                                         Vec(static_cast<size_t>(n), 0.0), 2.0, "derived"});
    if (c == 2)
        md.known.coefficients.push_back({"third-order coefficient at the origin",
                                         "third_order_coefficient",
                                         Vec(static_cast<size_t>(n), 0.0), 6.0, "derived"});
    return md;
}

// --------------------------------------------------------- three-component

FactorizedModel build_three_component(const std::map<std::string, double>& params) {
    const double a1 = params.at("alpha1");
    const double a2 = params.at("alpha2");
    const double a3 = params.at("alpha3");

    FactorizedModel md;
    md.name = "three_component";
    md.n = 3;
    md.m = 1;
    md.eps = params.at("eps");
    md.coordinate_names = {"x", "y", "z"};
    md.domain_hint = {{0, 2}, {-0.5, 2}, {0, 2}};

    DerivativeProvider p;
    p.n = 3;
    p.m = 1;
    p.f = [](const Vec& z) { return Vec{z[1]}; };
    p.N = [a1, a2, a3](const Vec& z) {
        Matrix N(3, 1);
        const double w = 1.0 + z[2] * z[2];
        N(0, 0) = a1 * (1.0 / w - z[0]);
        N(1, 0) = a2 * z[0] - 1.0;
        N(2, 0) = a3 * (z[1] - z[2]);
        return N;
    };
    p.Df = [](const Vec&) {
        Matrix J(1, 3);
        J(0, 1) = 1.0;
        return J;
    };
    p.D2f = [](const Vec&) { return zero_map(1, {3, 3}); };
    p.D3f = [](const Vec&) { return zero_map(1, {3, 3, 3}); };
    p.DN = [a1, a2, a3](const Vec& z) {
        MultilinearMap D(3, {1, 3});
        const double w = 1.0 + z[2] * z[2];
        D.at({0, 0, 0}) = -a1;
        D.at({0, 0, 2}) = -2.0 * a1 * z[2] / (w * w);
        D.at({1, 0, 0}) = a2;
        D.at({2, 0, 1}) = a3;
        D.at({2, 0, 2}) = -a3;
        return D;
    };
    p.D2N = [a1](const Vec& z) {
        MultilinearMap D(3, {1, 3, 3});
        const double w = 1.0 + z[2] * z[2];
        D.at({0, 0, 2, 2}) = a1 * (6.0 * z[2] * z[2] - 2.0) / (w * w * w);
        return D;
    };
    md.provider = std::move(p);

    md.G = [a1, a2, a3](const Vec& z, double) {
        const double w = 1.0 + z[2] * z[2];
        return Vec{a1 * (1.0 / w - z[0]), a2 * z[0], a3 * (z[1] - z[2])};
    };

    const double zc = std::sqrt(a2 - 1.0);
    md.known.contact_points.push_back({{1.0 / a2, 0.0, zc}, 2, true, "cusp K", "reference"});
    md.known.contact_points.push_back(
        {{1.0 / a2, 0.0, -zc}, 2, true, "unphysical cusp K-", "reference"});
    KnownCurve line;
    line.label = "contact line x = 1/alpha2 on S";
    line.point = [a2](double s) { return Vec{1.0 / a2, 0.0, s}; };
    line.s_lo = 0.0;
    line.s_hi = 2.0;
    line.fold_coefficient = [a1, a2](double s) {
        const double w = 1.0 + s * s;
        return a1 * (a2 - w) / w;
    };
    line.provenance = "reference";
    md.known.contact_curves.push_back(std::move(line));
    md.known.equilibria.push_back(
        {{1.0 / a2, zc, zc}, 0, false, "saddle-focus equilibrium q", "reference"});
    md.known.coefficients.push_back({"third-order coefficient at K", "third_order_coefficient",
                                     {1.0 / a2, 0.0, zc}, 2.0 * a1 * a3 * (a2 - 1.0) / a2,
                                     "reference"});
    md.known.coefficients.push_back({"fold coefficient at z = 0", "fold_coefficient",
                                     {1.0 / a2, 0.0, 0.0}, a1 * (a2 - 1.0), "derived"});
    return md;
}

// ----------------------------------------------------------------- mitotic

Vec mitotic_full_rhs(const Vec& z, double e) {
    const double X = z[0], M = z[1], C = z[2];
    const double FeX = (e + 1.0 - X) * (e + X);
    const double FeM = (e + 1.0 - M) * (e + M);
    return Vec{(M * (1.0 - X) * (e + X) - 0.7 * X * (e + 1.0 - X)) * FeM,
               ((6.0 * C / (1.0 + 2.0 * C)) * (1.0 - M) * (e + M) -
                1.5 * M * (e + 1.0 - M)) *
                   FeX,
               0.25 * (1.0 - X - C) * FeX * FeM};
}

FactorizedModel build_mitotic(const std::string& face,
                              const std::map<std::string, double>& params) {
    FactorizedModel md;
    md.name = "mitotic[" + face + "]";
    md.face = face;
    md.n = 3;
    md.m = 1;
    md.eps = params.at("eps");
    md.coordinate_names = {"X", "M", "C"};
    md.domain_hint = {{-0.2, 1.2}, {-0.2, 1.2}, {-0.2, 1.2}};

    DerivativeProvider p;
    p.n = 3;
    p.m = 1;
    p.f = [](const Vec& z) {
        return Vec{z[0] * z[1] * (1.0 - z[0]) * (1.0 - z[1])};
    };
    p.N = [](const Vec& z) {
        Matrix N(3, 1);
        N(0, 0) = z[1] - 0.7;
        N(1, 0) = 6.0 * z[2] / (1.0 + 2.0 * z[2]) - 1.5;
        N(2, 0) = 0.25 * (1.0 - z[0] - z[2]);
        return N;
    };
    p.Df = [](const Vec& z) {
        const double X = z[0], M = z[1];
        Matrix J(1, 3);
        J(0, 0) = M * (1.0 - M) * (1.0 - 2.0 * X);
        J(0, 1) = X * (1.0 - X) * (1.0 - 2.0 * M);
        return J;
    };
    p.D2f = [](const Vec& z) {
        const double X = z[0], M = z[1];
        MultilinearMap H(1, {3, 3});
        H.at({0, 0, 0}) = 2.0 * M * (M - 1.0);
        H.at({0, 0, 1}) = (1.0 - 2.0 * X) * (1.0 - 2.0 * M);
        H.at({0, 1, 0}) = (1.0 - 2.0 * X) * (1.0 - 2.0 * M);
        H.at({0, 1, 1}) = 2.0 * X * (X - 1.0);
        return H;
    };
    p.D3f = [](const Vec& z) {
        const double X = z[0], M = z[1];
        MultilinearMap T(1, {3, 3, 3});
        const double xxm = -2.0 * (1.0 - 2.0 * M);
        const double xmm = -2.0 * (1.0 - 2.0 * X);
        T.at({0, 0, 0, 1}) = xxm;
        T.at({0, 0, 1, 0}) = xxm;
        T.at({0, 1, 0, 0}) = xxm;
        T.at({0, 0, 1, 1}) = xmm;
        T.at({0, 1, 0, 1}) = xmm;
        T.at({0, 1, 1, 0}) = xmm;
        return T;
    };
    p.DN = [](const Vec& z) {
        const double C = z[2];
        MultilinearMap D(3, {1, 3});
        const double w = 1.0 + 2.0 * C;
        D.at({0, 0, 1}) = 1.0;
        D.at({1, 0, 2}) = 6.0 / (w * w);
        D.at({2, 0, 0}) = -0.25;
        D.at({2, 0, 2}) = -0.25;
        return D;
    };
    p.D2N = [](const Vec& z) {
        const double C = z[2];
        MultilinearMap D(3, {1, 3, 3});
        const double w = 1.0 + 2.0 * C;
        D.at({1, 0, 2, 2}) = -24.0 / (w * w * w);
        return D;
    };
    md.provider = std::move(p);

    md.full_field = [](const Vec& z, double e) { return mitotic_full_rhs(z, e); };
    md.G = [](const Vec& z, double e) {
        if (e != 0.0) {
            Vec full = mitotic_full_rhs(z, e);
            const Vec f0 = mitotic_full_rhs(z, 0.0);
            for (size_t i = 0; i < full.size(); ++i) full[i] = (full[i] - f0[i]) / e;
            return full;
        }
        // d/de at e = 0 by a fourth-order stencil; the right side is
        // polynomial of degree <= 3 in e, so this is exact up to rounding.
        const double h = 1e-3;
        const Vec p1 = mitotic_full_rhs(z, h), m1 = mitotic_full_rhs(z, -h);
        const Vec p2 = mitotic_full_rhs(z, 2 * h), m2 = mitotic_full_rhs(z, -2 * h);
        Vec g(z.size());
        for (size_t i = 0; i < g.size(); ++i)
            g[i] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
        return g;
    };

    md.known.equilibria.push_back(
        {{0.5, 0.7, 0.5}, 0, false, "saddle-focus equilibrium of the desingularized flow",
         "derived"});

    const auto add_cusp = [&md](Vec z, const std::string& label, double coeff,
                                const std::string& cusp_prov) {
        md.known.contact_points.push_back({z, 2, true, label, "reference"});
        md.known.coefficients.push_back({"third-order coefficient at " + label,
                                         "third_order_coefficient", std::move(z), coeff,
                                         cusp_prov});
    };
    KnownCurve fold_line;
    fold_line.s_lo = 0.05;
    fold_line.s_hi = 0.95;
    fold_line.provenance = "reference";
    if (face == "X=0") {
        add_cusp({0.0, 0.7, 0.5}, "cusp K on X=0", 63.0 / 1600.0, "derived");
        fold_line.label = "fold line {X=0, M=7/10}";
        fold_line.point = [](double s) { return Vec{0.0, 0.7, s}; };
        fold_line.fold_coefficient = [](double s) {
            return (63.0 / 200.0) * (2.0 * s - 1.0) / (2.0 * s + 1.0);
        };
    } else if (face == "X=1") {
        add_cusp({1.0, 0.7, 0.5}, "cusp on X=1", 63.0 / 1600.0, "derived");
        fold_line.label = "fold line {X=1, M=7/10}";
        fold_line.point = [](double s) { return Vec{1.0, 0.7, s}; };
        fold_line.fold_coefficient = [](double s) {
            return (63.0 / 200.0) * (1.0 - 2.0 * s) / (2.0 * s + 1.0);
        };
        fold_line.provenance = "derived";
    } else if (face == "M=0") {
        add_cusp({0.5, 0.0, 0.5}, "cusp on M=0", 21.0 / 320.0, "derived");
        fold_line.label = "fold line {M=0, C=1/2}";
        fold_line.point = [](double s) { return Vec{s, 0.0, 0.5}; };
        fold_line.fold_coefficient = [](double s) {
            return (3.0 / 16.0) * s * (2.0 * s - 1.0) * (s - 1.0);
        };
        fold_line.provenance = "derived";
    } else {  // M=1
        add_cusp({0.5, 1.0, 0.5}, "cusp on M=1", 9.0 / 320.0, "derived");
        fold_line.label = "fold line {M=1, C=1/2}";
        fold_line.point = [](double s) { return Vec{s, 1.0, 0.5}; };
        fold_line.fold_coefficient = [](double s) {
            return -(3.0 / 16.0) * s * (2.0 * s - 1.0) * (s - 1.0);
        };
        fold_line.provenance = "derived";
    }
    md.known.contact_curves.push_back(std::move(fold_line));
    return md;
}

}  // namespace

std::vector<std::string> base_names() {
    return {"planar_parabola", "cusp_normal_form", "ac_family", "three_component",
            "mitotic"};
}

std::vector<ParameterSpec> parameter_specs(const std::string& base_name) {
    std::vector<ParameterSpec> specs;
    if (base_name == "three_component") {
        specs.push_back(positive("alpha1", 0.2));
        ParameterSpec a2 = positive("alpha2", 2.0);
        a2.lo = 1.0;
        a2.constraint = "alpha2 > 1";
        specs.push_back(a2);
        specs.push_back(positive("alpha3", 0.2));
        specs.push_back(nonneg("eps", 0.0005));
    } else if (base_name == "mitotic") {
        specs.push_back(nonneg("eps", 0.0021));
    } else if (base_name == "ac_family") {
        ParameterSpec c;
        c.name = "c";
        c.value = 2;
        c.lo = 1;
        c.hi = 6;
        c.integer = true;
        c.constraint = "c integer in 1..6";
        specs.push_back(c);
        specs.push_back(nonneg("eps", 0.0));
    } else {
        specs.push_back(nonneg("eps", 0.0));
    }
    return specs;
}

FactorizedModel build_model(const std::string& base_name, const std::string& face,
                            const std::map<std::string, double>& params) {
    FactorizedModel md;
    if (base_name == "planar_parabola") md = build_planar(params);
    else if (base_name == "cusp_normal_form") md = build_cusp(params);
    else if (base_name == "ac_family") md = build_ac(params);
    else if (base_name == "three_component") md = build_three_component(params);
    else md = build_mitotic(face, params);

    std::vector<ParameterSpec> specs = parameter_specs(base_name);
    for (auto& s : specs) s.value = params.at(s.name);
    md.parameters = std::move(specs);
    return md;
}

}  // namespace detail
}  // namespace contactkit
