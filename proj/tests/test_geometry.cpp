#include <cmath>
#include <random>

#include "contactkit/classify.hpp"
#include "contactkit/geometry.hpp"
#include "doctest.h"

using namespace contactkit;

namespace {

// Copy of a model with the analytic tensors removed, forcing every derivative
// through finite differences.
FactorizedModel fd_only(FactorizedModel md) {
    md.provider.Df = nullptr;
    md.provider.D2f = nullptr;
    md.provider.D3f = nullptr;
    md.provider.DN = nullptr;
    md.provider.D2N = nullptr;
    return md;
}

}  // namespace

TEST_CASE("projection returns on-manifold seeds unchanged") {
    const FactorizedModel md = load_model("planar_parabola");
    const Vec seed{0.25, 1.0 - 0.0625};
    const Vec zs = project_to_S(md, seed);
    CHECK(zs[0] == seed[0]);
    CHECK(zs[1] == seed[1]);
}

TEST_CASE("projection onto the parabola is the minimal-norm Gauss-Newton limit") {
    const FactorizedModel md = load_model("planar_parabola");
    const Vec zs = project_to_S(md, {0.3, 0.95});
    CHECK(inf_norm(md.provider.f(zs)) <= 1e-12);
    // The Moore-Penrose step moves along the gradient direction, so the limit
    // shifts in x as well as y.
    CHECK(zs[0] == doctest::Approx(0.28221959).epsilon(1e-5));
    CHECK(zs[1] == doctest::Approx(0.92035210).epsilon(1e-5));
}

TEST_CASE("projection moves a near-face seed onto the mitotic face") {
    const FactorizedModel md = load_model("mitotic[X=0]");
    const Vec zs = project_to_S(md, {0.001, 0.4, 0.3});
    CHECK(inf_norm(md.provider.f(zs)) <= 1e-12);
    CHECK(std::fabs(zs[0]) <= 1e-9);
    CHECK(zs[1] == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(zs[2] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("projection failure raises ProjectionError") {
    const FactorizedModel md = load_model("mitotic");
    // At X = M = 1/2 the gradient of f vanishes, so Gauss-Newton stalls.
    CHECK_THROWS_AS(project_to_S(md, {0.5, 0.5, 0.3}), ProjectionError);
}

TEST_CASE("contact search finds both parabola tangency points") {
    const FactorizedModel md = load_model("planar_parabola");
    const double xm = (2.0 - std::sqrt(2.0)) / 2.0;
    const double xp = (2.0 + std::sqrt(2.0)) / 2.0;

    const Vec lo = find_contact_point(md, {0.4, 1 - 0.16});
    CHECK(std::fabs(lo[0] - xm) <= 1e-10);
    CHECK(std::fabs(lo[1] - (1 - xm * xm)) <= 1e-10);

    const Vec hi = find_contact_point(md, {1.3, 1 - 1.69});
    CHECK(std::fabs(hi[0] - xp) <= 1e-10);
    CHECK(std::fabs(hi[1] - (1 - xp * xp)) <= 1e-10);
}

TEST_CASE("contact search lands on the oscillator contact line") {
    const FactorizedModel md = load_model("three_component");
    const Vec z = find_contact_point(md, {0.6, 0.1, 0.5});
    CHECK(std::fabs(z[0] - 0.5) <= 1e-10);
    CHECK(std::fabs(z[1]) <= 1e-10);
    CHECK(inf_norm(contact_residual(md, z)) <= 1e-12);
}

TEST_CASE("contact search solves the augmented system for the standard cusp") {
    const FactorizedModel md = load_model("cusp_normal_form");
    const Vec z = find_contact_point(md, {0.05, -0.1, 0.18});
    CHECK(inf_norm(contact_residual(md, z)) <= 1e-12);
    CHECK(z[1] == doctest::Approx(-3 * z[2] * z[2]).epsilon(1e-10));
    CHECK(z[0] == doctest::Approx(2 * z[2] * z[2] * z[2]).epsilon(1e-8));
}

TEST_CASE("contact search failures and dimension guards") {
    const FactorizedModel mit = load_model("mitotic");
    CHECK_THROWS_AS(find_contact_point(mit, {0.5, 0.5, 0.3}), SearchError);

    FactorizedModel tiny;
    tiny.name = "line";
    tiny.n = 1;
    tiny.m = 1;
    tiny.provider.n = 1;
    tiny.provider.m = 1;
    tiny.provider.f = [](const Vec& z) { return Vec{z[0]}; };
    tiny.provider.N = [](const Vec&) {
        Matrix N(1, 1);
        N(0, 0) = 1.0;
        return N;
    };
    CHECK_THROWS_AS(find_contact_point(tiny, {0.2}), DimensionError);
}

TEST_CASE("analytic and finite-difference contact Jacobians agree") {
    for (const char* name : {"cusp_normal_form", "three_component", "mitotic"}) {
        const FactorizedModel md = load_model(name);
        const FactorizedModel fd = fd_only(md);
        REQUIRE(md.provider.has_analytic_tensors());
        REQUIRE(!fd.provider.has_analytic_tensors());
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> u(0.1, 0.9);
        for (int trial = 0; trial < 10; ++trial) {
            Vec z(md.n);
            for (double& x : z) x = u(rng);
            const Matrix Ja = contact_jacobian(md, z);
            const Matrix Jf = contact_jacobian(fd, z);
            const double scale = 1.0 + Ja.max_abs();
            for (int i = 0; i < Ja.rows(); ++i)
                for (int j = 0; j < Ja.cols(); ++j)
                    CHECK(std::fabs(Ja(i, j) - Jf(i, j)) <= 1e-5 * scale);
        }
    }
}

TEST_CASE("desingularized equilibrium of the oscillator is the saddle-focus") {
    const FactorizedModel md = load_model("three_component");
    const EquilibriumResult eq = desingularized_equilibria(md, {0.6, 0.9, 1.1});
    CHECK(std::fabs(eq.z[0] - 0.5) <= 1e-8);
    CHECK(std::fabs(eq.z[1] - 1.0) <= 1e-8);
    CHECK(std::fabs(eq.z[2] - 1.0) <= 1e-8);
    REQUIRE(eq.spectrum.eigenvalues.size() == 3);

    int real_negative = 0, complex_positive = 0;
    for (const auto& ev : eq.spectrum.eigenvalues) {
        if (std::fabs(ev.imag()) < 1e-8) {
            CHECK(ev.real() == doctest::Approx(-0.48668553).epsilon(1e-6));
            ++real_negative;
        } else {
            CHECK(ev.real() == doctest::Approx(0.04334277).epsilon(1e-5));
            CHECK(std::fabs(ev.imag()) == doctest::Approx(0.28339019).epsilon(1e-5));
            ++complex_positive;
        }
    }
    CHECK(real_negative == 1);
    CHECK(complex_positive == 2);
}

TEST_CASE("desingularized equilibrium of the cell-cycle system") {
    const FactorizedModel md = load_model("mitotic");
    const EquilibriumResult eq = desingularized_equilibria(md, {0.55, 0.8, 0.6});
    CHECK(std::fabs(eq.z[0] - 0.5) <= 1e-8);
    CHECK(std::fabs(eq.z[1] - 0.7) <= 1e-8);
    CHECK(std::fabs(eq.z[2] - 0.5) <= 1e-8);
}

TEST_CASE("equilibrium search fails where N never vanishes") {
    const FactorizedModel md = load_model("planar_parabola");
    CHECK_THROWS_AS(desingularized_equilibria(md, {0.0, 0.0}), SearchError);
}

TEST_CASE("equilibrium search requires a single fast equation") {
    FactorizedModel md;
    md.name = "wide";
    md.n = 3;
    md.m = 2;
    md.provider.n = 3;
    md.provider.m = 2;
    md.provider.f = [](const Vec& z) { return Vec{z[0], z[1]}; };
    md.provider.N = [](const Vec&) {
        Matrix N(3, 2);
        N(0, 0) = 1.0;
        N(1, 1) = 1.0;
        return N;
    };
    CHECK_THROWS_AS(desingularized_equilibria(md, {0.1, 0.1, 0.1}), DimensionError);
}
