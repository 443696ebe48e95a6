#include <cmath>
#include <random>

#include "contactkit/derivatives.hpp"
#include "doctest.h"

using namespace contactkit;

namespace {

// Scalar test system with nonconstant N: f(x,y) = y + x^2 - 1, N = (x-2, 1).
DerivativeProvider parabola_provider(bool analytic) {
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
    if (analytic) {
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
        p.D3f = [](const Vec&) { return MultilinearMap(1, {2, 2, 2}); };
        p.DN = [](const Vec&) {
            MultilinearMap D(2, {1, 2});
            D.at({0, 0, 0}) = 1.0;
            return D;
        };
        p.D2N = [](const Vec&) { return MultilinearMap(2, {1, 2, 2}); };
    }
    return p;
}

// Standard-form cubic: f = x + y z + z^3, N = e_3.
DerivativeProvider cusp_provider(bool analytic) {
    DerivativeProvider p;
    p.n = 3;
    p.m = 1;
    p.f = [](const Vec& z) { return Vec{z[0] + z[1] * z[2] + z[2] * z[2] * z[2]}; };
    p.N = [](const Vec&) {
        Matrix N(3, 1);
        N(2, 0) = 1.0;
        return N;
    };
    if (analytic) {
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
        p.DN = [](const Vec&) { return MultilinearMap(3, {1, 3}); };
        p.D2N = [](const Vec&) { return MultilinearMap(3, {1, 3, 3}); };
    }
    return p;
}

}  // namespace

TEST_CASE("jacobian of the identity and FD fallback") {
    DerivativeProvider p;
    p.n = 1;
    p.m = 1;
    p.f = [](const Vec& z) { return Vec{z[0]}; };
    p.N = [](const Vec&) { return Matrix::identity(1); };
    const Matrix J = jacobian_f(p, {0.3});
    CHECK(J(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("FD tensors match analytic tensors on the cubic surface") {
    const DerivativeProvider fd = cusp_provider(false);
    const DerivativeProvider an = cusp_provider(true);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int rep = 0; rep < 10; ++rep) {
        const Vec z{u(rng), u(rng), u(rng)};
        const Matrix Jf = jacobian_f(fd, z);
        const Matrix Ja = an.Df(z);
        CHECK((Jf - Ja).max_abs() < 1e-8);

        const MultilinearMap Hf = hessian_f(fd, z);
        const MultilinearMap Ha = an.D2f(z);
        for (size_t i = 0; i < Hf.data().size(); ++i)
            CHECK(std::fabs(Hf.data()[i] - Ha.data()[i]) < 1e-6);

        const MultilinearMap Tf = third_f(fd, z);
        const MultilinearMap Ta = an.D3f(z);
        for (size_t i = 0; i < Tf.data().size(); ++i)
            CHECK(std::fabs(Tf.data()[i] - Ta.data()[i]) < 1e-4);
    }
}

TEST_CASE("linear map has zero Hessian") {
    DerivativeProvider p;
    p.n = 3;
    p.m = 2;
    p.f = [](const Vec& z) { return Vec{z[0] + 2 * z[1], z[2] - z[0]}; };
    p.N = [](const Vec&) {
        Matrix N(3, 2);
        N(0, 0) = 1.0;
        N(1, 1) = 1.0;
        return N;
    };
    CHECK(hessian_f(p, {0.4, -0.2, 1.1}).max_abs() < 1e-6);
}

TEST_CASE("directional chain on the cubic surface at the origin") {
    const Vec origin{0, 0, 0};
    const Vec one{1.0};
    for (ChainMode mode : {ChainMode::Auto, ChainMode::ForceFD}) {
        const DerivativeProvider p = cusp_provider(true);
        const ChainValues cv = chain_values(p, origin, one, one, 4, mode);
        CHECK(std::fabs(cv.projected[0]) < 1e-12);
        CHECK(std::fabs(cv.projected[1]) < (mode == ChainMode::Auto ? 1e-12 : 1e-8));
        CHECK(std::fabs(cv.projected[2]) < (mode == ChainMode::Auto ? 1e-12 : 1e-5));
        CHECK(cv.projected[3] ==
              doctest::Approx(6.0).epsilon(mode == ChainMode::Auto ? 1e-12 : 1e-3));
        CHECK(cv.analytic_path == (mode == ChainMode::Auto));
    }
}

TEST_CASE("FD chain matches closed forms away from the contact point") {
    // Parabola system: w = N r, g1 = Df w, g2 = D2f(w,w) + Df DN(w,r).
    const DerivativeProvider p = parabola_provider(true);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const Vec one{1.0};
    for (int rep = 0; rep < 100; ++rep) {
        const Vec z{u(rng), u(rng)};
        const ChainValues an = chain_values(p, z, one, one, 3, ChainMode::Auto);
        const ChainValues fd = chain_values(p, z, one, one, 3, ChainMode::ForceFD);
        for (int j = 1; j <= 3; ++j) {
            const double tol = j <= 2 ? 1e-5 : 1e-3;
            const double scale = 1.0 + std::fabs(an.projected[static_cast<size_t>(j)]);
            CHECK(std::fabs(an.projected[static_cast<size_t>(j)] -
                            fd.projected[static_cast<size_t>(j)]) < tol * scale);
        }
    }
}

TEST_CASE("chain homogeneity in r and linearity in l") {
    const DerivativeProvider p = parabola_provider(true);
    const Vec z{0.6, 0.9};
    const Vec one{1.0};
    const Vec r2{2.0};
    const ChainValues base = chain_values(p, z, one, one, 3);
    const ChainValues twice = chain_values(p, z, r2, one, 3);
    for (int j = 0; j <= 3; ++j) {
        const double expect = std::pow(2.0, j) * base.projected[static_cast<size_t>(j)];
        CHECK(twice.projected[static_cast<size_t>(j)] ==
              doctest::Approx(expect).epsilon(1e-12).scale(1 + std::fabs(expect)));
    }

    // FD path homogeneity at 1e-6 relative.
    const ChainValues basef = chain_values(p, z, one, one, 3, ChainMode::ForceFD);
    const ChainValues twicef = chain_values(p, z, r2, one, 3, ChainMode::ForceFD);
    for (int j = 1; j <= 3; ++j) {
        const double expect = std::pow(2.0, j) * basef.projected[static_cast<size_t>(j)];
        const double tol = j <= 2 ? 1e-6 : 1e-3;
        CHECK(std::fabs(twicef.projected[static_cast<size_t>(j)] - expect) <=
              tol * (1 + std::fabs(expect)));
    }

    // l-linearity on a genuinely 2-codimensional system.
    DerivativeProvider q;
    q.n = 3;
    q.m = 2;
    q.f = [](const Vec& z3) {
        return Vec{z3[0] * z3[0] - z3[2], z3[1] + z3[0] * z3[2]};
    };
    q.N = [](const Vec& z3) {
        Matrix N(3, 2);
        N(0, 0) = 1.0;
        N(1, 1) = 1.0;
        N(2, 0) = z3[0];
        N(2, 1) = -1.0;
        return N;
    };
    const Vec z3{0.4, -0.3, 0.2};
    const Vec r{0.6, 0.8};
    const Vec l1{1.0, 0.0}, l2{0.0, 1.0}, lmix{3.0, -2.0};
    const ChainValues c1 = chain_values(q, z3, r, l1, 2);
    const ChainValues c2 = chain_values(q, z3, r, l2, 2);
    const ChainValues cm = chain_values(q, z3, r, lmix, 2);
    for (int j = 0; j <= 2; ++j) {
        const double expect = 3.0 * c1.projected[static_cast<size_t>(j)] -
                              2.0 * c2.projected[static_cast<size_t>(j)];
        CHECK(cm.projected[static_cast<size_t>(j)] ==
              doctest::Approx(expect).epsilon(1e-12).scale(1 + std::fabs(expect)));
    }
}

TEST_CASE("standard-form chain reduces to pure partial derivatives") {
    // With N = e_n constant, g_j is the pure j-th partial along the last
    // coordinate: for f = x + yz + z^3 at a generic point, dz^j f.
    const DerivativeProvider p = cusp_provider(true);
    const Vec z{0.2, -0.4, 0.3};
    const Vec one{1.0};
    const ChainValues cv = chain_values(p, z, one, one, 4);
    CHECK(cv.projected[1] == doctest::Approx(z[1] + 3 * z[2] * z[2]));
    CHECK(cv.projected[2] == doctest::Approx(6 * z[2]));
    CHECK(cv.projected[3] == doctest::Approx(6.0));
    CHECK(std::fabs(cv.projected[4]) < 1e-3);
}

TEST_CASE("chain gradients reproduce the contact test matrix") {
    const DerivativeProvider p = cusp_provider(true);
    const Vec origin{0, 0, 0};
    const Vec one{1.0};
    const Matrix C0 = chain_gradients(p, origin, one, one, 2);
    REQUIRE(C0.rows() == 2);
    REQUIRE(C0.cols() == 3);
    CHECK(C0(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(C0(0, 1) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(C0(0, 2) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(C0(1, 0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(C0(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(C0(1, 2) == doctest::Approx(0.0).epsilon(1e-10));

    // FD rows (no analytic tensors) agree to FD accuracy.
    const DerivativeProvider pf = cusp_provider(false);
    const Matrix C0f = chain_gradients(pf, origin, one, one, 3);
    CHECK((C0f - chain_gradients(p, origin, one, one, 3)).max_abs() < 1e-4);
}

TEST_CASE("validate_provider flags a wrong tensor") {
    DerivativeProvider good = cusp_provider(true);
    const std::vector<Vec> pts{{0.1, 0.2, -0.3}, {-0.4, 0.5, 0.2}};
    const ProviderReport ok = validate_provider(good, pts);
    CHECK(ok.passed);

    DerivativeProvider bad = cusp_provider(true);
    bad.Df = [](const Vec& z) {
        Matrix J(1, 3);
        J(0, 0) = 1.0;
        J(0, 1) = z[2] + 0.5;  // wrong
        J(0, 2) = z[1] + 3.0 * z[2] * z[2];
        return J;
    };
    const ProviderReport fail = validate_provider(bad, pts);
    CHECK_FALSE(fail.passed);
    bool flagged = false;
    for (const auto& c : fail.checks)
        if (c.tensor == "Df" && c.flagged) flagged = true;
    CHECK(flagged);
}
