#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <subres/greens.hpp>

#include <cmath>

using namespace subres;
using namespace subres::greens;

TEST_CASE("free-space kernel values") {
    CHECK(green_free({1.0, 0.0, 0.0}, 0.0, 3).real() == doctest::Approx(-1.0 / (4.0 * pi)));
    CHECK(green_free({0.6, 0.0, 0.8}, 0.0, 3).imag() == 0.0);
    CHECK(std::abs(green_free({1.0, 0.0, 0.0}, 0.0, 2)) == doctest::Approx(0.0));  // log 1
    // radiating phase in 3D
    cplx g = green_free({0.0, 0.0, 2.0}, 1.3, 3);
    CHECK(g.real() == doctest::Approx(-std::cos(2.6) / (8.0 * pi)));
    CHECK(g.imag() == doctest::Approx(-std::sin(2.6) / (8.0 * pi)));
    CHECK_THROWS_AS(green_free({0.0, 0.0, 0.0}, 1.0, 3), std::domain_error);

    // gradient against central differences
    point3 x{0.31, -0.22, 0.47};
    auto gr = green_free_grad(x, 0.9, 3);
    double h = 1e-6;
    for (int c = 0; c < 3; ++c) {
        point3 xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        cplx fd = (green_free(xp, 0.9, 3) - green_free(xm, 0.9, 3)) / (2.0 * h);
        CHECK(std::abs(gr[c] - fd) < 1e-8);
    }
}

TEST_CASE("windowed spatial sum with zero shells is the central image") {
    LatticeSumPolicy pol;
    pol.M_sp = 0;
    point3 x{0.21, 0.33, 0.0};
    QuasiMomentum qm(0.4, 2);
    CHECK(std::abs(green_quasi_spatial(x, qm, 1.1, 1.0, pol) - green_free(x, 1.1, 2)) < 1e-15);

    point3 x3{0.21, 0.33, 0.17};
    QuasiMomentum qm3(0.4, -0.2);
    CHECK(std::abs(green_quasi_spatial(x3, qm3, 1.1, 1.0, pol) - green_free(x3, 1.1, 3)) < 1e-15);
}

TEST_CASE("Wood anomaly is rejected") {
    // alpha = k puts the q = 0 order exactly at cutoff
    CHECK_THROWS_AS(green_quasi_spatial({0.2, 0.1, 0.0}, QuasiMomentum(0.7, 2), 0.7, 1.0),
                    std::domain_error);
    CHECK_THROWS_AS(green_quasi_spectral({0.2, 0.1, 0.0}, QuasiMomentum(0.7, 2), 0.7, 1.0),
                    std::domain_error);
    // |alpha + 2 pi| = k for the 2D chain
    double k = 2.0 * pi + 0.3;
    CHECK_THROWS_AS(green_quasi_spatial({0.2, 0.1, 0.0}, QuasiMomentum(0.3, 2), k, 1.0),
                    std::domain_error);
    CHECK(wood_distance(QuasiMomentum(0.3, 2), 1.1, 1.0) > 0.1);
}

TEST_CASE("spatial and spectral representations agree (2D chain)") {
    const double L = 1.0, k = 1.589939349756, a = 0.765649014960;
    QuasiMomentum qm(a, 2);
    for (point3 x : {point3{-0.383, 0.245, 0.0}, point3{0.05, -0.41, 0.0}, point3{0.3, 0.09, 0.0}}) {
        auto c = green_quasi_cross_check(x, qm, k, L);
        CHECK(c.diff < 1e-8);
        CHECK(c.tail_spatial < 1e-9);
        CHECK(c.tail_spectral < 1e-9);
    }
}

TEST_CASE("spatial and spectral representations agree (3D planar lattice)") {
    QuasiMomentum qm(0.87, -0.44);
    for (point3 x : {point3{0.21, -0.33, 0.29}, point3{-0.12, 0.07, -0.4}}) {
        auto c = green_quasi_cross_check(x, qm, 1.31, 1.0);
        CHECK(c.diff < 1e-8);
    }
}

TEST_CASE("quasiperiodic reciprocity") {
    // G^{alpha,k}(x - y) = G^{-alpha,k}(y - x)
    const double k = 1.31, L = 1.0;
    QuasiMomentum qp(0.87, -0.44), qn(-0.87, 0.44);
    point3 d{0.23, -0.11, 0.31};
    point3 dneg{-d[0], -d[1], -d[2]};
    cplx a = green_quasi_spectral(d, qp, k, L);
    cplx b = green_quasi_spectral(dneg, qn, k, L);
    CHECK(std::abs(a - b) < 1e-10);

    QuasiMomentum qp2(0.61, 2), qn2(-0.61, 2);
    point3 e{0.23, -0.31, 0.0};
    point3 eneg{-e[0], -e[1], 0.0};
    CHECK(std::abs(green_quasi_spectral(e, qp2, 0.9, L) -
                   green_quasi_spectral(eneg, qn2, 0.9, L)) < 1e-10);
}

TEST_CASE("spectral sum at alpha = 0 has the 1/(2 i k cell) low-frequency pole") {
    const double L = 1.0;
    point3 x{0.2, -0.14, 0.08};
    for (double k : {1e-5, 1e-6}) {
        cplx g = green_quasi_spectral(x, QuasiMomentum(0.0, 0.0), k, L);
        cplx lead = 1.0 / (2.0 * cplx(0.0, 1.0) * k * L * L);
        // remainder is the O(1) periodic part
        CHECK(std::abs(g - lead) < 1.0);
        CHECK(std::abs(g) > 0.9 * std::abs(lead));
    }
}

TEST_CASE("periodic (k = 0) kernel: reality, evenness, far-field growth") {
    const double L = 1.0;

    // 2D closed form
    double g = green_periodic({0.13, 0.27, 0.0}, L, 2);
    CHECK(g == doctest::Approx(green_periodic({-0.13, 0.27, 0.0}, L, 2)));
    CHECK(g == doctest::Approx(green_periodic({0.13, -0.27, 0.0}, L, 2)));
    CHECK(std::abs(green_periodic({0.1, 10.0, 0.0}, L, 2) - 10.0 / (2.0 * L)) < 1e-12);
    CHECK_THROWS_AS(green_periodic({0.0, 0.0, 0.0}, L, 2), std::domain_error);

    // 3D windowed sum
    double g3 = green_periodic({0.13, -0.21, 0.33}, L, 3);
    CHECK(g3 == doctest::Approx(green_periodic({-0.13, 0.21, 0.33}, L, 3)).epsilon(1e-10));
    CHECK(g3 == doctest::Approx(green_periodic({0.13, -0.21, -0.33}, L, 3)).epsilon(1e-10));
    // |x3| -> infinity: linear growth |x3| / (2 L^2) up to a lattice constant
    double far1 = green_periodic({0.1, 0.2, 4.0}, L, 3);
    double far2 = green_periodic({0.1, 0.2, 5.0}, L, 3);
    CHECK(far2 - far1 == doctest::Approx(1.0 / (2.0 * L * L)).epsilon(1e-8));
}

TEST_CASE("low-frequency expansion of the quasiperiodic kernel") {
    const double L = 1.0;
    QuasiMomentum a0(0.6, 0.0);  // reduced momentum alpha / omega
    point3 x{0.17, 0.23, 0.31};

    auto t = green_low_freq_terms(x, a0, 0.05, L);
    CHECK(std::abs(t.singular - 1.0 / (2.0 * cplx(0.0, 1.0) * 0.05 * 0.8 * L * L)) < 1e-14);

    // defect after removing singular + periodic + linear terms is O(omega)
    double prev = 0.0;
    for (int j = 0; j < 3; ++j) {
        double om = 0.2 * std::pow(0.5, j);
        auto tj = green_low_freq_terms(x, a0, om, L);
        QuasiMomentum qm(a0.alpha[0] * om, a0.alpha[1] * om);
        cplx g = green_quasi_spectral(x, qm, om, L);
        double defect = std::abs(g - tj.singular - tj.periodic - tj.linear);
        if (j > 0) CHECK(prev / defect == doctest::Approx(2.0).epsilon(0.25));
        prev = defect;
    }

    CHECK_THROWS_AS(green_low_freq_terms(x, QuasiMomentum(1.0, 0.0), 0.05, L), std::domain_error);
    CHECK_THROWS_AS(green_low_freq_terms(x, a0, -1.0, L), std::domain_error);
}
