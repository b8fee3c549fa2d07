#pragma once
// Special functions: cylinder and spherical Bessel families, Legendre,
// spherical harmonics. Real cylinder orders go through libstdc++; everything
// needed at complex argument is evaluated by series / recurrence (arguments
// in this library are small, |z| <~ 3, where these are machine accurate).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "subres/types.hpp"

namespace subres::special {

// ---- real-argument cylinder Bessel -------------------------------------

inline double cyl_J(int n, double x) {
    if (n < 0) return (n & 1) ? -std::cyl_bessel_j(-n, x) : std::cyl_bessel_j(-n, x);
    return std::cyl_bessel_j(double(n), x);
}

inline double cyl_Y(int n, double x) {
    if (x <= 0.0) throw std::domain_error("cyl_Y: x must be > 0");
    if (n < 0) return (n & 1) ? -std::cyl_neumann(-n, x) : std::cyl_neumann(-n, x);
    return std::cyl_neumann(double(n), x);
}

inline cplx hank1(int n, double x) { return {cyl_J(n, x), cyl_Y(n, x)}; }

inline double cyl_Jp(int n, double x) {
    return 0.5 * (cyl_J(n - 1, x) - cyl_J(n + 1, x));
}
inline cplx hank1p(int n, double x) {
    return 0.5 * (hank1(n - 1, x) - hank1(n + 1, x));
}

// S_n(z) = sum_j (-z^2/4)^j / (j! (n+1)_j),  J_n(z) = (z/2)^n / n! * S_n(z).
// Normalized series factor; safe where (z/2)^n alone would underflow.
inline cplx bessel_series_factor(int n, cplx z) {
    cplx zz = -0.25 * z * z;
    cplx t = 1.0, s = 1.0;
    for (int j = 1; j < 64; ++j) {
        t *= zz / double(j * (n + j));
        s += t;
        if (std::abs(t) < 1e-18 * std::abs(s)) break;
    }
    return s;
}

// ---- complex-argument spherical Bessel ----------------------------------

// j_l by ascending series: j_l(z) = z^l / (2l+1)!! * sum_m (-z^2/2)^m / (m! (2l+3)(2l+5)...(2l+1+2m))
inline cplx sph_j(int l, cplx z) {
    cplx pref = 1.0;
    for (int m = 1; m <= l; ++m) pref *= z / double(2 * m + 1);
    cplx t = 1.0, s = 1.0;
    cplx z2 = -0.5 * z * z;
    for (int m = 1; m < 80; ++m) {
        t *= z2 / (double(m) * double(2 * l + 1 + 2 * m));
        s += t;
        if (std::abs(t) < 1e-18 * std::abs(s)) break;
    }
    return pref * s;
}

// y_l by upward recurrence from closed forms (stable upward).
inline cplx sph_y(int l, cplx z) {
    if (z == 0.0) throw std::domain_error("sph_y: z = 0");
    cplx y0 = -std::cos(z) / z;
    if (l == 0) return y0;
    cplx y1 = -std::cos(z) / (z * z) - std::sin(z) / z;
    for (int m = 1; m < l; ++m) {
        cplx y2 = double(2 * m + 1) / z * y1 - y0;
        y0 = y1;
        y1 = y2;
    }
    return y1;
}

inline cplx sph_h(int l, cplx z) { return sph_j(l, z) + cplx(0, 1) * sph_y(l, z); }

// f_l' = f_{l-1} - (l+1)/z f_l  (any of j, y, h)
inline cplx sph_jp(int l, cplx z) {
    if (l == 0) return -sph_j(1, z);
    return sph_j(l - 1, z) - double(l + 1) / z * sph_j(l, z);
}
inline cplx sph_yp(int l, cplx z) {
    if (l == 0) return -sph_y(1, z);
    return sph_y(l - 1, z) - double(l + 1) / z * sph_y(l, z);
}
inline cplx sph_hp(int l, cplx z) { return sph_jp(l, z) + cplx(0, 1) * sph_yp(l, z); }

// ---- Legendre / spherical harmonics -------------------------------------

inline double legendre_p(int l, double x) {
    double p0 = 1.0;
    if (l == 0) return p0;
    double p1 = x;
    for (int m = 1; m < l; ++m) {
        double p2 = (double(2 * m + 1) * x * p1 - double(m) * p0) / double(m + 1);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Associated Legendre P_l^m (Condon-Shortley phase), m >= 0, |x| <= 1.
inline double assoc_legendre(int l, int m, double x) {
    if (m < 0 || m > l) throw std::invalid_argument("assoc_legendre: need 0 <= m <= l");
    double pmm = 1.0;
    if (m > 0) {
        double sx = std::sqrt((1.0 - x) * (1.0 + x));
        double f = 1.0;
        for (int i = 0; i < m; ++i) {
            pmm *= -f * sx;
            f += 2.0;
        }
    }
    if (l == m) return pmm;
    double pm1 = x * double(2 * m + 1) * pmm;
    if (l == m + 1) return pm1;
    for (int ll = m + 2; ll <= l; ++ll) {
        double p = (x * double(2 * ll - 1) * pm1 - double(ll + m - 1) * pmm) / double(ll - m);
        pmm = pm1;
        pm1 = p;
    }
    return pm1;
}

// Orthonormal complex Y_lm(theta, phi); Y_{l,-m} = (-1)^m conj(Y_lm).
inline cplx sph_harm(int l, int m, double cos_theta, double phi) {
    int am = std::abs(m);
    if (am > l) throw std::invalid_argument("sph_harm: |m| > l");
    double lognum = 0.0;  // log((l-|m|)!/(l+|m|)!)
    for (int i = l - am + 1; i <= l + am; ++i) lognum -= std::log(double(i));
    double norm = std::sqrt(double(2 * l + 1) / (4.0 * pi) * std::exp(lognum));
    double p = assoc_legendre(l, am, cos_theta);
    cplx val = norm * p * std::exp(cplx(0.0, am * phi));
    if (m < 0) val = (am & 1) ? -std::conj(val) : std::conj(val);
    return val;
}

}  // namespace subres::special
