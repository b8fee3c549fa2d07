#pragma once
// Free-space, quasiperiodic, and periodic Helmholtz Green's functions.
//
// Convention: (lap + k^2) G = dirac, so
//   3D: G^k(x) = -e^{ik|x|}/(4 pi |x|)
//   2D: G^k(x) = -(i/4) H0(k|x|) for k > 0, (1/2 pi) log|x| at k = 0.
// Quasiperiodic sums run over a 1D chain (ambient 2) or a square lattice
// (ambient 3) of period L with Bloch phase e^{i alpha . m}.
//
// Truncated sums use a C-infinity radial window, so both representations
// converge superalgebraically in the cutoff away from Wood anomalies.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "subres/special.hpp"
#include "subres/types.hpp"

namespace subres::greens {

using point3 = std::array<double, 3>;

struct LatticeSumPolicy {
    int M_sp = 160;           // spatial cutoff: images with |m| <= M_sp
    int M_q = 120;            // spectral cutoff: dual vectors |q| <= 2 pi M_q / L
    double target_tol = 1e-10;

    LatticeSumPolicy() = default;
    LatticeSumPolicy(int msp, int mq, double tol) : M_sp(msp), M_q(mq), target_tol(tol) {
        if (msp < 1 || mq < 1) throw std::invalid_argument("LatticeSumPolicy: cutoffs >= 1");
        if (tol <= 0.0) throw std::invalid_argument("LatticeSumPolicy: target_tol > 0");
    }
};

// Bloch parameter, folded to the first Brillouin zone [-pi/L, pi/L]^{dim-1}.
struct QuasiMomentum {
    std::array<double, 2> alpha{0.0, 0.0};  // one component used when ambient_dim == 2
    int ambient_dim = 3;

    QuasiMomentum() = default;
    QuasiMomentum(double a1, int dim) : alpha{a1, 0.0}, ambient_dim(dim) {}
    QuasiMomentum(double a1, double a2) : alpha{a1, a2}, ambient_dim(3) {}

    QuasiMomentum folded(double L) const {
        QuasiMomentum out = *this;
        const double b = 2.0 * pi / L;
        for (int c = 0; c < ambient_dim - 1; ++c) {
            double v = std::remainder(out.alpha[c], b);
            out.alpha[c] = v;
        }
        if (ambient_dim == 2) out.alpha[1] = 0.0;
        return out;
    }
    double norm() const {
        return ambient_dim == 2 ? std::abs(alpha[0]) : std::hypot(alpha[0], alpha[1]);
    }
};

namespace detail {

// C-infinity taper on (0,1): 1 at 0+, 0 at 1-.
inline double window(double u) {
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    return std::exp(2.0 * std::exp(-1.0 / u) / (u - 1.0));
}

inline double norm2(const point3& x) { return std::hypot(x[0], x[1], x[2]); }

}  // namespace detail

inline cplx green_free(const point3& x, double k, int dim) {
    if (dim == 3) {
        double r = detail::norm2(x);
        if (r == 0.0) throw std::domain_error("green_free: x = 0");
        return -std::exp(cplx(0.0, k * r)) / (4.0 * pi * r);
    }
    double r = std::hypot(x[0], x[1]);
    if (r == 0.0) throw std::domain_error("green_free: x = 0");
    if (k == 0.0) return std::log(r) / (2.0 * pi);
    return cplx(0.0, -0.25) * special::hank1(0, k * r);
}

// gradient w.r.t. x
inline std::array<cplx, 3> green_free_grad(const point3& x, double k, int dim) {
    if (dim == 3) {
        double r = detail::norm2(x);
        if (r == 0.0) throw std::domain_error("green_free_grad: x = 0");
        cplx f = (1.0 - cplx(0.0, k * r)) * std::exp(cplx(0.0, k * r)) / (4.0 * pi * r * r * r);
        return {f * x[0], f * x[1], f * x[2]};
    }
    double r = std::hypot(x[0], x[1]);
    if (r == 0.0) throw std::domain_error("green_free_grad: x = 0");
    cplx f = (k == 0.0) ? cplx(1.0 / (2.0 * pi * r * r), 0.0)
                        : cplx(0.0, 0.25) * k * special::hank1(1, k * r) / r;
    return {f * x[0], f * x[1], 0.0};
}

// distance of (alpha, k) to the nearest Wood anomaly k = |alpha + q|
inline double wood_distance(const QuasiMomentum& qm, double k, double L) {
    const double b = 2.0 * pi / L;
    const int shells = int(std::ceil(k * L / (2.0 * pi))) + 2;
    double best = std::numeric_limits<double>::infinity();  // minimum is attained within the scanned shells
    if (qm.ambient_dim == 2) {
        for (int n = -shells; n <= shells; ++n)
            best = std::min(best, std::abs(std::abs(qm.alpha[0] + n * b) - k));
    } else {
        for (int n1 = -shells; n1 <= shells; ++n1)
            for (int n2 = -shells; n2 <= shells; ++n2)
                best = std::min(best,
                                std::abs(std::hypot(qm.alpha[0] + n1 * b, qm.alpha[1] + n2 * b) - k));
    }
    return best;
}

inline void assert_no_wood(const QuasiMomentum& qm, double k, double L) {
    if (wood_distance(qm, k, L) < 1e-10 * std::max(1.0, k))
        throw std::domain_error("lattice sum at a Wood anomaly");
}

// ---- spatial (image-sum) representation ---------------------------------

inline cplx green_quasi_spatial(const point3& x, const QuasiMomentum& qm, double k, double L,
                                const LatticeSumPolicy& policy = {}, double* tail_estimate = nullptr) {
    assert_no_wood(qm, k, L);
    const int M = policy.M_sp;
    const int dim = qm.ambient_dim;
    // two completed windowed estimators (cutoffs M and 3M/4) accumulated in one
    // pass; their difference is the convergence indicator
    const double den_main = M + 0.5, den_sub = 0.75 * M + 0.5;
    cplx sum = 0.0, sub = 0.0;
    if (dim == 2) {
        for (int shell = 0; shell <= M; ++shell) {
            cplx acc = 0.0;
            for (int sgn : {-1, +1}) {
                if (shell == 0 && sgn < 0) continue;  // the two m = 0 copies coincide
                const int m = sgn * shell;
                point3 xs{x[0] - m * L, x[1], 0.0};
                acc += std::exp(cplx(0.0, qm.alpha[0] * m * L)) * green_free(xs, k, 2);
            }
            sum += detail::window(shell / den_main) * acc;
            sub += detail::window(shell / den_sub) * acc;
        }
    } else {
        for (int shell = 0; shell <= M; ++shell) {
            for (int m1 = -shell; m1 <= shell; ++m1)
                for (int m2 = -shell; m2 <= shell; ++m2) {
                    if (std::max(std::abs(m1), std::abs(m2)) != shell) continue;
                    double rm = std::hypot(double(m1), double(m2));
                    double wm = detail::window(rm / den_main);
                    if (wm == 0.0 && rm / den_sub >= 1.0) continue;
                    point3 xs{x[0] - m1 * L, x[1] - m2 * L, x[2]};
                    cplx t = std::exp(cplx(0.0, (qm.alpha[0] * m1 + qm.alpha[1] * m2) * L)) *
                             green_free(xs, k, 3);
                    sum += wm * t;
                    sub += detail::window(rm / den_sub) * t;
                }
        }
    }
    if (tail_estimate) *tail_estimate = std::abs(sum - sub);
    return sum;
}

// ---- spectral (Rayleigh) representation ----------------------------------

inline cplx green_quasi_spectral(const point3& x, const QuasiMomentum& qm, double k, double L,
                                 const LatticeSumPolicy& policy = {}, double* tail_estimate = nullptr) {
    assert_no_wood(qm, k, L);
    const int M = policy.M_q;
    const double b = 2.0 * pi / L;
    const double den_main = M + 0.5, den_sub = 0.75 * M + 0.5;
    cplx sum = 0.0, sub = 0.0;
    if (qm.ambient_dim == 2) {
        const double ax2 = std::abs(x[1]);
        for (int shell = 0; shell <= M; ++shell) {
            cplx acc = 0.0;
            for (int sgn : {-1, +1}) {
                if (shell == 0 && sgn < 0) continue;  // the two n = 0 copies coincide
                double p = qm.alpha[0] + sgn * shell * b;
                cplx kz = std::sqrt(cplx(k * k - p * p, 0.0));
                if (kz.real() < 0.0) kz = -kz;
                acc += std::exp(cplx(0.0, p * x[0]) + cplx(0.0, 1.0) * kz * ax2) /
                       (2.0 * cplx(0.0, 1.0) * kz * L);
            }
            sum += detail::window(shell / den_main) * acc;
            sub += detail::window(shell / den_sub) * acc;
        }
    } else {
        const double ax3 = std::abs(x[2]);
        for (int shell = 0; shell <= M; ++shell) {
            for (int n1 = -shell; n1 <= shell; ++n1)
                for (int n2 = -shell; n2 <= shell; ++n2) {
                    if (std::max(std::abs(n1), std::abs(n2)) != shell) continue;
                    double rn = std::hypot(double(n1), double(n2));
                    double wm = detail::window(rn / den_main);
                    if (wm == 0.0 && rn / den_sub >= 1.0) continue;
                    double p1 = qm.alpha[0] + n1 * b, p2 = qm.alpha[1] + n2 * b;
                    cplx kz = std::sqrt(cplx(k * k - p1 * p1 - p2 * p2, 0.0));
                    if (kz.real() < 0.0) kz = -kz;
                    cplx t = std::exp(cplx(0.0, p1 * x[0] + p2 * x[1]) +
                                      cplx(0.0, 1.0) * kz * ax3) /
                             (2.0 * cplx(0.0, 1.0) * kz * L * L);
                    sum += wm * t;
                    sub += detail::window(rn / den_sub) * t;
                }
        }
    }
    if (tail_estimate) *tail_estimate = std::abs(sum - sub);
    return sum;
}

// both representations with cutoffs auto-raised until the tail estimates
// drop below tail_tol; the primary self-check of this module
struct CrossCheck {
    cplx spatial = 0.0, spectral = 0.0;
    double diff = 0.0;
    double tail_spatial = 0.0, tail_spectral = 0.0;
};

inline CrossCheck green_quasi_cross_check(const point3& x, const QuasiMomentum& qm, double k,
                                          double L, double tail_tol = 1e-9) {
    CrossCheck out;
    LatticeSumPolicy pol;
    const int cap = qm.ambient_dim == 2 ? 40000 : 1200;
    for (int M = pol.M_sp;; M *= 2) {
        pol.M_sp = M;
        out.spatial = green_quasi_spatial(x, qm, k, L, pol, &out.tail_spatial);
        if (out.tail_spatial < tail_tol || M > cap) break;
    }
    for (int M = pol.M_q;; M *= 2) {
        pol.M_q = M;
        out.spectral = green_quasi_spectral(x, qm, k, L, pol, &out.tail_spectral);
        if (out.tail_spectral < tail_tol || M > cap) break;
    }
    out.diff = std::abs(out.spatial - out.spectral);
    return out;
}

// ---- periodic (alpha = 0, k = 0) -----------------------------------------

inline double green_periodic(const point3& x, double L, int dim, const LatticeSumPolicy& policy = {}) {
    if (dim == 2) {
        // closed form: |x2|/2L + log E / 4 pi with the lattice-image product E
        double s = 2.0 * pi * x[0] / L, t = 2.0 * pi * std::abs(x[1]) / L;
        double emt = std::exp(-t);
        double sh = std::sin(0.5 * s);
        double E = (1.0 - emt) * (1.0 - emt) + 4.0 * emt * sh * sh;
        if (E == 0.0) throw std::domain_error("green_periodic: x on the source lattice");
        return std::abs(x[1]) / (2.0 * L) + std::log(E) / (4.0 * pi);
    }
    const int M = policy.M_q;
    const double b = 2.0 * pi / L;
    const double ax3 = std::abs(x[2]);
    double sum = ax3 / (2.0 * L * L);
    for (int n1 = -M; n1 <= M; ++n1)
        for (int n2 = -M; n2 <= M; ++n2) {
            if (n1 == 0 && n2 == 0) continue;
            double w = detail::window(std::hypot(double(n1), double(n2)) / (M + 0.5));
            if (w == 0.0) continue;
            double q = b * std::hypot(double(n1), double(n2));
            sum -= w * std::cos(b * (n1 * x[0] + n2 * x[1])) * std::exp(-q * ax3) / (2.0 * q * L * L);
        }
    return sum;
}

// ---- low-frequency expansion terms ---------------------------------------

struct LowFreqTerms {
    cplx singular;    // 1/(2 i omega w_n L^{dim-1})
    double periodic;  // G^{0,0}(x)
    double linear;    // alpha0 . xbar / (2 w_n L^{dim-1})
};

// alpha0 is the reduced quasimomentum alpha/omega (components of the incident
// direction), |alpha0| < 1; w_n = sqrt(1 - |alpha0|^2) is the normal component.
inline LowFreqTerms green_low_freq_terms(const point3& x, const QuasiMomentum& alpha0, double omega,
                                         double L, const LatticeSumPolicy& policy = {}) {
    const int dim = alpha0.ambient_dim;
    const double a2 = alpha0.norm() * alpha0.norm();
    if (a2 >= 1.0) throw std::domain_error("green_low_freq_terms: |alpha0| >= 1 (evanescent incidence)");
    if (omega <= 0.0) throw std::domain_error("green_low_freq_terms: omega must be > 0");
    const double wn = std::sqrt(1.0 - a2);
    const double cell = (dim == 3) ? L * L : L;
    LowFreqTerms t;
    t.singular = 1.0 / (2.0 * cplx(0.0, 1.0) * omega * wn * cell);
    t.periodic = green_periodic(x, L, dim, policy);
    double adotx = alpha0.alpha[0] * x[0] + (dim == 3 ? alpha0.alpha[1] * x[1] : 0.0);
    t.linear = adotx / (2.0 * wn * cell);
    return t;
}

}  // namespace subres::greens
