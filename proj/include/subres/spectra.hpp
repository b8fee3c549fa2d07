#pragma once
// Subwavelength spectrum of the PT dimer: closed-form eigenvalues of the
// weighted capacitance matrix, the exceptional gain/quasimomentum where the
// pair coalesces, quasiperiodic band structure, and a Muller iteration on the
// boundary-integral determinant for the full (non-asymptotic) resonances.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subres/capacitance.hpp"
#include "subres/layer_ops.hpp"
#include "subres/types.hpp"

namespace subres {

struct CapacitanceEigs {
    std::array<cplx, 2> lambda;     // ordered: lambda1 = a C11 - s, lambda2 = a C11 + s
    std::array<Eigen::Vector2cd, 2> vectors;
};

// eigenpairs of diag(a+ib, a-ib) [[C11, C12], [conj C12, C11]]:
//   lambda = a C11 -+ sqrt(a^2 |C12|^2 - b^2 (C11^2 - |C12|^2))
inline CapacitanceEigs capacitance_eigs(const CapacitanceSet& cap, const MaterialParams& mat) {
    const double C11 = cap.C11, c12a = std::abs(cap.C12);
    cplx s = std::sqrt(cplx(mat.a * mat.a * c12a * c12a -
                            mat.b * mat.b * (C11 * C11 - c12a * c12a),
                            0.0));
    CapacitanceEigs e;
    const cplx m11 = cplx(mat.a, mat.b) * C11;
    const cplx m12 = cplx(mat.a, mat.b) * cap.C12;
    for (int i = 0; i < 2; ++i) {
        e.lambda[std::size_t(i)] = mat.a * C11 + (i == 0 ? -s : s);
        e.vectors[std::size_t(i)] = Eigen::Vector2cd(m12, e.lambda[std::size_t(i)] - m11);
        double n = e.vectors[std::size_t(i)].norm();
        if (n > 0.0) e.vectors[std::size_t(i)] /= n;
    }
    return e;
}

// gain magnitude at which the two eigenvalues (and eigenvectors) coalesce
inline double exceptional_gain(const CapacitanceSet& cap, double a) {
    const double c12a = std::abs(cap.C12);
    const double gap2 = cap.C11 * cap.C11 - c12a * c12a;
    if (gap2 <= 0.0)
        throw std::invalid_argument("exceptional_gain: requires C11^2 > |C12|^2");
    return a * c12a / std::sqrt(gap2);
}

// leading-order resonance frequencies omega_i = sqrt(lambda_i / |D1|), Re >= 0 branch
inline std::array<cplx, 2> leading_order_frequencies(const CapacitanceEigs& eigs, double measure) {
    std::array<cplx, 2> om;
    for (int i = 0; i < 2; ++i) {
        cplx w = std::sqrt(eigs.lambda[std::size_t(i)] / measure);
        if (w.real() < 0.0) w = -w;
        om[std::size_t(i)] = w;
    }
    return om;
}

namespace detail {

// angle between the two eigenvectors at gain b, in extended precision via the
// cross product so the near-coalescent regime is resolved
inline double eigenvector_angle_ld(const CapacitanceSet& cap, double a_in, long double b) {
    using ld = long double;
    using cld = std::complex<ld>;
    const ld C11 = cap.C11;
    const cld C12(cap.C12.real(), cap.C12.imag());
    const ld c12a = std::abs(C12);
    const ld a = a_in;
    cld s = std::sqrt(cld(a * a * c12a * c12a - b * b * (C11 * C11 - c12a * c12a), 0.0L));
    const cld m11 = cld(a, b) * C11;
    const cld m12 = cld(a, b) * C12;
    std::array<cld, 2> v1{m12, (a * C11 - s) - m11};
    std::array<cld, 2> v2{m12, (a * C11 + s) - m11};
    ld n1 = std::sqrt(std::norm(v1[0]) + std::norm(v1[1]));
    ld n2 = std::sqrt(std::norm(v2[0]) + std::norm(v2[1]));
    if (n1 == 0.0L || n2 == 0.0L) return 0.0;
    cld cross = v1[0] * v2[1] - v1[1] * v2[0];
    ld sn = std::abs(cross) / (n1 * n2);
    if (sn > 1.0L) sn = 1.0L;
    return double(std::asin(sn));
}

}  // namespace detail

inline double eigenvector_angle(const CapacitanceSet& cap, const MaterialParams& mat) {
    return detail::eigenvector_angle_ld(cap, mat.a, mat.b);
}

// angle evaluated exactly at the coalescence gain, which is re-derived in
// extended precision here: passing the double-rounded b0 through MaterialParams
// perturbs the square root enough to dominate the (vanishing) true angle
inline double eigenvector_angle_at_ep(const CapacitanceSet& cap, double a) {
    using ld = long double;
    const ld C11 = cap.C11;
    const ld c12a = std::abs(std::complex<ld>(cap.C12.real(), cap.C12.imag()));
    const ld gap2 = C11 * C11 - c12a * c12a;
    if (gap2 <= 0.0L)
        throw std::invalid_argument("eigenvector_angle_at_ep: requires C11^2 > |C12|^2");
    const ld b0 = ld(a) * c12a / std::sqrt(gap2);
    return detail::eigenvector_angle_ld(cap, a, b0);
}

// ---- band structure ---------------------------------------------------------

struct BandPoint {
    double alpha = 0.0;  // scalar quasimomentum along Gamma-M
    std::array<cplx, 2> omega;
    double b0 = 0.0;     // exceptional gain of C^alpha
};

// sweep alpha in (0, pi/L] for a chain of disk dimers; npts points with the
// Gamma endpoint clipped to alpha_min = 1e-3 pi/L where the periodic problem
// takes over
inline std::vector<BandPoint> band_structure(const PtDimer& dimer, const LatticeConfig& lattice,
                                             const MaterialParams& mat, int npts = 200,
                                             int basis_order = 0) {
    if (npts < 2) throw std::invalid_argument("band_structure: npts >= 2 required");
    std::vector<BandPoint> out;
    out.reserve(std::size_t(npts));
    const double aM = pi / lattice.L;
    const double amin = 1e-3 * aM;
    const double measure = dimer.shapes[0].measure();
    for (int j = 1; j <= npts; ++j) {
        double alpha = aM * double(j) / double(npts);
        if (alpha < amin) alpha = amin;
        auto cap = quasiperiodic_capacitance(dimer, lattice, greens::QuasiMomentum(alpha, dimer.dim()),
                                             basis_order);
        BandPoint p;
        p.alpha = alpha;
        p.omega = leading_order_frequencies(capacitance_eigs(cap, mat), measure);
        p.b0 = exceptional_gain(cap, mat.a);
        out.push_back(p);
    }
    return out;
}

// quasimomentum at which b equals the exceptional gain of C^alpha, by
// bisection of b0(alpha) - b over (0, pi/L]. Throws when the sweep never
// crosses, i.e. the chosen b has no exceptional point in this band.
inline double exceptional_quasimomentum(const PtDimer& dimer, const LatticeConfig& lattice,
                                        const MaterialParams& mat, int basis_order = 0) {
    const double aM = pi / lattice.L;
    auto gain_at = [&](double alpha) {
        auto cap = quasiperiodic_capacitance(dimer, lattice, greens::QuasiMomentum(alpha, dimer.dim()),
                                             basis_order);
        return exceptional_gain(cap, mat.a) - mat.b;
    };
    double lo = 1e-3 * aM, hi = aM;
    double glo = gain_at(lo), ghi = gain_at(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0))
        throw std::runtime_error("exceptional_quasimomentum: no crossing on (0, pi/L]");
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = gain_at(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * aM) break;
    }
    return 0.5 * (lo + hi);
}

// ---- full resonances: Muller iteration on the determinant -------------------

struct MullerResult {
    cplx omega = 0.0;
    int iterations = 0;
    bool converged = false;
    double f_abs = 0.0;  // |normalized det| at the root
    std::string diagnostics;
};

namespace detail {

inline cplx logdet(const Eigen::MatrixXcd& A) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    cplx ld = 0.0;
    const auto& d = lu.matrixLU().diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) ld += std::log(d[i]);
    if (lu.permutationP().determinant() < 0) ld += cplx(0.0, pi);
    return ld;
}

}  // namespace detail

// transmission system for the dimer at frequency omega (interior and exterior
// speeds both v): u_in = S^k[phi] inside, u_out = S^k[psi] outside,
//   [ S^k        -S^k          ] [phi]   = 0
//   [ -I/2 + K^k  -delta (I/2 + K^k) ] [psi]
inline Eigen::MatrixXcd resonance_system(const std::array<BoundaryQuadrature, 2>& quads,
                                         const MaterialParams& mat, cplx omega) {
    cplx k = omega / mat.v;
    std::array<ops::SphereBasis, 2> b{ops::make_sphere_basis(quads[0]), ops::make_sphere_basis(quads[1])};
    auto pair = ops::assemble_sphere_pair(b, k, nullptr);
    const Eigen::Index n = pair.S.rows();
    Eigen::MatrixXcd A(2 * n, 2 * n);
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
    D.topLeftCorner(b[0].Y.cols(), b[0].Y.cols()).diagonal().setConstant(mat.delta(0));
    D.bottomRightCorner(b[1].Y.cols(), b[1].Y.cols()).diagonal().setConstant(mat.delta(1));
    A.topLeftCorner(n, n) = pair.S;
    A.topRightCorner(n, n) = -pair.S;
    A.bottomLeftCorner(n, n) = -0.5 * I + pair.K;
    A.bottomRightCorner(n, n) = -D * (0.5 * I + pair.K);
    return A;
}

// Muller's method on f(omega) = det A(omega), normalized by |det| at the
// initial guess so the iteration sees O(1) values
inline MullerResult muller_resonance(const std::array<BoundaryQuadrature, 2>& quads,
                                     const MaterialParams& mat, cplx omega0, double tol = 1e-13,
                                     int itmax = 50) {
    double ref = 0.0;
    bool have_ref = false;
    auto f = [&](cplx om) {
        cplx ld = detail::logdet(resonance_system(quads, mat, om));
        if (!have_ref) {
            ref = ld.real();
            have_ref = true;
        }
        return std::exp(ld - ref);
    };
    std::array<cplx, 3> xs{omega0 * (1.0 - 1e-3), omega0 * (1.0 + 1e-3), omega0};
    std::array<cplx, 3> fs{f(xs[0]), f(xs[1]), f(xs[2])};
    MullerResult res;
    for (int it = 0; it < itmax; ++it) {
        cplx x0 = xs[0], x1 = xs[1], x2 = xs[2];
        cplx f0 = fs[0], f1 = fs[1], f2 = fs[2];
        cplx q = (x2 - x1) / (x1 - x0);
        cplx Aq = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
        cplx Bq = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
        cplx Cq = (1.0 + q) * f2;
        cplx disc = std::sqrt(Bq * Bq - 4.0 * Aq * Cq);
        cplx den = std::abs(Bq + disc) > std::abs(Bq - disc) ? Bq + disc : Bq - disc;
        if (den == 0.0) {
            res.diagnostics = "muller: degenerate quadratic";
            break;
        }
        cplx xn = x2 - (x2 - x1) * 2.0 * Cq / den;
        cplx fn = f(xn);
        xs = {x1, x2, xn};
        fs = {f1, f2, fn};
        res.iterations = it + 1;
        res.omega = xn;
        res.f_abs = std::abs(fn);
        if (std::abs(xn - x2) < tol * std::abs(xn)) {
            res.converged = true;
            return res;
        }
    }
    if (!res.converged && res.diagnostics.empty()) {
        std::ostringstream os;
        os << "muller: no convergence in " << itmax << " iterations; last omega = ("
           << res.omega.real() << ", " << res.omega.imag() << "), |f| = " << res.f_abs;
        res.diagnostics = os.str();
    }
    return res;
}

// full resonances of the 3D dimer seeded at the leading-order frequencies
inline std::array<MullerResult, 2> muller_resonances(const PtDimer& dimer, int basis_order = 0,
                                                     double tol = 1e-13, int itmax = 50) {
    if (dimer.dim() != 3)
        throw std::invalid_argument("muller_resonances: implemented for sphere dimers");
    auto quads = dimer_quadratures(dimer, basis_order);
    auto cap = capacitance_matrix(dimer, basis_order);
    auto eigs = capacitance_eigs(cap, dimer.materials);
    auto lead = leading_order_frequencies(eigs, dimer.shapes[0].measure());
    std::array<MullerResult, 2> out;
    for (int i = 0; i < 2; ++i)
        out[std::size_t(i)] = muller_resonance(quads, dimer.materials, lead[std::size_t(i)], tol, itmax);
    return out;
}

}  // namespace subres
