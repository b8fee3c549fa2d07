#pragma once
// Scattering of a plane wave by the periodic screen of PT dimers: the
// closed-form leading-order scattering matrix near the second (antisymmetric)
// band, the full quasiperiodic boundary-integral solve, reflection zeros,
// the generalized energy relation, and the transmission-peak scan in b.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "subres/capacitance.hpp"
#include "subres/layer_ops.hpp"
#include "subres/types.hpp"

namespace subres {

// one propagating order: entries are the reflection/transmission coefficients
// for incidence from the gain side (+) and the loss side (-)
struct ScatteringMatrix {
    cplx r_plus = 0.0, r_minus = 0.0;
    cplx t_plus = 0.0, t_minus = 0.0;
};

// plane wave exp(i k w . x); side +1 arrives from the gain half-space
// (travelling down), side -1 from the loss half-space (travelling up)
struct IncidentWave {
    double omega = 0.0;
    int side = +1;
    double w1 = -std::numbers::sqrt3 / 2.0;  // in-plane direction cosine

    double w_normal() const { return std::sqrt(std::max(0.0, 1.0 - w1 * w1)); }
};

// ---- closed-form leading-order scattering matrix ---------------------------
//
// lambda_star is the spectral detuning |D1| omega^2 - 2 a C0_11, k3 the normal
// wavenumber k w3, c the screen dipole coefficient, A = L^{dim-1} the cell
// measure:
//   den = i k3 (B - C) - lambda_star,  B = b^2 A / a,  C = a c^2 / A
//   r+- = (lambda_star -+ 2 k3 b c) / den,  t = i k3 (B + C) / den
inline ScatteringMatrix asymptotic_scattering_matrix(double lambda_star, double k3, double a,
                                                     double b, double c, double L, int dim) {
    const double A = dim == 2 ? L : L * L;
    const double B = b * b * A / a;
    const double C = a * c * c / A;
    const cplx den = cplx(0.0, k3) * (B - C) - lambda_star;
    if (den == 0.0) throw std::invalid_argument("asymptotic_scattering_matrix: singular parameters");
    ScatteringMatrix s;
    s.r_plus = (lambda_star - 2.0 * k3 * b * c) / den;
    s.r_minus = (lambda_star + 2.0 * k3 * b * c) / den;
    s.t_plus = s.t_minus = cplx(0.0, k3) * (B + C) / den;
    return s;
}

// detunings at which r+ and r- vanish exactly
struct ReflectionZeros {
    double lambda_plus = 0.0;   // zero of r+
    double lambda_minus = 0.0;  // zero of r-
};

inline ReflectionZeros reflection_zeros(double k3, double b, double c) {
    return {2.0 * k3 * b * c, -2.0 * k3 * b * c};
}

// generalized conservation for PT scattering with one propagating order:
//   R+ R- + 2 sqrt(T+ T-) - T+ T- = 1
inline double energy_relation_residual(const ScatteringMatrix& s) {
    const double Rp = std::norm(s.r_plus), Rm = std::norm(s.r_minus);
    const double Tp = std::norm(s.t_plus), Tm = std::norm(s.t_minus);
    return std::abs(Rp * Rm + 2.0 * std::sqrt(Tp * Tm) - Tp * Tm - 1.0);
}

// ---- full numerical scattering ----------------------------------------------

// checks that q = 0 is the only propagating order for (alpha, k)
inline void require_one_propagating_order(double alpha, double k, double L) {
    if (k <= 0.0) throw std::invalid_argument("scattering: omega must be > 0");
    if (std::abs(alpha) >= k)
        throw std::invalid_argument("scattering: incident order is evanescent");
    const double g = 2.0 * pi / L;
    int qmax = int(std::ceil((k + std::abs(alpha)) / g)) + 1;
    for (int q = -qmax; q <= qmax; ++q) {
        if (q == 0) continue;
        if (std::abs(alpha + g * q) <= k)
            throw std::invalid_argument("scattering: more than one propagating order");
    }
}

// full solve for a screen of disk dimers; returns both incidence sides from a
// single assembly (the quasimomentum alpha = k w1 is shared)
inline ScatteringMatrix numerical_scattering(const PtDimer& dimer, const LatticeConfig& lattice,
                                             double omega, double w1 = -std::numbers::sqrt3 / 2.0,
                                             int basis_order = 0, int nq_cap = 2500) {
    if (dimer.dim() != 2)
        throw std::invalid_argument("numerical_scattering: implemented for disk screens");
    lattice.check_fits(dimer);
    const double k = omega / dimer.materials.v;
    const double alpha = k * w1;
    const double w3 = std::sqrt(std::max(0.0, 1.0 - w1 * w1));
    if (w3 <= 0.0) throw std::invalid_argument("numerical_scattering: grazing incidence");
    require_one_propagating_order(alpha, k, lattice.L);
    const double beta0 = k * w3;

    auto quads = dimer_quadratures(dimer, basis_order);
    greens::ChainLatticeSum lat(alpha, k, lattice.L, nq_cap);
    auto quasi = ops::assemble_disk_pair(quads, k, &lat);
    auto free_pair = ops::assemble_disk_pair(quads, k, nullptr);

    const Eigen::Index n = free_pair.S.rows();
    const Eigen::Index n0 = Eigen::Index(quads[0].size());
    Eigen::MatrixXcd A(2 * n, 2 * n);
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    Eigen::VectorXcd delta = Eigen::VectorXcd::Constant(n, dimer.materials.delta(0));
    delta.tail(n - n0).setConstant(dimer.materials.delta(1));
    A.topLeftCorner(n, n) = free_pair.S;
    A.topRightCorner(n, n) = -quasi.S;
    A.bottomLeftCorner(n, n) = -0.5 * I + free_pair.K;
    A.bottomRightCorner(n, n) = delta.asDiagonal() * (-0.5 * I - quasi.K);

    // incident traces for both vertical directions of w
    Eigen::MatrixXcd rhs(2 * n, 2);
    for (int side = 0; side < 2; ++side) {
        double w2 = side == 0 ? -w3 : +w3;  // gain side shoots downward
        Eigen::Index at = 0;
        for (int i = 0; i < 2; ++i) {
            const auto& q = quads[std::size_t(i)];
            for (std::size_t p = 0; p < q.size(); ++p, ++at) {
                cplx ph = std::exp(cplx(0.0, k * (w1 * q.nodes[p][0] + w2 * q.nodes[p][1])));
                rhs(at, side) = ph;
                rhs(n + at, side) =
                    dimer.materials.delta(i) * cplx(0.0, k) *
                    (w1 * q.normals[p][0] + w2 * q.normals[p][1]) * ph;
            }
        }
    }
    // plain LU, no conditioning guard: approaching the extraordinary-
    // transmission locus the system is nearly singular by construction and the
    // diverging entries are the observable
    Eigen::MatrixXcd sol = Eigen::PartialPivLU<Eigen::MatrixXcd>(A).solve(rhs);

    // far-field amplitudes of the quasiperiodic density: A_up / A_down
    auto amplitudes = [&](int side) {
        cplx up = 0.0, down = 0.0;
        Eigen::Index at = 0;
        for (int i = 0; i < 2; ++i) {
            const auto& q = quads[std::size_t(i)];
            for (std::size_t p = 0; p < q.size(); ++p, ++at) {
                cplx psi = sol(n + at, side) * q.weights[p];
                up += psi * std::exp(cplx(0.0, -(alpha * q.nodes[p][0] + beta0 * q.nodes[p][1])));
                down += psi * std::exp(cplx(0.0, -(alpha * q.nodes[p][0] - beta0 * q.nodes[p][1])));
            }
        }
        cplx norm = 1.0 / (cplx(0.0, 2.0 * beta0) * lattice.L);
        return std::array<cplx, 2>{up * norm, down * norm};
    };

    ScatteringMatrix s;
    auto amp_p = amplitudes(0);  // incidence from above, travelling down
    s.r_plus = amp_p[0];
    s.t_plus = 1.0 + amp_p[1];
    auto amp_m = amplitudes(1);  // incidence from below, travelling up
    s.r_minus = amp_m[1];
    s.t_minus = 1.0 + amp_m[0];
    return s;
}

// ---- sweeps -----------------------------------------------------------------

struct SweepPoint {
    double omega = 0.0;
    double lambda_star = 0.0;
    ScatteringMatrix s;
    double residual = 0.0;  // energy-relation defect
};

// frequency grid in the detuning variable lambda_star = |D1| omega^2 - 2 a C0_11
struct ScreenBand {
    double lambda20 = 0.0;   // 2 a C0_11
    double dipole = 0.0;     // screen dipole coefficient c
    double measure = 0.0;    // |D1|
    double omega2 = 0.0;     // sqrt(lambda20 / |D1|)

    double omega_of(double lambda_star) const {
        double l = lambda20 + lambda_star;
        if (l <= 0.0) throw std::invalid_argument("ScreenBand: sweep leaves the band");
        return std::sqrt(l / measure);
    }
    double lambda_of(double omega) const { return measure * omega * omega - lambda20; }
};

inline ScreenBand screen_band(const PtDimer& dimer, const LatticeConfig& lattice,
                              const MaterialParams& mat, int basis_order = 0) {
    auto pc = periodic_capacitance(dimer, lattice, basis_order);
    ScreenBand b;
    b.lambda20 = 2.0 * mat.a * pc.C11;
    b.dipole = dipole_coefficient(pc, dimer.dim());
    b.measure = dimer.shapes[0].measure();
    b.omega2 = std::sqrt(b.lambda20 / b.measure);
    return b;
}

inline std::vector<SweepPoint> scattering_sweep(const PtDimer& dimer, const LatticeConfig& lattice,
                                                const ScreenBand& band, double lam_lo, double lam_hi,
                                                int npts = 400, double w1 = -std::numbers::sqrt3 / 2.0,
                                                int basis_order = 0) {
    if (npts < 2) throw std::invalid_argument("scattering_sweep: npts >= 2 required");
    std::vector<SweepPoint> out;
    out.reserve(std::size_t(npts));
    for (int j = 0; j < npts; ++j) {
        SweepPoint p;
        p.lambda_star = lam_lo + (lam_hi - lam_lo) * double(j) / double(npts - 1);
        p.omega = band.omega_of(p.lambda_star);
        p.s = numerical_scattering(dimer, lattice, p.omega, w1, basis_order);
        p.residual = energy_relation_residual(p.s);
        out.push_back(p);
    }
    return out;
}

// golden-section minimizer for unimodal objectives on [lo, hi]
inline double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                              double tol, int itmax = 120) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < itmax && (hi - lo) > tol; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

// minimum of |r| near a coarse sweep minimum, refined by golden section on
// the full solve; which = +1 refines r+, -1 refines r-
inline std::pair<double, double> refine_reflection_minimum(
    const PtDimer& dimer, const LatticeConfig& lattice, const ScreenBand& band,
    const std::vector<SweepPoint>& sweep, int which, double w1 = -std::numbers::sqrt3 / 2.0,
    int basis_order = 0) {
    if (sweep.size() < 3) throw std::invalid_argument("refine_reflection_minimum: sweep too short");
    auto value = [&](const ScatteringMatrix& s) {
        return which > 0 ? std::abs(s.r_plus) : std::abs(s.r_minus);
    };
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < sweep.size(); ++j)
        if (value(sweep[j].s) < value(sweep[jmin].s)) jmin = j;
    std::size_t j0 = jmin == 0 ? 0 : jmin - 1;
    std::size_t j1 = std::min(sweep.size() - 1, jmin + 1);
    auto f = [&](double lam) {
        auto s = numerical_scattering(dimer, lattice, band.omega_of(lam), w1, basis_order);
        return value(s);
    };
    double span = sweep[j1].lambda_star - sweep[j0].lambda_star;
    double lam = golden_minimize(f, sweep[j0].lambda_star, sweep[j1].lambda_star,
                                 1e-10 * std::max(1.0, std::abs(span)));
    return {lam, f(lam)};
}

// ---- extraordinary transmission ---------------------------------------------

struct TransmissionPeak {
    double b = 0.0;
    double peakT = 0.0;
    double lambda_star = 0.0;
};

// peak transmittance |t|^2 over the band window for one gain value
inline TransmissionPeak transmission_peak(const DimerConfig& base, const LatticeConfig& lattice,
                                          double b, const ScreenBand& band, double lam_halfwidth,
                                          int coarse_pts = 81, double w1 = -std::numbers::sqrt3 / 2.0,
                                          int basis_order = 0) {
    DimerConfig cfg = base;
    cfg.materials = MaterialParams(base.materials.a, b, base.materials.v);
    PtDimer dimer = build_pt_dimer(cfg);
    auto Tof = [&](double lam) {
        auto s = numerical_scattering(dimer, lattice, band.omega_of(lam), w1, basis_order);
        return std::norm(s.t_plus);
    };
    double best_lam = 0.0, best = -1.0;
    for (int j = 0; j < coarse_pts; ++j) {
        double lam = -lam_halfwidth + 2.0 * lam_halfwidth * double(j) / double(coarse_pts - 1);
        double T = Tof(lam);
        if (T > best) {
            best = T;
            best_lam = lam;
        }
    }
    double step = 2.0 * lam_halfwidth / double(coarse_pts - 1);
    double lam = golden_minimize([&](double l) { return -Tof(l); }, best_lam - step, best_lam + step,
                                 1e-9 * std::max(1.0, lam_halfwidth));
    TransmissionPeak p;
    p.b = b;
    p.lambda_star = lam;
    p.peakT = Tof(lam);
    return p;
}

inline std::vector<TransmissionPeak> extraordinary_scan(const DimerConfig& base,
                                                        const LatticeConfig& lattice,
                                                        const std::vector<double>& b_values,
                                                        double lam_halfwidth, int coarse_pts = 81,
                                                        double w1 = -std::numbers::sqrt3 / 2.0,
                                                        int basis_order = 0) {
    PtDimer probe = build_pt_dimer(base);
    auto band = screen_band(probe, lattice, base.materials, basis_order);
    std::vector<TransmissionPeak> out;
    out.reserve(b_values.size());
    for (double b : b_values)
        out.push_back(transmission_peak(base, lattice, b, band, lam_halfwidth, coarse_pts, w1,
                                        basis_order));
    return out;
}

}  // namespace subres
