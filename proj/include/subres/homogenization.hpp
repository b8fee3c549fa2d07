#pragma once
// Dilute-cloud homogenization: point-scatterer clouds in the unit ball, the
// Foldy-Lax system for the microscopic field, the analytic effective-medium
// field of the limiting ball, and the PT dimer condensed to a single point
// scatterer with its closed-form frequency-dependent polarizability.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "subres/capacitance.hpp"
#include "subres/special.hpp"
#include "subres/types.hpp"

namespace subres {

// ---- clouds -----------------------------------------------------------------

struct CavityCloud {
    std::vector<std::array<double, 3>> centers;
    double pitch = 0.0;        // nearest-neighbor distance floor
    double Lambda = 1.0;       // cloud / limiting-ball radius
};

namespace detail {

inline double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

}  // namespace detail

// cubic-lattice cloud: bisect the pitch until at least N lattice points fall in
// the unit ball, keep the N innermost (lexicographic tie-break), then rescale
// so the second moment matches the uniform ball, sum |x|^2 = 3N/5
inline CavityCloud ball_cloud_grid(int N) {
    if (N < 2) throw std::invalid_argument("ball_cloud_grid: N >= 2 required");
    auto points_at = [&](double h) {
        std::vector<std::array<double, 3>> pts;
        int m = int(std::ceil(1.0 / h)) + 1;
        for (int i = -m; i <= m; ++i)
            for (int j = -m; j <= m; ++j)
                for (int l = -m; l <= m; ++l) {
                    std::array<double, 3> x{(i + 0.5) * h, (j + 0.5) * h, (l + 0.5) * h};
                    if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= 1.0) pts.push_back(x);
                }
        return pts;
    };
    double lo = 0.5 * std::pow(4.0 * pi / (3.0 * N), 1.0 / 3.0), hi = 2.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (int(points_at(mid).size()) >= N)
            lo = mid;
        else
            hi = mid;
    }
    auto pts = points_at(lo);
    std::sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
        double rp = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        double rq = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        if (rp != rq) return rp < rq;
        return p < q;
    });
    pts.resize(std::size_t(N));
    double s2 = 0.0, rmax = 0.0;
    for (const auto& p : pts) {
        double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        s2 += r2;
        rmax = std::max(rmax, std::sqrt(r2));
    }
    double scale = std::sqrt(0.6 * N / s2);
    if (rmax > 0.0) scale = std::min(scale, 0.999 / rmax);
    for (auto& p : pts)
        for (double& c : p) c *= scale;
    CavityCloud cloud;
    cloud.centers = std::move(pts);
    cloud.pitch = lo * scale;
    cloud.Lambda = 1.0;
    return cloud;
}

// dart-throwing cloud with minimum separation eta N^(eps1 - 1); gives up after
// 10^4 N attempts
inline CavityCloud ball_cloud_poisson(int N, std::uint64_t seed, double eps1 = 0.5,
                                      double eta = 0.7) {
    if (N < 2) throw std::invalid_argument("ball_cloud_poisson: N >= 2 required");
    const double dmin = eta * std::pow(double(N), eps1 - 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    CavityCloud cloud;
    cloud.pitch = dmin;
    cloud.Lambda = 1.0;
    const long cap = 10000L * N;
    long tries = 0;
    while (int(cloud.centers.size()) < N) {
        if (++tries > cap)
            throw std::runtime_error("ball_cloud_poisson: separation infeasible within attempt cap");
        std::array<double, 3> x{U(rng), U(rng), U(rng)};
        if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > 0.998) continue;
        bool ok = true;
        for (const auto& z : cloud.centers)
            if (detail::dist3(x, z) < dmin) {
                ok = false;
                break;
            }
        if (ok) cloud.centers.push_back(x);
    }
    return cloud;
}

inline double min_separation(const CavityCloud& cloud) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.centers.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.centers.size(); ++j)
            d = std::min(d, detail::dist3(cloud.centers[i], cloud.centers[j]));
    return d;
}

// ---- point scatterers ---------------------------------------------------------

// single-resonator polarizability at radius scale rN = N^(1/(eps1-1)):
//   A(omega) = rN Cap omega^2 / (omega^2 - omega*^2),
//   omega*^2 = (a + i rN^eps1 b) Cap / |D0|
// for a unit-ball resonator, Cap = 4 pi and |D0| = 4 pi / 3
inline cplx point_polarizability(double rN, double a, double b, double eps1, double omega,
                                 double cap = 4.0 * pi, double measure = 4.0 * pi / 3.0) {
    cplx omstar2 = (a + cplx(0.0, 1.0) * std::pow(rN, eps1) * b) * (cap / measure);
    return rN * cap * omega * omega / (omega * omega - omstar2);
}

struct FoldyLaxSolution {
    Eigen::VectorXcd amplitudes;  // total field at each scatterer
    double cond = 0.0;
};

// (I - A G) u = u_in with G_ij = G_k(z_i - z_j), zero diagonal, u_in = e^{i k x3}
inline FoldyLaxSolution foldy_lax_solve(const CavityCloud& cloud, cplx A, double k) {
    const Eigen::Index N = Eigen::Index(cloud.centers.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) {
            if (i == j) continue;
            double r = detail::dist3(cloud.centers[std::size_t(i)], cloud.centers[std::size_t(j)]);
            M(i, j) = -A * (-std::exp(cplx(0.0, k * r)) / (4.0 * pi * r));
        }
    Eigen::VectorXcd uin(N);
    for (Eigen::Index i = 0; i < N; ++i)
        uin[i] = std::exp(cplx(0.0, k * cloud.centers[std::size_t(i)][2]));
    FoldyLaxSolution sol;
    ops::SolveReport rep;
    sol.amplitudes = ops::solve_dense(M, uin, &rep);
    sol.cond = rep.cond_estimate;
    return sol;
}

// microscopic field away from the scatterers
inline cplx microfield(const CavityCloud& cloud, const FoldyLaxSolution& sol, cplx A, double k,
                       const std::array<double, 3>& x) {
    cplx u = std::exp(cplx(0.0, k * x[2]));
    for (std::size_t j = 0; j < cloud.centers.size(); ++j) {
        double r = detail::dist3(x, cloud.centers[j]);
        u += A * (-std::exp(cplx(0.0, k * r)) / (4.0 * pi * r)) * sol.amplitudes[Eigen::Index(j)];
    }
    return u;
}

// ---- effective ball field ------------------------------------------------------

// effective potential of the homogenized cloud at the pinned frequency:
//   W = N A / |Omega| -> i Lambda a Cap / (b |Omega|)
inline cplx effective_potential(double Lambda, double a, double b, double cap = 4.0 * pi) {
    double vol = 4.0 / 3.0 * pi * Lambda * Lambda * Lambda;
    return cplx(0.0, 1.0) * Lambda * a * cap / (b * vol);
}

// plane wave e^{i k x3} scattered by a ball of radius Lambda with interior
// wavenumber k_int = sqrt(k^2 - W); partial-wave solution
struct EffectiveBallField {
    double Lambda = 1.0;
    double k = 1.0;
    cplx kint = 1.0;
    std::vector<cplx> a_int, b_sc;  // interior / scattered coefficients per l

    cplx at(const std::array<double, 3>& x) const {
        double r = std::hypot(x[0], x[1], x[2]);
        double ct = r > 0.0 ? x[2] / r : 1.0;
        cplx u = 0.0;
        bool inside = r < Lambda;
        if (!inside) u = std::exp(cplx(0.0, k * x[2]));
        double p0 = 1.0, p1 = ct;
        for (std::size_t l = 0; l < a_int.size(); ++l) {
            double pl = l == 0 ? p0 : (l == 1 ? p1 : 0.0);
            if (l >= 2) {
                pl = ((2.0 * l - 1.0) * ct * p1 - (l - 1.0) * p0) / double(l);
                p0 = p1;
                p1 = pl;
            }
            cplx rad = inside ? a_int[l] * special::sph_j(int(l), kint * r)
                              : b_sc[l] * special::sph_h(int(l), cplx(k * r, 0.0));
            u += rad * pl;
        }
        return u;
    }
};

inline EffectiveBallField effective_ball_field(double Lambda, double k, cplx W, int lmax = 40) {
    EffectiveBallField f;
    f.Lambda = Lambda;
    f.k = k;
    cplx kint = std::sqrt(cplx(k * k, 0.0) - W);
    if (kint.real() < 0.0) kint = -kint;
    f.kint = kint;
    f.a_int.resize(std::size_t(lmax) + 1);
    f.b_sc.resize(std::size_t(lmax) + 1);
    const cplx z(k * Lambda, 0.0);
    const cplx zi = kint * Lambda;
    double scale = 0.0;
    for (int l = 0; l <= lmax; ++l) {
        cplx jz = special::sph_j(l, z), jpz = special::sph_jp(l, z);
        cplx hz = special::sph_h(l, z), hpz = special::sph_hp(l, z);
        cplx ji = special::sph_j(l, zi), jpi = special::sph_jp(l, zi);
        // [ j_l(zi)        -h_l(z)  ] [a]   [ j_l(z)   ]
        // [ kint j_l'(zi)  -k h_l'(z)] [b] = [ k j_l'(z)] (times i^l (2l+1))
        cplx det = ji * (-cplx(k) * hpz) - (-hz) * (kint * jpi);
        if (det == 0.0) throw std::runtime_error("effective_ball_field: singular matching system");
        cplx pref = std::pow(cplx(0.0, 1.0), l) * double(2 * l + 1);
        cplx r1 = pref * jz, r2 = pref * cplx(k) * jpz;
        cplx al = (r1 * (-cplx(k) * hpz) - (-hz) * r2) / det;
        cplx bl = (ji * r2 - r1 * (kint * jpi)) / det;
        f.a_int[std::size_t(l)] = al;
        f.b_sc[std::size_t(l)] = bl;
        double term = std::abs(al * special::sph_j(l, zi * 0.999)) + std::abs(bl * special::sph_h(l, z));
        scale = std::max(scale, term);
        if (l > 8 && term < 1e-13 * scale) {
            f.a_int.resize(std::size_t(l) + 1);
            f.b_sc.resize(std::size_t(l) + 1);
            break;
        }
    }
    return f;
}

// radial flux of the total field through the sphere of radius r:
// integral of Im(conj(u) du/dr); negative for an absorbing ball
inline double radial_flux(const EffectiveBallField& f, double r, int nth = 64) {
    std::vector<double> x, w;
    detail::gauss_legendre(nth, x, w);
    double flux = 0.0;
    const double dr = 1e-6 * std::max(1.0, r);
    for (int i = 0; i < nth; ++i) {
        double ct = x[std::size_t(i)], st = std::sqrt(1.0 - ct * ct);
        std::array<double, 3> xp{st * (r + dr), 0.0, ct * (r + dr)};
        std::array<double, 3> xm{st * (r - dr), 0.0, ct * (r - dr)};
        std::array<double, 3> x0{st * r, 0.0, ct * r};
        cplx du = (f.at(xp) - f.at(xm)) / (2.0 * dr);
        flux += w[std::size_t(i)] * std::imag(std::conj(f.at(x0)) * du);
    }
    return 2.0 * pi * r * r * flux;
}

// ---- probes and the sup error ---------------------------------------------------

// probe set: an outer ring at 1.35 Lambda, interior lattice midpoints, and a
// few grazing probes at the minimum admissible distance N^(eps3 - 1) from the
// scatterer nearest the origin
inline std::vector<std::array<double, 3>> cavity_probes(const CavityCloud& cloud, double eps3 = 1.0 / 6.0,
                                                        int nring = 25) {
    const int N = int(cloud.centers.size());
    const double dmin = std::pow(double(N), eps3 - 1.0);
    std::vector<std::array<double, 3>> probes;
    for (int i = 0; i < nring; ++i) {
        double th = pi * (i + 0.5) / nring;
        probes.push_back({1.35 * cloud.Lambda * std::sin(th), 0.0, 1.35 * cloud.Lambda * std::cos(th)});
    }
    const double h = cloud.pitch;
    if (h > 0.0) {
        int m = int(std::ceil(0.9 * cloud.Lambda / h));
        for (int i = -m; i <= m; ++i)
            for (int j = -m; j <= m; ++j)
                for (int l = -m; l <= m; ++l) {
                    std::array<double, 3> x{i * h, j * h, l * h};  // midpoints of the shifted grid
                    if (std::hypot(x[0], x[1], x[2]) >= 0.9 * cloud.Lambda) continue;
                    probes.push_back(x);
                }
    }
    std::size_t jc = 0;
    for (std::size_t j = 1; j < cloud.centers.size(); ++j)
        if (std::hypot(cloud.centers[j][0], cloud.centers[j][1], cloud.centers[j][2]) <
            std::hypot(cloud.centers[jc][0], cloud.centers[jc][1], cloud.centers[jc][2]))
            jc = j;
    const auto& zc = cloud.centers[jc];
    for (int s = 0; s < 4; ++s) {
        double sx = s & 1 ? 1.0 : -1.0, sy = s & 2 ? 1.0 : -1.0;
        std::array<double, 3> dir{sx, sy, 1.0};
        double nn = std::hypot(dir[0], dir[1], dir[2]);
        probes.push_back({zc[0] + dmin * dir[0] / nn, zc[1] + dmin * dir[1] / nn,
                          zc[2] + dmin * dir[2] / nn});
    }
    // enforce the admissibility floor against every scatterer
    std::vector<std::array<double, 3>> kept;
    for (const auto& p : probes) {
        bool ok = true;
        for (const auto& z : cloud.centers)
            if (detail::dist3(p, z) < dmin * (1.0 - 1e-12)) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(p);
    }
    return kept;
}

inline double sup_probe_error(const CavityCloud& cloud, const FoldyLaxSolution& sol, cplx A, double k,
                              const EffectiveBallField& eff,
                              const std::vector<std::array<double, 3>>& probes) {
    double sup = 0.0;
    for (const auto& p : probes)
        sup = std::max(sup, std::abs(microfield(cloud, sol, A, k, p) - eff.at(p)));
    return sup;
}

// ---- the PT dimer as a point scatterer -------------------------------------------

// closed-form polarizability at the exceptional point b = b0:
//   m(omega) = Cap_D [ a^2 C11 C12 / |D1|^2 (omega^2-omega1^2)^-2
//              + a Cap_D / (2 |D1|) (omega^2-omega1^2)^-1 + 1 ],
// Cap_D = 2 (C11 + C12), omega1^2 = a C11 / |D1|; the double pole is the
// Jordan-block signature
inline cplx pt_dimer_polarizability(const CapacitanceSet& cap, double a, double measure,
                                    cplx omega) {
    const double C11 = cap.C11, C12 = cap.C12.real();
    const double capd = 2.0 * (C11 + C12);
    const cplx om12 = cplx(a * C11 / measure, 0.0);
    const cplx d = omega * omega - om12;
    if (d == 0.0) throw std::invalid_argument("pt_dimer_polarizability: evaluated at the pole");
    return capd * (a * a * C11 * C12 / (measure * measure) / (d * d) +
                   a * capd / (2.0 * measure) / d + 1.0);
}

// the same quantity from the 2x2 system (C^v - lambda I) q = (Cap_D u0 / 2) v2delta,
// m = Cap_D (1 - (q1+q2) / (2 u0)); independent of the closed form above
inline cplx pt_dimer_polarizability_direct(const CapacitanceSet& cap, double a, double b0,
                                           double measure, cplx omega) {
    Eigen::Matrix2cd C;
    C << cap.C11, cap.C12, std::conj(cap.C12), cap.C11;
    Eigen::Matrix2cd V = Eigen::Matrix2cd::Zero();
    V(0, 0) = cplx(a, b0);
    V(1, 1) = cplx(a, -b0);
    Eigen::Matrix2cd Cv = V * C;
    const double capd = 2.0 * (cap.C11 + cap.C12.real());
    cplx lambda = measure * omega * omega;
    Eigen::Matrix2cd M = Cv - lambda * Eigen::Matrix2cd::Identity();
    Eigen::Vector2cd rhs(0.5 * capd * cplx(a, b0), 0.5 * capd * cplx(a, -b0));
    Eigen::Vector2cd q = M.lu().solve(rhs);
    return capd * (1.0 - 0.5 * (q[0] + q[1]));
}

// resolvent of C^v at the exceptional point, entrywise closed form:
//   Q = (lambda I - C^v)^{-1} with lambda1 = a C11,
//   Q11 =  i b0 C11 (lambda-lambda1)^-2 + (lambda-lambda1)^-1
//   Q12 =  C12 (a + i b0) (lambda-lambda1)^-2
//   Q21 =  b0^2 C11^2 / ((a + i b0) C12) (lambda-lambda1)^-2
//   Q22 = -i b0 C11 (lambda-lambda1)^-2 + (lambda-lambda1)^-1
inline Eigen::Matrix2cd dimer_q_coefficients(const CapacitanceSet& cap, double a, double b0,
                                             cplx lambda) {
    const double C11 = cap.C11, C12 = cap.C12.real();
    const cplx lam1 = cplx(a * C11, 0.0);
    const cplx d1 = 1.0 / (lambda - lam1);
    const cplx d2 = d1 * d1;
    Eigen::Matrix2cd Q;
    Q(0, 0) = cplx(0.0, b0) * C11 * d2 + d1;
    Q(0, 1) = C12 * cplx(a, b0) * d2;
    Q(1, 0) = b0 * b0 * C11 * C11 / (cplx(a, b0) * C12) * d2;
    Q(1, 1) = cplx(0.0, -b0) * C11 * d2 + d1;
    return Q;
}

}  // namespace subres
