#pragma once
// Dense discretizations of the single layer potential S_D^k, its quasi- and
// periodic variants, and the Neumann-Poincare operator K_D^{k,*} on dimer
// boundaries, plus the density solves.
//
// Discretization bases:
//   * disks (2D): Nystrom on uniform angular nodes. Self blocks are exact in
//     the Fourier basis (mode multipliers sigma_n / lambda_n), cross and
//     lattice-correction blocks use the trapezoid rule on the smooth kernel.
//   * spheres (3D): spherical-harmonic coefficient basis. Self blocks are
//     diagonal (sigma_l / lambda_l); cross blocks are nodal kernels
//     sandwiched between harmonic synthesis and analysis matrices. Nodal
//     collocation alone is rank-deficient on the sphere grid, which is why
//     the operators live in coefficient space.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subres/greens.hpp"
#include "subres/lattice2d.hpp"
#include "subres/lattice3d.hpp"
#include "subres/special.hpp"
#include "subres/types.hpp"

namespace subres::ops {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

enum class OperatorKind { single_layer, neumann_poincare };

struct BoundaryOperator {
    MatrixXcd matrix;
    OperatorKind kind = OperatorKind::single_layer;
    cplx k = 0.0;
    std::optional<greens::QuasiMomentum> alpha;
    bool multipole_basis = false;
    std::array<Eigen::Index, 2> block_sizes{0, 0};

    Eigen::Index size() const { return matrix.rows(); }
};

struct Density {
    VectorXcd coefficients;
    std::array<Eigen::Index, 2> block_sizes{0, 0};

    auto on_resonator(int i) const {
        return coefficients.segment(i == 0 ? 0 : block_sizes[0], block_sizes[std::size_t(i)]);
    }
};

// ---- free-space kernels at (possibly complex) wavenumber -----------------

inline cplx kernel3_S(double r, cplx k) { return -std::exp(cplx(0.0, 1.0) * k * r) / (4.0 * pi * r); }

// normal derivative in the target variable x: grad_x G . nu_x, d = x - y
inline cplx kernel3_NP(const std::array<double, 3>& d, const std::array<double, 3>& nu, double r,
                       cplx k) {
    cplx ikr = cplx(0.0, 1.0) * k * r;
    double dn = d[0] * nu[0] + d[1] * nu[1] + d[2] * nu[2];
    return (1.0 - ikr) * std::exp(ikr) * dn / (4.0 * pi * r * r * r);
}

inline cplx kernel2_S(double r, double k) {
    return k == 0.0 ? cplx(std::log(r) / (2.0 * pi), 0.0)
                    : cplx(0.0, -0.25) * special::hank1(0, k * r);
}

inline cplx kernel2_NP(const std::array<double, 3>& d, const std::array<double, 3>& nu, double r,
                       double k) {
    double dn = d[0] * nu[0] + d[1] * nu[1];
    cplx f = (k == 0.0) ? cplx(1.0 / (2.0 * pi * r * r), 0.0)
                        : cplx(0.0, 0.25) * k * special::hank1(1, k * r) / r;
    return f * dn;
}

// ---- disk (2D) mode multipliers ------------------------------------------

// S on a circle of radius R maps e^{in theta} to sigma_n e^{in theta}
inline cplx disk_sigma(int n, double k, double R) {
    int an = std::abs(n);
    if (k == 0.0) return an == 0 ? R * std::log(R) : -R / (2.0 * an);
    return cplx(0.0, -pi * R / 2.0) * special::cyl_J(an, k * R) * special::hank1(an, k * R);
}

// K^{k,*} multiplier on the circle
inline cplx disk_lambda(int n, double k, double R) {
    int an = std::abs(n);
    if (k == 0.0) return an == 0 ? cplx(0.5, 0.0) : cplx(0.0, 0.0);
    cplx jp = special::cyl_Jp(an, k * R);
    cplx hp = special::hank1p(an, k * R);
    return cplx(0.0, -pi * k * R / 4.0) *
           (jp * special::hank1(an, k * R) + special::cyl_J(an, k * R) * hp);
}

namespace detail {

// B = F^{-1} diag(mult_n) F on the uniform angular grid: B_jl = (1/M) sum_n mult_n e^{in(th_j - th_l)}
inline MatrixXcd disk_self_block(const BoundaryQuadrature& q, double k, OperatorKind kind) {
    const int M = int(q.size());
    const double R = q.shape.radius;
    const int nmax = (M - 1) / 2;  // odd M keeps modes symmetric
    std::vector<cplx> mult(std::size_t(M), cplx(0.0));
    for (int n = -nmax; n <= nmax; ++n) {
        cplx m = kind == OperatorKind::single_layer ? disk_sigma(n, k, R) : disk_lambda(n, k, R);
        mult[std::size_t((n + M) % M)] = m;
    }
    if (M % 2 == 0) {  // unpaired Nyquist mode
        cplx m = kind == OperatorKind::single_layer ? disk_sigma(M / 2, k, R) : disk_lambda(M / 2, k, R);
        mult[std::size_t(M / 2)] = m;
    }
    MatrixXcd B(M, M);
    for (int j = 0; j < M; ++j)
        for (int l = 0; l < M; ++l) {
            cplx acc = 0.0;
            for (int n = 0; n < M; ++n) {
                int nn = n <= M / 2 ? n : n - M;
                double ang = 2.0 * pi * nn * (j - l) / M;
                acc += mult[std::size_t(n)] * std::exp(cplx(0.0, ang));
            }
            B(j, l) = acc / double(M);
        }
    return B;
}

}  // namespace detail

// ---- 2D assembly ----------------------------------------------------------

// S and K^* assembled together so lattice corrections (value + gradient in
// one pass) are shared between them.
struct DiskPairOperators {
    MatrixXcd S, K;
};

inline DiskPairOperators assemble_disk_pair(const std::array<BoundaryQuadrature, 2>& quads, double k,
                                            const greens::ChainLatticeSum* lat) {
    const int M0 = int(quads[0].size()), M1 = int(quads[1].size());
    const int n = M0 + M1;
    DiskPairOperators out;
    out.S.setZero(n, n);
    out.K.setZero(n, n);
    const std::array<int, 2> off{0, M0};
    for (int i = 0; i < 2; ++i) {
        const auto& qi = quads[std::size_t(i)];
        for (int j = 0; j < 2; ++j) {
            const auto& qj = quads[std::size_t(j)];
            const int Mi = int(qi.size()), Mj = int(qj.size());
            if (i == j) {
                out.S.block(off[std::size_t(i)], off[std::size_t(j)], Mi, Mj) =
                    detail::disk_self_block(qi, k, OperatorKind::single_layer);
                out.K.block(off[std::size_t(i)], off[std::size_t(j)], Mi, Mj) =
                    detail::disk_self_block(qi, k, OperatorKind::neumann_poincare);
            }
            for (int p = 0; p < Mi; ++p)
                for (int q = 0; q < Mj; ++q) {
                    std::array<double, 3> d{qi.nodes[std::size_t(p)][0] - qj.nodes[std::size_t(q)][0],
                                            qi.nodes[std::size_t(p)][1] - qj.nodes[std::size_t(q)][1],
                                            0.0};
                    const double w = qj.weights[std::size_t(q)];
                    cplx sval = 0.0, kval = 0.0;
                    if (i != j) {
                        double r = std::hypot(d[0], d[1]);
                        if (r < 1e-14) throw std::invalid_argument("assemble_disk_pair: coincident nodes");
                        sval = kernel2_S(r, k);
                        kval = kernel2_NP(d, qi.normals[std::size_t(p)], r, k);
                    }
                    if (lat) {
                        auto c = lat->eval(d[0], d[1], true);
                        sval += c.v;
                        kval += c.gx * qi.normals[std::size_t(p)][0] + c.gy * qi.normals[std::size_t(p)][1];
                    }
                    out.S(off[std::size_t(i)] + p, off[std::size_t(j)] + q) += sval * w;
                    out.K(off[std::size_t(i)] + p, off[std::size_t(j)] + q) += kval * w;
                }
        }
    }
    return out;
}

// periodic (alpha = 0, k = 0) single layer on a 2D disk pair; real kernel
inline MatrixXcd assemble_periodic_single_layer_2d(const std::array<BoundaryQuadrature, 2>& quads,
                                                   double L) {
    auto free_ops = assemble_disk_pair(quads, 0.0, nullptr);
    const int M0 = int(quads[0].size());
    const std::array<int, 2> off{0, M0};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto& qi = quads[std::size_t(i)];
            const auto& qj = quads[std::size_t(j)];
            for (std::size_t p = 0; p < qi.size(); ++p)
                for (std::size_t q = 0; q < qj.size(); ++q) {
                    double d1 = qi.nodes[p][0] - qj.nodes[q][0];
                    double d2 = qi.nodes[p][1] - qj.nodes[q][1];
                    double r = std::hypot(d1, d2);
                    double corr;
                    if (r < 1e-12) {
                        corr = std::log(2.0 * pi / L) / (2.0 * pi);
                    } else {
                        corr = greens::green_periodic({d1, d2, 0.0}, L, 2) - std::log(r) / (2.0 * pi);
                    }
                    free_ops.S(off[std::size_t(i)] + int(p), off[std::size_t(j)] + int(q)) +=
                        corr * qj.weights[q];
                }
        }
    return free_ops.S;
}

// ---- 3D assembly -----------------------------------------------------------

// spherical-harmonic synthesis (Y: nodes x modes) and analysis (P = Y^H W)
struct SphereBasis {
    BoundaryQuadrature quad;
    MatrixXcd Y, P;
    std::vector<std::pair<int, int>> lm;
};

inline SphereBasis make_sphere_basis(const BoundaryQuadrature& q) {
    if (q.shape.kind != ShapeKind::sphere) throw std::invalid_argument("make_sphere_basis: sphere only");
    SphereBasis b;
    b.quad = q;
    const int p = q.basis_order;
    for (int l = 0; l <= p; ++l)
        for (int m = -l; m <= l; ++m) b.lm.emplace_back(l, m);
    const Eigen::Index nn = Eigen::Index(q.size()), nm = Eigen::Index(b.lm.size());
    b.Y.resize(nn, nm);
    for (Eigen::Index i = 0; i < nn; ++i) {
        double ct = q.normals[std::size_t(i)][2];
        double phi = std::atan2(q.normals[std::size_t(i)][1], q.normals[std::size_t(i)][0]);
        for (Eigen::Index c = 0; c < nm; ++c)
            b.Y(i, c) = special::sph_harm(b.lm[std::size_t(c)].first, b.lm[std::size_t(c)].second, ct, phi);
    }
    b.P = b.Y.adjoint();
    for (Eigen::Index i = 0; i < nn; ++i) b.P.col(i) *= q.wsolid[std::size_t(i)];
    return b;
}

inline cplx sphere_sigma(int l, cplx k, double R) {
    if (k == 0.0) return -R / double(2 * l + 1);
    cplx z = k * R;
    return -cplx(0.0, 1.0) * k * R * R * special::sph_j(l, z) * special::sph_h(l, z);
}

inline cplx sphere_lambda(int l, cplx k, double R) {
    if (k == 0.0) return 1.0 / double(2 * (2 * l + 1));
    cplx z = k * R;
    return cplx(0.0, -0.5) * k * k * R * R *
           (special::sph_jp(l, z) * special::sph_h(l, z) + special::sph_j(l, z) * special::sph_hp(l, z));
}

struct SpherePairOperators {
    MatrixXcd S, K;
};

inline SpherePairOperators assemble_sphere_pair(const std::array<SphereBasis, 2>& bases, cplx k,
                                                const greens::PlanarLatticeSum* lat) {
    const Eigen::Index nm0 = bases[0].Y.cols(), nm1 = bases[1].Y.cols();
    const Eigen::Index n = nm0 + nm1;
    SpherePairOperators out;
    out.S.setZero(n, n);
    out.K.setZero(n, n);
    if (lat && k.imag() != 0.0)
        throw std::invalid_argument("assemble_sphere_pair: complex k with lattice not supported");
    const std::array<Eigen::Index, 2> off{0, nm0};
    for (int i = 0; i < 2; ++i) {
        const auto& bi = bases[std::size_t(i)];
        const Eigen::Index ni = Eigen::Index(bi.quad.size());
        for (int j = 0; j < 2; ++j) {
            const auto& bj = bases[std::size_t(j)];
            const Eigen::Index nj = Eigen::Index(bj.quad.size());
            MatrixXcd GS, GK;
            if (i == j) {
                // analytic multipole diagonal plus (for lattices) the smooth correction
                const double R = bi.quad.shape.radius;
                MatrixXcd DS = MatrixXcd::Zero(bi.Y.cols(), bi.Y.cols());
                MatrixXcd DK = DS;
                for (Eigen::Index c = 0; c < bi.Y.cols(); ++c) {
                    DS(c, c) = sphere_sigma(bi.lm[std::size_t(c)].first, k, R);
                    DK(c, c) = sphere_lambda(bi.lm[std::size_t(c)].first, k, R);
                }
                out.S.block(off[std::size_t(i)], off[std::size_t(j)], bi.Y.cols(), bi.Y.cols()) = DS;
                out.K.block(off[std::size_t(i)], off[std::size_t(j)], bi.Y.cols(), bi.Y.cols()) = DK;
                if (!lat) continue;
                GS.setZero(ni, nj);
                for (Eigen::Index p = 0; p < ni; ++p)
                    for (Eigen::Index q = 0; q < nj; ++q) {
                        greens::point3 d{bi.quad.nodes[std::size_t(p)][0] - bj.quad.nodes[std::size_t(q)][0],
                                         bi.quad.nodes[std::size_t(p)][1] - bj.quad.nodes[std::size_t(q)][1],
                                         bi.quad.nodes[std::size_t(p)][2] - bj.quad.nodes[std::size_t(q)][2]};
                        GS(p, q) = lat->eval(d);
                    }
            } else {
                GS.setZero(ni, nj);
                GK.setZero(ni, nj);
                for (Eigen::Index p = 0; p < ni; ++p)
                    for (Eigen::Index q = 0; q < nj; ++q) {
                        std::array<double, 3> d{
                            bi.quad.nodes[std::size_t(p)][0] - bj.quad.nodes[std::size_t(q)][0],
                            bi.quad.nodes[std::size_t(p)][1] - bj.quad.nodes[std::size_t(q)][1],
                            bi.quad.nodes[std::size_t(p)][2] - bj.quad.nodes[std::size_t(q)][2]};
                        double r = std::hypot(d[0], d[1], d[2]);
                        if (r < 1e-14)
                            throw std::invalid_argument("assemble_sphere_pair: coincident nodes");
                        GS(p, q) = kernel3_S(r, k);
                        GK(p, q) = kernel3_NP(d, bi.quad.normals[std::size_t(p)], r, k);
                        if (lat) GS(p, q) += lat->eval(greens::point3{d[0], d[1], d[2]});
                    }
            }
            MatrixXcd WYj = bj.Y;
            for (Eigen::Index q = 0; q < nj; ++q) WYj.row(q) *= bj.quad.weights[std::size_t(q)];
            if (GS.size()) out.S.block(off[std::size_t(i)], off[std::size_t(j)], bi.Y.cols(), bj.Y.cols()) +=
                bi.P * GS * WYj;
            if (GK.size()) out.K.block(off[std::size_t(i)], off[std::size_t(j)], bi.Y.cols(), bj.Y.cols()) +=
                bi.P * GK * WYj;
        }
    }
    return out;
}

// ---- public assembly entry points -----------------------------------------

inline bool is_disk_pair(const std::array<BoundaryQuadrature, 2>& quads) {
    return quads[0].shape.kind == ShapeKind::disk;
}

inline BoundaryOperator assemble_single_layer(const std::array<BoundaryQuadrature, 2>& quads, cplx k) {
    BoundaryOperator op;
    op.kind = OperatorKind::single_layer;
    op.k = k;
    if (is_disk_pair(quads)) {
        if (k.imag() != 0.0) throw std::invalid_argument("2D operators need real k");
        op.matrix = assemble_disk_pair(quads, k.real(), nullptr).S;
        op.block_sizes = {Eigen::Index(quads[0].size()), Eigen::Index(quads[1].size())};
    } else {
        std::array<SphereBasis, 2> b{make_sphere_basis(quads[0]), make_sphere_basis(quads[1])};
        op.matrix = assemble_sphere_pair(b, k, nullptr).S;
        op.multipole_basis = true;
        op.block_sizes = {b[0].Y.cols(), b[1].Y.cols()};
    }
    return op;
}

inline BoundaryOperator assemble_neumann_poincare(const std::array<BoundaryQuadrature, 2>& quads,
                                                  cplx k) {
    BoundaryOperator op;
    op.kind = OperatorKind::neumann_poincare;
    op.k = k;
    if (is_disk_pair(quads)) {
        if (k.imag() != 0.0) throw std::invalid_argument("2D operators need real k");
        op.matrix = assemble_disk_pair(quads, k.real(), nullptr).K;
        op.block_sizes = {Eigen::Index(quads[0].size()), Eigen::Index(quads[1].size())};
    } else {
        std::array<SphereBasis, 2> b{make_sphere_basis(quads[0]), make_sphere_basis(quads[1])};
        op.matrix = assemble_sphere_pair(b, k, nullptr).K;
        op.multipole_basis = true;
        op.block_sizes = {b[0].Y.cols(), b[1].Y.cols()};
    }
    return op;
}

inline BoundaryOperator assemble_single_layer_quasi(const std::array<BoundaryQuadrature, 2>& quads,
                                                    const greens::QuasiMomentum& alpha, double k,
                                                    const LatticeConfig& lattice,
                                                    const greens::LatticeSumPolicy& policy = {}) {
    BoundaryOperator op;
    op.kind = OperatorKind::single_layer;
    op.k = k;
    op.alpha = alpha.folded(lattice.L);
    if (is_disk_pair(quads)) {
        greens::ChainLatticeSum lat(op.alpha->alpha[0], k, lattice.L, std::max(policy.M_q, 600));
        op.matrix = assemble_disk_pair(quads, k, &lat).S;
        op.block_sizes = {Eigen::Index(quads[0].size()), Eigen::Index(quads[1].size())};
    } else {
        greens::PlanarLatticeSum lat(*op.alpha, k, lattice.L, std::max(policy.M_q, 90));
        std::array<SphereBasis, 2> b{make_sphere_basis(quads[0]), make_sphere_basis(quads[1])};
        op.matrix = assemble_sphere_pair(b, k, &lat).S;
        op.multipole_basis = true;
        op.block_sizes = {b[0].Y.cols(), b[1].Y.cols()};
    }
    return op;
}

// ---- solves ----------------------------------------------------------------

struct SolveReport {
    double cond_estimate = 0.0;
};

namespace detail {

// Hager-style 1-norm estimate of ||A^{-1}||, using an existing factorization
inline double inv_norm1_estimate(const Eigen::PartialPivLU<MatrixXcd>& lu, Eigen::Index n) {
    VectorXcd x = VectorXcd::Constant(n, cplx(1.0 / double(n), 0.0));
    double est = 0.0;
    auto solve_adj = [&](const VectorXcd& rhs) {
        const auto& LU = lu.matrixLU();
        VectorXcd w = LU.template triangularView<Eigen::Upper>().adjoint().solve(rhs);
        VectorXcd v = LU.template triangularView<Eigen::UnitLower>().adjoint().solve(w);
        return (lu.permutationP().transpose() * v).eval();
    };
    for (int it = 0; it < 5; ++it) {
        VectorXcd y = lu.solve(x);
        double ynorm = y.lpNorm<1>();
        if (ynorm <= est && it > 0) break;
        est = ynorm;
        VectorXcd xi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double a = std::abs(y[i]);
            xi[i] = a == 0.0 ? cplx(1.0, 0.0) : y[i] / a;
        }
        VectorXcd z = solve_adj(xi);
        Eigen::Index jmax;
        z.cwiseAbs().maxCoeff(&jmax);
        x.setZero();
        x[jmax] = 1.0;
    }
    return est;
}

}  // namespace detail

inline MatrixXcd solve_dense(const MatrixXcd& A, const MatrixXcd& rhs, SolveReport* report = nullptr) {
    Eigen::PartialPivLU<MatrixXcd> lu(A);
    if (report) {
        double anorm = A.cwiseAbs().colwise().sum().maxCoeff();
        report->cond_estimate = anorm * detail::inv_norm1_estimate(lu, A.rows());
        if (report->cond_estimate > 1e12)
            throw std::runtime_error("solve_dense: condition estimate exceeds 1e12");
    }
    return lu.solve(rhs);
}

inline Density solve_density(const BoundaryOperator& op, const VectorXcd& rhs,
                             SolveReport* report = nullptr) {
    SolveReport local;
    MatrixXcd sol = solve_dense(op.matrix, rhs, report ? report : &local);
    Density d;
    d.coefficients = sol.col(0);
    d.block_sizes = op.block_sizes;
    return d;
}

// mean-zero-constrained solve: [[A, 1], [w^T, 0]] for kernels containing constants
inline MatrixXcd solve_dense_mean_zero(const MatrixXcd& A, const VectorXd& w, const MatrixXcd& rhs,
                                       SolveReport* report = nullptr) {
    const Eigen::Index n = A.rows();
    MatrixXcd B = MatrixXcd::Zero(n + 1, n + 1);
    B.topLeftCorner(n, n) = A;
    B.block(0, n, n, 1).setConstant(1.0);
    B.block(n, 0, 1, n) = w.transpose().cast<cplx>();
    MatrixXcd r = MatrixXcd::Zero(n + 1, rhs.cols());
    r.topRows(n) = rhs;
    MatrixXcd sol = solve_dense(B, r, report);
    return sol.topRows(n);
}

}  // namespace subres::ops
