#pragma once
// Capacitance coefficients of the dimer: free-space, quasiperiodic, and
// periodic (screen) variants, the material-weighted matrix whose eigenvalues
// drive the subwavelength spectrum, and the two-sphere image-charge series
// used as an independent cross-check.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <stdexcept>

#include "subres/layer_ops.hpp"
#include "subres/types.hpp"

namespace subres {

struct CapacitanceSet {
    double C11 = 0.0;
    cplx C12 = 0.0;  // C21 = conj(C12); imaginary part vanishes off the lattice
    double cond = 0.0;
};

inline int default_basis_order(const ResonatorShape& s) {
    return s.kind == ShapeKind::disk ? 16 : 8;
}

inline std::array<BoundaryQuadrature, 2> dimer_quadratures(const PtDimer& dimer, int basis_order = 0) {
    int p0 = basis_order > 0 ? basis_order : default_basis_order(dimer.shapes[0]);
    return {boundary_quadrature(dimer.shapes[0], p0), boundary_quadrature(dimer.shapes[1], p0)};
}

namespace detail {

// integral of a nodal-or-multipole density over each boundary
inline std::array<cplx, 2> boundary_integrals(const std::array<BoundaryQuadrature, 2>& quads,
                                              const ops::BoundaryOperator& op,
                                              const Eigen::VectorXcd& psi) {
    std::array<cplx, 2> out{0.0, 0.0};
    if (!op.multipole_basis) {
        Eigen::Index at = 0;
        for (int i = 0; i < 2; ++i) {
            for (std::size_t q = 0; q < quads[std::size_t(i)].size(); ++q)
                out[std::size_t(i)] += quads[std::size_t(i)].weights[q] * psi[at + Eigen::Index(q)];
            at += Eigen::Index(quads[std::size_t(i)].size());
        }
    } else {
        // only the (0,0) harmonic integrates to something: int Y00 dOmega = sqrt(4 pi)
        Eigen::Index at = 0;
        for (int i = 0; i < 2; ++i) {
            double R = quads[std::size_t(i)].shape.radius;
            out[std::size_t(i)] = psi[at] * R * R * std::sqrt(4.0 * pi);
            at += op.block_sizes[std::size_t(i)];
        }
    }
    return out;
}

// characteristic function of boundary j in the operator's basis
inline Eigen::VectorXcd indicator(const std::array<BoundaryQuadrature, 2>& quads,
                                  const ops::BoundaryOperator& op, int j) {
    Eigen::VectorXcd chi = Eigen::VectorXcd::Zero(op.size());
    if (!op.multipole_basis) {
        Eigen::Index at = j == 0 ? 0 : Eigen::Index(quads[0].size());
        chi.segment(at, Eigen::Index(quads[std::size_t(j)].size())).setConstant(1.0);
    } else {
        Eigen::Index at = j == 0 ? 0 : op.block_sizes[0];
        chi[at] = std::sqrt(4.0 * pi);  // 1 = sqrt(4 pi) Y00
    }
    return chi;
}

inline Eigen::VectorXd constraint_weights(const std::array<BoundaryQuadrature, 2>& quads,
                                          const ops::BoundaryOperator& op) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(op.size());
    if (!op.multipole_basis) {
        Eigen::Index at = 0;
        for (int i = 0; i < 2; ++i)
            for (std::size_t q = 0; q < quads[std::size_t(i)].size(); ++q)
                w[at++] = quads[std::size_t(i)].weights[q];
    } else {
        w[0] = quads[0].shape.radius * quads[0].shape.radius * std::sqrt(4.0 * pi);
        w[op.block_sizes[0]] = quads[1].shape.radius * quads[1].shape.radius * std::sqrt(4.0 * pi);
    }
    return w;
}

}  // namespace detail

// free-space capacitance matrix, C_ij = -int_{dD_i} psi_j with S psi_j = chi_j.
// The 2D Laplace operator carries constants in its kernel, so that case goes
// through the mean-zero-augmented solve.
inline CapacitanceSet capacitance_matrix(const PtDimer& dimer, int basis_order = 0) {
    auto quads = dimer_quadratures(dimer, basis_order);
    auto op = ops::assemble_single_layer(quads, 0.0);
    Eigen::MatrixXcd rhs(op.size(), 2);
    rhs.col(0) = detail::indicator(quads, op, 0);
    rhs.col(1) = detail::indicator(quads, op, 1);
    ops::SolveReport rep;
    Eigen::MatrixXcd psi;
    if (dimer.dim() == 2) {
        psi = ops::solve_dense_mean_zero(op.matrix, detail::constraint_weights(quads, op), rhs, &rep);
    } else {
        psi = ops::solve_dense(op.matrix, rhs, &rep);
    }
    auto c1 = detail::boundary_integrals(quads, op, psi.col(0));
    auto c2 = detail::boundary_integrals(quads, op, psi.col(1));
    CapacitanceSet cap;
    cap.C11 = -c1[0].real();
    cap.C12 = -0.5 * (c2[0] + std::conj(c1[1]));  // symmetrize; equal up to quadrature noise
    cap.cond = rep.cond_estimate;
    return cap;
}

// quasiperiodic capacitance at quasimomentum alpha (k = 0); hermitian 2x2
inline CapacitanceSet quasiperiodic_capacitance(const PtDimer& dimer, const LatticeConfig& lattice,
                                                const greens::QuasiMomentum& alpha,
                                                int basis_order = 0) {
    lattice.check_fits(dimer);
    auto folded = alpha.folded(lattice.L);
    bool at_gamma = true;
    for (double a : folded.alpha) at_gamma = at_gamma && std::abs(a) < 1e-14;
    if (at_gamma)
        throw std::invalid_argument("quasiperiodic_capacitance: alpha = 0 is the periodic problem");
    auto quads = dimer_quadratures(dimer, basis_order);
    auto op = ops::assemble_single_layer_quasi(quads, folded, 0.0, lattice);
    Eigen::MatrixXcd rhs(op.size(), 2);
    rhs.col(0) = detail::indicator(quads, op, 0);
    rhs.col(1) = detail::indicator(quads, op, 1);
    ops::SolveReport rep;
    Eigen::MatrixXcd psi = ops::solve_dense(op.matrix, rhs, &rep);
    auto c1 = detail::boundary_integrals(quads, op, psi.col(0));
    auto c2 = detail::boundary_integrals(quads, op, psi.col(1));
    CapacitanceSet cap;
    cap.C11 = -0.5 * (c1[0] + c2[1]).real();
    cap.C12 = -0.5 * (c2[0] + std::conj(c1[1]));
    cap.cond = rep.cond_estimate;
    return cap;
}

// material weighting: M = diag(v_i^2 delta_i) C, the 2x2 whose eigenvalues
// lead the resonance expansion
inline Eigen::Matrix2cd weighted_capacitance(const CapacitanceSet& cap, const MaterialParams& mat) {
    Eigen::Matrix2cd C;
    C << cap.C11, cap.C12, std::conj(cap.C12), cap.C11;
    Eigen::Matrix2cd V = Eigen::Matrix2cd::Zero();
    V(0, 0) = mat.v2delta(0);
    V(1, 1) = mat.v2delta(1);
    return V * C;
}

// periodic screen problem at alpha = 0, k = 0: psi0 solves the
// mean-zero-constrained S^{0,0} psi0 = chi_1/2 - chi_2/2
struct PeriodicCapacitance {
    double C11 = 0.0;                          // -int_{dD1} psi0
    std::array<double, 3> dipole1{}, dipole2{};  // int_{dD_i} y psi0 dsigma(y)
    double cond = 0.0;
};

inline PeriodicCapacitance periodic_capacitance(const PtDimer& dimer, const LatticeConfig& lattice,
                                                int basis_order = 0) {
    lattice.check_fits(dimer);
    auto quads = dimer_quadratures(dimer, basis_order);
    ops::BoundaryOperator op;
    op.kind = ops::OperatorKind::single_layer;
    if (dimer.dim() == 2) {
        op.matrix = ops::assemble_periodic_single_layer_2d(quads, lattice.L);
        op.block_sizes = {Eigen::Index(quads[0].size()), Eigen::Index(quads[1].size())};
    } else {
        greens::QuasiMomentum gamma(0.0, 0.0);
        greens::PlanarLatticeSum lat(gamma, 0.0, lattice.L, 90);
        std::array<ops::SphereBasis, 2> b{ops::make_sphere_basis(quads[0]),
                                          ops::make_sphere_basis(quads[1])};
        op.matrix = ops::assemble_sphere_pair(b, 0.0, &lat).S;
        op.multipole_basis = true;
        op.block_sizes = {b[0].Y.cols(), b[1].Y.cols()};
    }
    Eigen::VectorXcd rhs =
        0.5 * (detail::indicator(quads, op, 0) - detail::indicator(quads, op, 1));
    ops::SolveReport rep;
    Eigen::MatrixXcd psi =
        ops::solve_dense_mean_zero(op.matrix, detail::constraint_weights(quads, op), rhs, &rep);
    PeriodicCapacitance pc;
    pc.cond = rep.cond_estimate;
    auto ints = detail::boundary_integrals(quads, op, psi.col(0));
    pc.C11 = -ints[0].real();

    // dipoles from nodal values of psi0
    Eigen::VectorXcd nodal;
    if (!op.multipole_basis) {
        nodal = psi.col(0);
    } else {
        nodal.resize(Eigen::Index(quads[0].size() + quads[1].size()));
        std::array<ops::SphereBasis, 2> b{ops::make_sphere_basis(quads[0]),
                                          ops::make_sphere_basis(quads[1])};
        nodal.head(Eigen::Index(quads[0].size())) = b[0].Y * psi.col(0).head(op.block_sizes[0]);
        nodal.tail(Eigen::Index(quads[1].size())) = b[1].Y * psi.col(0).tail(op.block_sizes[1]);
    }
    Eigen::Index at = 0;
    for (int i = 0; i < 2; ++i) {
        auto& d = i == 0 ? pc.dipole1 : pc.dipole2;
        for (std::size_t q = 0; q < quads[std::size_t(i)].size(); ++q) {
            double w = quads[std::size_t(i)].weights[q];
            for (int c = 0; c < 3; ++c)
                d[std::size_t(c)] += w * quads[std::size_t(i)].nodes[q][std::size_t(c)] *
                                     nodal[at + Eigen::Index(q)].real();
        }
        at += Eigen::Index(quads[std::size_t(i)].size());
    }
    return pc;
}

// scalar dipole coefficient: normal (last-axis) component of the total dipole
// of psi0 over both boundaries. The mirror antisymmetry of psi0 makes the two
// per-resonator normal components equal while the in-plane components cancel.
inline double dipole_coefficient(const PeriodicCapacitance& pc, int dim) {
    return pc.dipole1[std::size_t(dim - 1)] + pc.dipole2[std::size_t(dim - 1)];
}

// leading interaction matrix of the screen expansion:
//   c1 = -(i w3 A / 2) [[1,1],[1,1]] - (i w3 c^2 / (2 A)) [[1,-1],[-1,1]]
// with A = L^{dim-1} the cell area and c the dipole coefficient
inline Eigen::Matrix2cd c1_matrix(double dipole_c, double w3, double L, int dim) {
    double A = dim == 2 ? L : L * L;
    Eigen::Matrix2cd ones, alt;
    ones << 1, 1, 1, 1;
    alt << 1, -1, -1, 1;
    return cplx(0.0, -0.5 * w3) * (A * ones + (dipole_c * dipole_c / A) * alt);
}

// two-sphere image-charge (Kelvin) series: equal radii R, center distance d.
// Independent of the boundary-integral path; used to cross-check C.
inline CapacitanceSet kelvin_capacitance(double R, double d, int iters = 200) {
    if (d <= 2.0 * R) throw std::invalid_argument("kelvin_capacitance: spheres must be disjoint");
    double q = R, x = 0.0, Q1 = R, Q2 = 0.0;
    for (int it = 0; it < iters; ++it) {
        double q2 = -q * R / (d - x);
        double x2 = d - R * R / (d - x);
        Q2 += q2;
        double q1 = -q2 * R / x2;
        double x1 = R * R / x2;
        Q1 += q1;
        q = q1;
        x = x1;
        if (std::abs(q) < 1e-17 * R) break;
    }
    CapacitanceSet cap;
    cap.C11 = 4.0 * pi * Q1;
    cap.C12 = 4.0 * pi * Q2;
    return cap;
}

}  // namespace subres
