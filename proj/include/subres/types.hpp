#pragma once
// Resonator geometry, PT-symmetric dimers, lattice cells, material parameters.
//
// Conventions used throughout the library:
//   * the dimer symmetry axis is the LAST coordinate (x2 in 2D, x3 in 3D),
//     so a "screen" dimer sits at centers (0, ..., +/-(gap/2 + R));
//   * gap is the surface-to-surface separation;
//   * material contrast enters as v1^2 delta1 = a + ib, v2^2 delta2 = a - ib.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace subres {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

enum class ShapeKind { disk, sphere };

struct ResonatorShape {
    ShapeKind kind = ShapeKind::sphere;
    double radius = 1.0;
    std::array<double, 3> center{0.0, 0.0, 0.0};  // x3 unused for disks

    int dim() const { return kind == ShapeKind::disk ? 2 : 3; }

    // |D|: area for disks, volume for spheres
    double measure() const {
        return kind == ShapeKind::disk ? pi * radius * radius
                                       : 4.0 / 3.0 * pi * radius * radius * radius;
    }
    double boundary_measure() const {
        return kind == ShapeKind::disk ? 2.0 * pi * radius
                                       : 4.0 * pi * radius * radius;
    }
};

struct MaterialParams {
    double a = 1.0;       // common real part of v_i^2 delta_i
    double b = 0.0;       // gain/loss magnitude, >= 0
    double v = 1.0;       // background wave speed
    double delta_scale = 0.0;  // |delta_1|, bookkeeping only

    MaterialParams() = default;
    MaterialParams(double a_, double b_, double v_ = 1.0)
        : a(a_), b(b_), v(v_), delta_scale(std::hypot(a_, b_) / (v_ * v_)) {
        if (a <= 0.0) throw std::invalid_argument("MaterialParams: a must be > 0");
        if (b < 0.0) throw std::invalid_argument("MaterialParams: b must be >= 0");
        if (v <= 0.0) throw std::invalid_argument("MaterialParams: v must be > 0");
    }

    cplx delta(int i) const {  // i = 0 (gain) or 1 (loss)
        cplx vd = (i == 0) ? cplx(a, b) : cplx(a, -b);
        return vd / (v * v);
    }
    cplx v2delta(int i) const { return (i == 0) ? cplx(a, b) : cplx(a, -b); }
};

struct DimerConfig {
    ResonatorShape shape;   // template resonator (center ignored)
    double gap = 1.0;       // surface-to-surface along the symmetry axis
    MaterialParams materials;
};

struct PtDimer {
    std::array<ResonatorShape, 2> shapes;
    MaterialParams materials;

    int dim() const { return shapes[0].dim(); }
    double radius() const { return shapes[0].radius; }
    // half the center-to-center distance
    double half_dist() const { return std::abs(shapes[0].center[dim() - 1]); }
};

inline PtDimer build_pt_dimer(const DimerConfig& cfg) {
    if (cfg.gap <= 0.0) throw std::invalid_argument("build_pt_dimer: gap must be > 0");
    if (cfg.shape.radius <= 0.0) throw std::invalid_argument("build_pt_dimer: radius must be > 0");
    PtDimer d;
    d.materials = cfg.materials;
    const int ax = cfg.shape.dim() - 1;
    const double h = cfg.gap / 2.0 + cfg.shape.radius;
    for (int i = 0; i < 2; ++i) {
        d.shapes[i] = cfg.shape;
        d.shapes[i].center = {0.0, 0.0, 0.0};
        d.shapes[i].center[ax] = (i == 0 ? +h : -h);  // D1 at +h, D2 = -D1
    }
    return d;
}

inline bool validate_pt_symmetry(const std::array<ResonatorShape, 2>& s,
                                 const std::array<cplx, 2>& v2delta,
                                 double tol = 1e-12) {
    if (s[0].kind != s[1].kind) return false;
    if (std::abs(s[0].radius - s[1].radius) > tol) return false;
    for (int c = 0; c < 3; ++c)
        if (std::abs(s[0].center[c] + s[1].center[c]) > tol) return false;
    return std::abs(v2delta[0] - std::conj(v2delta[1])) <= tol;
}

inline bool validate_pt_symmetry(const PtDimer& d, double tol = 1e-12) {
    return validate_pt_symmetry(d.shapes, {d.materials.v2delta(0), d.materials.v2delta(1)}, tol);
}

struct LatticeConfig {
    double L = 1.0;
    int ambient_dim = 2;  // 2: 1D chain of disk dimers, 3: square lattice of sphere dimers

    LatticeConfig() = default;
    LatticeConfig(double L_, int dim_) : L(L_), ambient_dim(dim_) {
        if (L <= 0.0) throw std::invalid_argument("LatticeConfig: L must be > 0");
        if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("LatticeConfig: ambient_dim must be 2 or 3");
    }

    void check_fits(const PtDimer& d) const {
        if (d.dim() != ambient_dim)
            throw std::invalid_argument("LatticeConfig: dimer dimension mismatch");
        // in-plane extent of each resonator must fit in the unit cell
        if (2.0 * d.radius() >= L)
            throw std::invalid_argument("LatticeConfig: dimer does not fit in the cell");
    }
};

// Nystrom / multipole quadrature on one resonator boundary.
struct BoundaryQuadrature {
    ResonatorShape shape;
    int basis_order = 0;                       // Fourier order (disk) or SH degree (sphere)
    std::vector<std::array<double, 3>> nodes;  // on the boundary
    std::vector<std::array<double, 3>> normals;
    std::vector<double> weights;               // surface measure
    std::vector<double> wsolid;                // sphere only: solid-angle weights

    std::size_t size() const { return nodes.size(); }
    // multipole coefficient count: 2N+1 Fourier modes (disk), (N+1)^2 harmonics (sphere)
    std::size_t n_modes() const {
        return shape.kind == ShapeKind::disk ? std::size_t(2 * basis_order + 1)
                                             : std::size_t((basis_order + 1) * (basis_order + 1));
    }
};

namespace detail {
// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}
}  // namespace detail

inline BoundaryQuadrature boundary_quadrature(const ResonatorShape& shape, int basis_order,
                                              int node_count_override = 0) {
    if (basis_order < 1) throw std::invalid_argument("boundary_quadrature: basis_order >= 1 required");
    BoundaryQuadrature q;
    q.shape = shape;
    q.basis_order = basis_order;
    const double R = shape.radius;
    if (shape.kind == ShapeKind::disk) {
        // odd node count keeps the Fourier mode set symmetric
        int M = node_count_override > 0 ? node_count_override : 2 * basis_order + 1;
        q.nodes.resize(M);
        q.normals.resize(M);
        q.weights.assign(M, 2.0 * pi * R / M);
        for (int j = 0; j < M; ++j) {
            double th = 2.0 * pi * j / M;
            double c = std::cos(th), s = std::sin(th);
            q.normals[j] = {c, s, 0.0};
            q.nodes[j] = {shape.center[0] + R * c, shape.center[1] + R * s, 0.0};
        }
    } else {
        int nth = basis_order + 1, nph = 2 * basis_order + 2;
        std::vector<double> gx, gw;
        detail::gauss_legendre(nth, gx, gw);
        q.nodes.reserve(std::size_t(nth) * nph);
        for (int it = 0; it < nth; ++it) {
            double ct = gx[it], st = std::sqrt(1.0 - ct * ct);
            for (int ip = 0; ip < nph; ++ip) {
                double ph = 2.0 * pi * ip / nph;
                std::array<double, 3> nu{st * std::cos(ph), st * std::sin(ph), ct};
                q.normals.push_back(nu);
                q.nodes.push_back({shape.center[0] + R * nu[0], shape.center[1] + R * nu[1],
                                   shape.center[2] + R * nu[2]});
                double ws = gw[it] * (2.0 * pi / nph);
                q.wsolid.push_back(ws);
                q.weights.push_back(ws * R * R);
            }
        }
    }
    return q;
}

}  // namespace subres
