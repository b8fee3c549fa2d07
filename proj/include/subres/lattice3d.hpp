#pragma once
// Lattice correction dG = G^{alpha,k} - G^k_free for a square lattice of
// period L in the x1 x2-plane, ambient dimension 3.
//
// The windowed spectral sum converges superalgebraically whenever the target
// point stays away from the source images (which all sit on the x3 = 0
// plane at in-plane lattice positions). Same-sphere node differences cluster
// around d = 0 where that fails; there dG is a regular Helmholtz (or
// harmonic) solution, so we fit dG = sum_lm a_lm j_l(k r) Y_lm on a sphere
// of radius rho and evaluate the expansion instead. Used by the operator
// assembly for quasiperiodic sphere problems; pointwise Green's evaluators
// live in greens.hpp.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "subres/greens.hpp"
#include "subres/special.hpp"
#include "subres/types.hpp"

namespace subres::greens {

class PlanarLatticeSum {
  public:
    PlanarLatticeSum(const QuasiMomentum& qm, double k, double L, int mq_cap = 110, int lmax = 28,
                     double rho_frac = 0.45)
        : a1_(qm.alpha[0]), a2_(qm.alpha[1]), k_(k), L_(L), mq_cap_(mq_cap), lmax_(lmax) {
        if (qm.ambient_dim != 3) throw std::invalid_argument("PlanarLatticeSum: ambient_dim 3 required");
        periodic_ = (k_ == 0.0 && a1_ == 0.0 && a2_ == 0.0);
        if (!periodic_) assert_no_wood(qm, k, L);
        rho_ = rho_frac * L_;
        fit_local();
    }

    double rho() const { return rho_; }

    // windowed spectral sum minus the free kernel; needs d away from images
    cplx eval_direct(const point3& d) const {
        const double ax3 = std::abs(d[2]);
        int M = mq_cap_;
        if (ax3 > 0.0) M = std::min(M, std::max(24, int(std::ceil(5.5 * L_ / ax3))));
        const double b = 2.0 * pi / L_;
        const cplx I(0.0, 1.0);
        cplx sum = 0.0;
        for (int n1 = -M; n1 <= M; ++n1)
            for (int n2 = -M; n2 <= M; ++n2) {
                double w = detail::window(std::hypot(double(n1), double(n2)) / (M + 0.5));
                if (w == 0.0) continue;
                if (periodic_ && n1 == 0 && n2 == 0) {
                    sum += ax3 / (2.0 * L_ * L_);  // the q = 0 mode of G^{0,0}
                    continue;
                }
                double p1 = a1_ + n1 * b, p2 = a2_ + n2 * b;
                cplx kz = std::sqrt(cplx(k_ * k_ - p1 * p1 - p2 * p2, 0.0));
                if (kz.real() < 0.0) kz = -kz;
                sum += w * std::exp(I * (p1 * d[0] + p2 * d[1]) + I * kz * ax3) / (2.0 * I * kz * L_ * L_);
            }
        return sum - green_free(d, k_, 3);
    }

    // local expansion; valid for |d| <= 0.75 rho
    cplx eval_local(const point3& d) const {
        const double r = detail::norm2(d);
        if (r > 0.75 * rho_) throw std::domain_error("PlanarLatticeSum: eval_local out of range");
        double ct = r > 0.0 ? d[2] / r : 1.0;
        ct = std::clamp(ct, -1.0, 1.0);
        const double phi = std::atan2(d[1], d[0]);
        cplx out = 0.0;
        std::size_t idx = 0;
        for (int l = 0; l <= lmax_; ++l) {
            cplx rad;
            if (k_ == 0.0) {
                rad = std::pow(r / rho_, l);
            } else {
                rad = std::pow(r / rho_, l) * sph_series(l, k_ * r) / sph_series(l, k_ * rho_);
            }
            for (int m = -l; m <= l; ++m, ++idx)
                out += coef_[idx] * rad * special::sph_harm(l, m, ct, phi);
        }
        return out;
    }

    cplx eval(const point3& d) const {
        if (detail::norm2(d) <= 0.7 * rho_) return eval_local(d);
        return eval_direct(d);
    }

  private:
    double a1_, a2_, k_, L_;
    int mq_cap_, lmax_;
    bool periodic_ = false;
    double rho_ = 0.0;
    std::vector<cplx> coef_;  // c_lm = a_lm * radial(rho), (l,m) row-major

    // s_l(z) with j_l(z) = z^l/(2l+1)!! * s_l(z); cancels the power prefactor
    static cplx sph_series(int l, double z) {
        cplx t = 1.0, s = 1.0;
        double z2 = -0.5 * z * z;
        for (int m = 1; m < 60; ++m) {
            t *= z2 / (double(m) * double(2 * l + 1 + 2 * m));
            s += t;
            if (std::abs(t) < 1e-18 * std::abs(s)) break;
        }
        return s;
    }

    void fit_local() {
        const int nth = lmax_ + 1, nph = 2 * lmax_ + 2;
        std::vector<double> gx, gw;
        subres::detail::gauss_legendre(nth, gx, gw);
        std::vector<cplx> vals(std::size_t(nth) * nph);
        std::vector<double> wq(std::size_t(nth) * nph);
        std::vector<double> cts(std::size_t(nth) * nph), phs(std::size_t(nth) * nph);
        for (int it = 0; it < nth; ++it) {
            double ct = gx[std::size_t(it)], st = std::sqrt(1.0 - ct * ct);
            for (int ip = 0; ip < nph; ++ip) {
                double ph = 2.0 * pi * ip / nph;
                std::size_t j = std::size_t(it) * nph + ip;
                point3 p{rho_ * st * std::cos(ph), rho_ * st * std::sin(ph), rho_ * ct};
                vals[j] = eval_direct(p);
                wq[j] = gw[std::size_t(it)] * (2.0 * pi / nph);
                cts[j] = ct;
                phs[j] = ph;
            }
        }
        coef_.assign(std::size_t(lmax_ + 1) * (lmax_ + 1), 0.0);
        std::size_t idx = 0;
        for (int l = 0; l <= lmax_; ++l)
            for (int m = -l; m <= l; ++m, ++idx) {
                cplx acc = 0.0;
                for (std::size_t j = 0; j < vals.size(); ++j)
                    acc += wq[j] * std::conj(special::sph_harm(l, m, cts[j], phs[j])) * vals[j];
                coef_[idx] = acc;
            }
    }
};

}  // namespace subres::greens
