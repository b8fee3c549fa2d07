#pragma once
// Lattice correction dG = G^{alpha,k} - G^k_free (and gradient) for a 1D
// chain of period L in ambient dimension 2.
//
// Strategy: the n != 0 dual modes are summed with the (k=0, alpha=0) mode
// profile split off per term; that reference series has the closed form
// log(E)/4pi, so the summed remainder decays like e^{-q_n |x2|} and a
// summation-by-parts tail handles the algebraic residue at small |x2|.
//
// The q-series gradient is not uniformly convergent as x2 -> 0 (each sign
// branch leaves an i*alpha/(4 pi) deficit there), so a strip around the
// chain axis cannot be summed directly. dG is a regular Helmholtz solution
// for |d| < L, hence equals sum_m a_m J_m(k r) e^{i m theta}; we fit that
// expansion on the circle r = rho (where the series is trustworthy) and
// evaluate near the axis from the fit. eval_auto routes between the two.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "subres/special.hpp"
#include "subres/types.hpp"

namespace subres::greens {

class ChainLatticeSum {
  public:
    struct Val {
        cplx v{0.0};
        cplx gx{0.0}, gy{0.0};
    };

    ChainLatticeSum(double alpha, double k, double L, int nq = 2500, bool with_local_fit = true)
        : alpha_(alpha), k_(k), L_(L), nq_(nq) {
        if (L <= 0.0) throw std::invalid_argument("ChainLatticeSum: L > 0 required");
        if (k < 0.0) throw std::invalid_argument("ChainLatticeSum: k >= 0 required");
        double b2 = k * k - alpha * alpha;
        b0_ = b2 >= 0.0 ? cplx(std::sqrt(b2), 0.0) : cplx(0.0, std::sqrt(-b2));
        if (std::abs(b0_) < 1e-12 * std::max(1.0, k))
            throw std::domain_error("ChainLatticeSum: Wood anomaly (flat propagating order)");
        if (with_local_fit) fit_local();
    }

    double alpha() const { return alpha_; }
    double k() const { return k_; }
    double L() const { return L_; }

    // direct q-series evaluation; trustworthy away from the x2 ~ 0 strip
    Val eval_direct(double x1, double x2, bool want_grad) const {
        Val out = qsum(x1, x2, want_grad);
        const double ax2 = std::abs(x2);
        const double sg = x2 >= 0.0 ? 1.0 : -1.0;  // sign convention irrelevant at x2=0 (grad comes from fit there)
        const cplx I(0.0, 1.0);

        cplx T0 = std::exp(I * alpha_ * x1 + I * b0_ * ax2) / (2.0 * I * b0_ * L_);
        out.v += T0;
        if (want_grad) {
            out.gx += I * alpha_ * T0;
            out.gy += I * b0_ * sg * T0;
        }

        const double r = std::hypot(x1, x2);
        const double s = 2.0 * pi * x1 / L_;
        const double t = 2.0 * pi * ax2 / L_;
        const double emt = std::exp(-t);
        const double sh = std::sin(0.5 * s);
        const double E = (1.0 - emt) * (1.0 - emt) + 4.0 * emt * sh * sh;

        if (r < 1e-10) {
            // limit of log(E)/4pi - G_free as d -> 0
            constexpr double euler_gamma = 0.57721566490153286;
            if (k_ == 0.0)
                out.v += std::log(2.0 * pi / L_) / (2.0 * pi);
            else
                out.v += cplx(std::log(4.0 * pi / (k_ * L_)) / (2.0 * pi) - euler_gamma / (2.0 * pi), 0.25);
            return out;  // gradient of the smooth remainder vanishes at 0
        }

        out.v += std::log(E) / (4.0 * pi);
        if (k_ == 0.0)
            out.v -= std::log(r) / (2.0 * pi);
        else
            out.v -= cplx(0.0, -0.25) * special::hank1(0, k_ * r);

        if (want_grad) {
            double dEds = 2.0 * emt * std::sin(s);
            double dEdt = 2.0 * emt * (1.0 - emt) - 4.0 * emt * sh * sh;
            double fac = (2.0 * pi / L_) / (4.0 * pi * E);
            out.gx += dEds * fac;
            out.gy += dEdt * fac * sg;
            if (k_ == 0.0) {
                out.gx -= x1 / (2.0 * pi * r * r);
                out.gy -= x2 / (2.0 * pi * r * r);
            } else {
                cplx gf = cplx(0.0, 0.25) * k_ * special::hank1(1, k_ * r) / r;
                out.gx -= gf * x1;
                out.gy -= gf * x2;
            }
        }
        return out;
    }

    // evaluate from the fitted local expansion; valid for r <= 0.75 rho.
    // Phases and Bessel-series factors are built incrementally: the loop body
    // runs ~4k times per operator assembly, so no std::pow / per-term series.
    Val eval_local(double x1, double x2, bool want_grad) const {
        if (coef_.empty()) throw std::logic_error("ChainLatticeSum: local fit not built");
        const double r = std::hypot(x1, x2);
        if (r > 0.75 * rho_) throw std::domain_error("ChainLatticeSum: eval_local out of range");
        const double th = std::atan2(x2, x1);
        const cplx eith = std::exp(cplx(0.0, th));
        const double u = r / rho_;
        const std::size_t top = std::size_t(mmax_) + 2;
        std::vector<double> upow(top);
        upow[0] = 1.0;
        for (std::size_t n = 1; n < top; ++n) upow[n] = upow[n - 1] * u;
        std::vector<cplx> eim(top);  // e^{i n th}, n >= 0
        eim[0] = 1.0;
        for (std::size_t n = 1; n < top; ++n) eim[n] = eim[n - 1] * eith;
        std::vector<cplx> Sr;
        if (k_ != 0.0) {
            Sr.resize(top);
            for (std::size_t n = 0; n < top; ++n)
                Sr[n] = special::bessel_series_factor(int(n), k_ * r);
        }
        // J_n(k r) / J_m(k rho) with the power prefactors cancelled, as in
        // jratio() but against the cached arrays; n, m >= 0, |n - m| <= 1
        auto jr = [&](int n, int m) -> cplx {
            if (k_ == 0.0) return upow[std::size_t(n)];
            double pw;
            if (n == m)
                pw = upow[std::size_t(m)];
            else if (n == m + 1)
                pw = upow[std::size_t(m)] * (k_ * r / 2.0) / double(m + 1);
            else
                pw = upow[std::size_t(m - 1)] * (double(m) / (k_ * rho_ / 2.0));
            return pw * Sr[std::size_t(n)] / Srho_[std::size_t(m)];
        };
        Val out;
        cplx gp = 0.0, gm = 0.0;  // (d1 + i d2), (d1 - i d2) halves
        for (int m = -mmax_; m <= mmax_; ++m) {
            const cplx cm = coef_[std::size_t(m + mmax_)];
            const int ma = m < 0 ? -m : m;
            const cplx em = m < 0 ? std::conj(eim[std::size_t(ma)]) : eim[std::size_t(ma)];
            out.v += cm * jr(ma, ma) * em;
            if (!want_grad) continue;
            if (k_ == 0.0) {
                // harmonic limit: c_m (r/rho)^{|m|} e^{i m th}
                if (m > 0)
                    gm += cm * double(m) * upow[std::size_t(m - 1)] / rho_ * eim[std::size_t(m - 1)];
                else if (m < 0)
                    gp += cm * double(-m) * upow[std::size_t(-m - 1)] / rho_ *
                          std::conj(eim[std::size_t(-m - 1)]);
            } else {
                // (d1 + i d2)[J_m e^{im th}] = -k J_{m+1} e^{i(m+1)th}
                // (d1 - i d2)[J_m e^{im th}] = +k J_{m-1} e^{i(m-1)th}
                // J_{-p} = (-1)^p J_p maps both onto the |index| arrays
                const int np = m + 1, nm = m - 1;
                const int npa = np < 0 ? -np : np, nma = nm < 0 ? -nm : nm;
                const double smm = m < 0 && (ma & 1) ? -1.0 : 1.0;
                const double sp = smm * (np < 0 && (npa & 1) ? -1.0 : 1.0);
                const double sm = smm * (nm < 0 && (nma & 1) ? -1.0 : 1.0);
                const cplx ep = np < 0 ? std::conj(eim[std::size_t(npa)]) : eim[std::size_t(npa)];
                const cplx en = nm < 0 ? std::conj(eim[std::size_t(nma)]) : eim[std::size_t(nma)];
                gp += cm * (-k_) * sp * jr(npa, ma) * ep;
                gm += cm * (+k_) * sm * jr(nma, ma) * en;
            }
        }
        if (want_grad) {
            if (k_ == 0.0) {
                out.gx = gp + gm;
                out.gy = cplx(0.0, -1.0) * (gp - gm);
            } else {
                out.gx = 0.5 * (gp + gm);
                out.gy = (gp - gm) / cplx(0.0, 2.0);
            }
        }
        return out;
    }

    Val eval(double x1, double x2, bool want_grad = false) const {
        if (!coef_.empty() && std::hypot(x1, x2) <= 0.7 * rho_) return eval_local(x1, x2, want_grad);
        return eval_direct(x1, x2, want_grad);
    }

    void fit_local(double rho_frac = 0.45, int Mf = 512, int mmax = 72) {
        rho_ = rho_frac * L_;
        mmax_ = std::min(mmax, Mf / 2 - 2);
        Srho_.clear();
        if (k_ != 0.0)
            for (int n = 0; n <= mmax_ + 1; ++n)
                Srho_.push_back(special::bessel_series_factor(n, k_ * rho_));
        std::vector<cplx> vals{std::vector<cplx>(std::size_t(Mf))};
        for (int j = 0; j < Mf; ++j) {
            double th = 2.0 * pi * j / Mf;
            vals[std::size_t(j)] = eval_direct(rho_ * std::cos(th), rho_ * std::sin(th), false).v;
        }
        // c_m = a_m J_m(k rho): partial DFT of the ring samples
        coef_.assign(std::size_t(2 * mmax_ + 1), 0.0);
        for (int m = -mmax_; m <= mmax_; ++m) {
            cplx acc = 0.0;
            const cplx step = std::exp(cplx(0.0, -2.0 * pi * m / Mf));
            cplx ph = 1.0;
            for (int j = 0; j < Mf; ++j) {
                acc += vals[std::size_t(j)] * ph;
                ph *= step;
            }
            coef_[std::size_t(m + mmax_)] = acc / double(Mf);
        }
    }

  private:
    double alpha_, k_, L_;
    int nq_;
    cplx b0_;
    double rho_ = 0.0;
    int mmax_ = 0;
    std::vector<cplx> coef_;
    std::vector<cplx> Srho_;  // bessel_series_factor(n, k rho), n = 0..mmax+1

    // J_n(k r) / J_m(k rho) for |n - m| <= 1, via the normalized series
    // S_n(z) with the underflow-prone power prefactors cancelled by hand.
    cplx jratio(int n, double r, int m) const {
        double sgn = 1.0;
        if (n < 0) {
            if (n & 1) sgn = -sgn;
            n = -n;
        }
        if (m < 0) {
            if (m & 1) sgn = -sgn;
            m = -m;
        }
        if (k_ == 0.0) return sgn * std::pow(r / rho_, n);  // only n == m reaches here
        const int extra = n - m;
        double pw;
        if (extra == 0)
            pw = std::pow(r / rho_, m);
        else if (extra == 1)
            pw = std::pow(r / rho_, m) * (k_ * r / 2.0) / double(m + 1);
        else
            pw = std::pow(r / rho_, m - 1) * (double(m) / (k_ * rho_ / 2.0));
        return sgn * pw * special::bessel_series_factor(n, k_ * r) /
               special::bessel_series_factor(m, k_ * rho_);
    }

    // one dual-mode term pair: value r_n = -(T - P), x1/|x2| partials
    struct Term {
        cplx r, rx, ry;
    };
    Term term(double n, double sgn, double x1, double ax2, bool want_grad) const {
        const cplx I(0.0, 1.0);
        const double q = sgn * 2.0 * pi * n / L_;
        const double aq = alpha_ + q;
        const cplx gam = std::sqrt(cplx(aq * aq - k_ * k_, 0.0));
        const cplx T = std::exp(I * alpha_ * x1 - gam * ax2) / (2.0 * gam * L_);
        const double P = std::exp(-std::abs(q) * ax2) / (2.0 * std::abs(q) * L_);
        Term t;
        t.r = -(T - P);
        if (want_grad) {
            t.rx = -(I * alpha_ * T);
            t.ry = gam * T - std::abs(q) * P;
        }
        return t;
    }

    Val qsum(double x1, double x2, bool want_grad) const {
        const cplx I(0.0, 1.0);
        const double ax2 = std::abs(x2);
        const double sg = x2 >= 0.0 ? 1.0 : -1.0;
        // truncation error ~ e^{-2 pi N |x2| / L}: shrink N when x2 is large
        int N = nq_;
        if (ax2 > 0.0) N = std::min(N, std::max(16, int(std::ceil(5.5 * L_ / ax2))));
        Val out;
        for (double sgn : {+1.0, -1.0}) {
            const double s = sgn * 2.0 * pi * x1 / L_;
            const cplx z = std::exp(I * s);
            cplx ph = z;
            for (int n = 1; n <= N; ++n) {
                Term t = term(double(n), sgn, x1, ax2, want_grad);
                const double q = sgn * 2.0 * pi * n / L_;
                out.v += ph * t.r;
                if (want_grad) {
                    out.gx += ph * (I * q * t.r + t.rx);
                    out.gy += ph * t.ry * sg;
                }
                ph *= z;
            }
            // summation-by-parts tail over n > N (8 forward differences);
            // skipped near the sbp pole z = 1, where only fitted evaluation is valid
            if (std::abs(1.0 - z) <= 0.15) continue;
            constexpr int nparts = 8;
            Term tt[nparts];
            for (int j = 0; j < nparts; ++j) tt[j] = term(double(N + 1 + j), sgn, x1, ax2, want_grad);
            const cplx ph0 = std::pow(z, N + 1);
            auto tail_of = [&](auto&& get) {
                cplx diffs[nparts];
                for (int j = 0; j < nparts; ++j) diffs[j] = get(tt[j], double(N + 1 + j));
                cplx acc = 0.0;
                cplx fac = 1.0 / (1.0 - z);
                int len = nparts;
                for (int j = 0; j < nparts; ++j) {
                    acc += diffs[0] * fac;
                    if (len == 1) break;
                    for (int i = 0; i + 1 < len; ++i) diffs[i] = diffs[i + 1] - diffs[i];
                    --len;
                    fac *= z / (1.0 - z);
                }
                return acc;
            };
            out.v += ph0 * tail_of([&](const Term& t, double) { return t.r; });
            if (want_grad) {
                out.gx += ph0 * tail_of([&](const Term& t, double n) {
                    return I * (sgn * 2.0 * pi * n / L_) * t.r + t.rx;
                });
                out.gy += ph0 * tail_of([&](const Term& t, double) { return t.ry; }) * sg;
            }
        }
        return out;
    }
};

}  // namespace subres::greens
