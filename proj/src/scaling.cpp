#include "hdlr/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hdlr/errors.hpp"
#include "hdlr/prox.hpp"

namespace hdlr {

ScalingSolver::ScalingSolver(EffectiveLink link, ScalingOptions opts)
    : link_(link), opts_(opts), quad_(opts.gh_order) {}

double ScalingSolver::expect_psi_prime(double tau, double b) const {
    if (b == 0.0) return 0.0;
    if (tau <= opts_.tau_gh_max) {
        return quad_.expect([&](double u) { return prox_eval(link_, b, u).dpsi_dz; }, tau);
    }
    const double c = b / tau;
    return expect_adaptive([&](double u) { return prox_eval(link_, b, u).dpsi_dz; }, tau,
                           {0.0, c, -c}, opts_.adaptive_rel_tol);
}

double ScalingSolver::expect_psi_sq(double tau, double b) const {
    if (b == 0.0) return 0.0;
    if (tau <= opts_.tau_gh_max) {
        return quad_.expect(
            [&](double u) {
                const double p = prox_eval(link_, b, u).psi;
                return p * p;
            },
            tau);
    }
    const double c = b / tau;
    return expect_adaptive(
        [&](double u) {
            const double p = prox_eval(link_, b, u).psi;
            return p * p;
        },
        tau, {0.0, c, -c}, opts_.adaptive_rel_tol);
}

double ScalingSolver::solve_b(double kappa, double tau) const {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        throw KappaOutOfRangeError("solve_b: kappa must lie in (0,1)");
    }
    // G(b) = E[Psi'(tau Z; b)] increases from 0 to 1; expand the upper end
    // geometrically until it exceeds kappa.
    double lo = 0.0, glo = -kappa;
    double hi = 1.0;
    double ghi = expect_psi_prime(tau, hi) - kappa;
    while (ghi < 0.0) {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw BracketFailureError("solve_b: no upper bracket below b = 1e12");
        }
        ghi = expect_psi_prime(tau, hi) - kappa;
    }
    if (ghi == 0.0) return hi;

    // bisection with secant sharpening; stop on the residual criterion
    double b = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double cand = b;
        if (ghi != glo) {
            cand = hi - ghi * (hi - lo) / (ghi - glo);  // secant through bracket ends
        }
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        // alternate with bisection so the bracket cannot stagnate
        if (it % 2 == 1) cand = 0.5 * (lo + hi);
        b = cand;
        const double g = expect_psi_prime(tau, b) - kappa;
        if (std::fabs(g) < opts_.b_tol || 0.5 * (hi - lo) < 1e-15 * b) {
            return b;
        }
        if (g < 0.0) {
            lo = b;
            glo = g;
        } else {
            hi = b;
            ghi = g;
        }
    }
    return b;
}

double ScalingSolver::variance_map(double kappa, double tau_sq) const {
    if (tau_sq < 0.0) throw std::domain_error("variance_map: tau_sq must be nonnegative");
    const double tau = std::sqrt(tau_sq);
    const double b = solve_b(kappa, tau);
    return expect_psi_sq(tau, b) / kappa;
}

void ScalingSolver::check_kappa(double kappa) const {
    if (!(kappa > 0.0 && kappa < 0.5 - opts_.kappa_margin)) {
        throw KappaOutOfRangeError(
            "kappa must lie in (0, 1/2): the MLE is at infinity for kappa >= 1/2 "
            "(separability phase transition)");
    }
}

ScalingSolution ScalingSolver::solve_system(double kappa) const {
    check_kappa(kappa);
    double ts = 4.0 * kappa;  // classical logistic variance as initial point
    int it = 0;
    for (; it < opts_.max_fixed_point_iters; ++it) {
        const double v = variance_map(kappa, ts);
        const double tnew = (1.0 - opts_.damping) * ts + opts_.damping * v;
        const bool done = std::fabs(tnew - ts) < opts_.fixed_point_tol * std::max(1.0, ts);
        ts = tnew;
        if (done) break;
    }
    if (it >= opts_.max_fixed_point_iters) {
        throw NonConvergenceError("solve_system: fixed-point iteration did not converge");
    }
    ScalingSolution sol;
    sol.kappa = kappa;
    sol.tau_star = std::sqrt(ts);
    sol.b_star = solve_b(kappa, sol.tau_star);
    sol.alpha = ts / sol.b_star;
    sol.iterations = it + 1;
    sol.residuals[0] = ts - expect_psi_sq(sol.tau_star, sol.b_star) / kappa;
    sol.residuals[1] = kappa - expect_psi_prime(sol.tau_star, sol.b_star);
    return sol;
}

StateEvolutionTrace ScalingSolver::state_evolution(double kappa, double tau0_sq,
                                                   int steps) const {
    if (tau0_sq < 0.0) throw std::domain_error("state_evolution: tau0_sq must be nonnegative");
    StateEvolutionTrace trace;
    trace.tau_sq.push_back(tau0_sq);
    double ts = tau0_sq;
    for (int t = 0; t < steps; ++t) {
        const double tau = std::sqrt(ts);
        const double bt = solve_b(kappa, tau);
        trace.b.push_back(bt);
        ts = expect_psi_sq(tau, bt) / kappa;
        trace.tau_sq.push_back(ts);
    }
    return trace;
}

std::vector<CurvePoint> ScalingSolver::alpha_curve(const std::vector<double>& kappas,
                                                   int n_threads) const {
    std::vector<CurvePoint> out(kappas.size());
    auto solve_one = [&](std::size_t i) {
        out[i].kappa = kappas[i];
        try {
            const ScalingSolution s = solve_system(kappas[i]);
            out[i].tau_star = s.tau_star;
            out[i].b_star = s.b_star;
            out[i].alpha = s.alpha;
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].ok = false;
            out[i].error = e.what();
        }
    };
    if (n_threads == 1) {
        for (std::size_t i = 0; i < kappas.size(); ++i) solve_one(i);
        return out;
    }
#ifdef _OPENMP
    const std::int64_t count = static_cast<std::int64_t>(kappas.size());
#pragma omp parallel for schedule(dynamic) num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
    for (std::int64_t i = 0; i < count; ++i) solve_one(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < kappas.size(); ++i) solve_one(i);
#endif
    return out;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
    os << "kappa,tau_star,b_star,alpha\n";
    char buf[160];
    for (const auto& p : points) {
        if (!p.ok) {
            std::snprintf(buf, sizeof(buf), "%.12g,error,error,error\n", p.kappa);
        } else {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", p.kappa, p.tau_star,
                          p.b_star, p.alpha);
        }
        os << buf;
    }
}

}  // namespace hdlr
