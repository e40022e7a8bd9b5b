#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdlr/links.hpp"
#include "hdlr/quad.hpp"

namespace hdlr {

// Solution of the two-equation system
//   tau^2  = (1/kappa) E[ Psi(tau Z; b)^2 ]
//   kappa  = E[ Psi'(tau Z; b) ]
// together with the rescaling factor alpha = tau*^2 / b*.
struct ScalingSolution {
    double kappa = 0.0;
    double tau_star = 0.0;
    double b_star = 0.0;
    double alpha = 0.0;
    int iterations = 0;
    // defects of the two equations at the returned solution: {tau-eq, b-eq}
    std::array<double, 2> residuals{0.0, 0.0};
};

struct StateEvolutionTrace {
    std::vector<double> tau_sq;  // tau_t^2, starting at tau_0^2
    std::vector<double> b;       // b_t per executed step
};

struct CurvePoint {
    double kappa = 0.0;
    double tau_star = 0.0;
    double b_star = 0.0;
    double alpha = 0.0;
    bool ok = false;
    std::string error;
};

struct ScalingOptions {
    int gh_order = GaussianQuadrature::kDefaultOrder;
    // Above this tau the Gauss-Hermite rule can no longer resolve the
    // integrands' boundary layers (width ~ log(b tau)/tau) and expectations
    // switch to the adaptive rule with breakpoints at z = 0 and z = +-b/tau.
    double tau_gh_max = 5.0;
    double adaptive_rel_tol = 1e-11;
    double b_tol = 1e-10;         // |G(b) - kappa| at the returned b
    double fixed_point_tol = 1e-9;
    double damping = 0.5;
    int max_fixed_point_iters = 100000;
    double kappa_margin = 1e-3;   // admissible kappa < 1/2 - margin
};

class ScalingSolver {
  public:
    explicit ScalingSolver(EffectiveLink link, ScalingOptions opts = {});

    const EffectiveLink& link() const { return link_; }
    const ScalingOptions& options() const { return opts_; }

    // E[Psi'(tau Z; b)] and E[Psi(tau Z; b)^2]; exposed for residual checks.
    double expect_psi_prime(double tau, double b) const;
    double expect_psi_sq(double tau, double b) const;

    // Unique b > 0 with E[Psi'(tau Z; b)] = kappa. Bracketing by geometric
    // expansion, then bisection sharpened by secant steps. Throws
    // BracketFailureError if no bracket below b = 1e12.
    double solve_b(double kappa, double tau) const;

    // Variance map V(tau^2) = (1/kappa) E[Psi(tau Z; b(tau))^2]. tau_sq = 0
    // is the continuous limit: all quadrature mass sits at z = 0, so the
    // same code path solves b(0) = kappa/(rho''(c)(1-kappa)), c = prox(0),
    // self-consistently.
    double variance_map(double kappa, double tau_sq) const;

    // Damped fixed-point iteration tau^2 <- (1-damping) tau^2 + damping V(tau^2),
    // started at the classical value tau_0^2 = 4 kappa.
    ScalingSolution solve_system(double kappa) const;

    StateEvolutionTrace state_evolution(double kappa, double tau0_sq, int steps) const;

    // One solve per grid point; errors are recorded per point. n_threads = 0
    // picks the OpenMP default, 1 forces the serial reference path.
    std::vector<CurvePoint> alpha_curve(const std::vector<double>& kappas,
                                        int n_threads = 0) const;

    void check_kappa(double kappa) const;

  private:
    EffectiveLink link_;
    ScalingOptions opts_;
    GaussianQuadrature quad_;
};

// CSV with header kappa,tau_star,b_star,alpha at 12 significant digits.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& points);

}  // namespace hdlr
