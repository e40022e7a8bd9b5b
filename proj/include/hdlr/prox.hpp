#pragma once

#include "hdlr/links.hpp"

namespace hdlr {

// One proximal evaluation at (b, z).
//
// x_star minimizes b*rho(x) + (x - z)^2/2, i.e. solves the stationarity
// equation x + b*rho'(x) = z. The companion operator
//   Psi(z; b) = b * rho'(x_star) = z - x_star
// is the prox of the conjugate (Moreau split), and
//   dPsi/dz = b*rho''(x_star) / (1 + b*rho''(x_star))  in (0, 1) for b > 0.
struct ProxEval {
    double x_star;
    double psi;
    double dpsi_dz;
    double b;
    double z;
};

// Safeguarded Newton on g(x) = x + b*rho'(x) - z over the bracket
// [z - b*rho'(z), z]; g is strictly increasing (g' = 1 + b*rho'' > 1), so
// bisection is a guaranteed fallback whenever a Newton step leaves the
// strict interior of the current bracket. Stops at
// |g| < 1e-12 * max(1, |z|); throws NonConvergenceError after 200 steps.
// b = 0 is the identity limit (x_star = z, psi = 0).
ProxEval prox_eval(const EffectiveLink& link, double b, double z);

double prox(const EffectiveLink& link, double b, double z);
double psi(const EffectiveLink& link, double b, double z);
double dpsi_dz(const EffectiveLink& link, double b, double z);

}  // namespace hdlr
