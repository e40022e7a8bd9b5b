#include "hdlr/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdlr/errors.hpp"

namespace hdlr {

ProxEval prox_eval(const EffectiveLink& link, double b, double z) {
    if (!(b >= 0.0)) throw std::invalid_argument("prox: b must be nonnegative");
    if (b == 0.0) return {z, 0.0, 0.0, b, z};

    // rho' is nondecreasing, so x_star \in [z - b*rho'(z), z].
    double lo = z - b * link.rho1(z);
    double hi = z;
    double x = lo;  // Newton initial guess z - b*rho1(z), already in bracket
    const double tol = 1e-12 * std::max(1.0, std::fabs(z));
    double step_old = hi - lo;

    for (int it = 0; it < 200; ++it) {
        const double r1 = link.rho1(x);
        const double g = (x - z) + b * r1;
        if (std::fabs(g) < tol) {
            const double r2 = link.rho2(x);
            const double br2 = b * r2;
            return {x, b * r1, br2 / (1.0 + br2), b, z};
        }
        if (g > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double gp = 1.0 + b * link.rho2(x);
        const double step = g / gp;
        double xn = x - step;
        // bisect when the Newton step leaves the strict interior of the
        // bracket or is not shrinking fast enough (Newton can two-cycle
        // between the flat and steep flanks of g without this safeguard)
        if (!(xn > lo && xn < hi) || std::fabs(2.0 * g) > std::fabs(step_old * gp)) {
            xn = 0.5 * (lo + hi);
            step_old = 0.5 * (hi - lo);
        } else {
            step_old = step;
        }
        x = xn;
    }
    throw NonConvergenceError("prox: Newton/bisection failed to converge in 200 iterations");
}

double prox(const EffectiveLink& link, double b, double z) {
    return prox_eval(link, b, z).x_star;
}

double psi(const EffectiveLink& link, double b, double z) {
    return prox_eval(link, b, z).psi;
}

double dpsi_dz(const EffectiveLink& link, double b, double z) {
    return prox_eval(link, b, z).dpsi_dz;
}

}  // namespace hdlr
