#include "hdlr/links.hpp"

#include <cmath>
#include <stdexcept>

#include "hdlr/dist.hpp"

namespace hdlr {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

double softplus(double t) {
    if (t <= -37.0) return std::exp(t);
    if (t <= 18.0) return std::log1p(std::exp(t));
    if (t <= 33.3) return t + std::exp(-t);
    return t;
}

double sigmoid(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Mills ratio R(t) = Phi(-t)/phi(t) for t > 0 via the continued fraction
//   R(t) = 1/(t + 1/(t + 2/(t + 3/(...)))),
// evaluated with the modified Lentz algorithm.
double mills_ratio_cf(double t) {
    const double tiny = 1e-300;
    double f = t;
    if (f == 0.0) f = tiny;
    double c = f;
    double d = 0.0;
    for (int k = 1; k <= 300; ++k) {
        const double a = static_cast<double>(k);  // numerator coefficients 1,2,3,...
        d = t + a * d;
        if (d == 0.0) d = tiny;
        c = t + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double mult = c * d;
        f *= mult;
        if (std::fabs(mult - 1.0) < 1e-17) break;
    }
    return 1.0 / f;
}

// Mills excess m(t) = phi(t)/Phi(-t) - t for large t, by the asymptotic
// series 1/t - 2/t^3 + 10/t^5 - 74/t^7 + 706/t^9; relative error < 1e-13
// for t >= 50. Evaluating rho' - t this way avoids the catastrophic
// cancellation (absolute error t*eps on a value ~ 1/t) that otherwise
// poisons rho'' at large arguments.
double mills_excess_series(double t) {
    const double s = 1.0 / (t * t);
    return (1.0 + s * (-2.0 + s * (10.0 + s * (-74.0 + s * 706.0)))) / t;
}

// phi(t)/Phi(-t), the probit rho'.
double inverse_mills(double t) {
    if (t >= 50.0) return t + mills_excess_series(t);
    if (t > 8.0) return 1.0 / mills_ratio_cf(t);
    // Both phi(t) and Phi(-t) are representable here; Phi(-8) ~ 6.2e-16.
    const double phi = std::exp(-0.5 * t * t - kHalfLog2Pi);
    return phi / normal_cdf(-t);
}

}  // namespace

Model parse_model(const std::string& name) {
    if (name == "logistic") return Model::Logistic;
    if (name == "probit") return Model::Probit;
    throw std::invalid_argument("unknown model '" + name + "' (expected logistic|probit)");
}

const char* model_name(Model m) {
    return m == Model::Logistic ? "logistic" : "probit";
}

double EffectiveLink::rho(double t) const {
    if (model_ == Model::Logistic) return softplus(t);
    if (t > 8.0) {
        // -log Phi(-t) = t^2/2 + log(2 pi)/2 + log t - log(t R(t))
        return 0.5 * t * t + kHalfLog2Pi - std::log(mills_ratio_cf(t));
    }
    if (t < -8.0) {
        // Phi(-t) -> 1; -log(1 - Phi(t)) with Phi(t) tiny.
        return -std::log1p(-normal_cdf(t));
    }
    return -std::log(normal_cdf(-t));
}

double EffectiveLink::rho1(double t) const {
    if (model_ == Model::Logistic) return sigmoid(t);
    return inverse_mills(t);
}

double EffectiveLink::rho2(double t) const {
    if (model_ == Model::Logistic) {
        // e/(1+e)^2 with e = exp(-|t|) is cancellation-free in both tails
        const double e = std::exp(-std::fabs(t));
        const double d = 1.0 + e;
        return e / (d * d);
    }
    if (t >= 50.0) {
        const double m = mills_excess_series(t);
        return (t + m) * m;
    }
    const double r = inverse_mills(t);
    return r * (r - t);
}

double EffectiveLink::rho3(double t) const {
    if (model_ == Model::Logistic) {
        const double e = std::exp(-std::fabs(t));
        const double d = 1.0 + e;
        const double r2 = e / (d * d);
        const double one_minus_2s = (t >= 0.0 ? e - 1.0 : 1.0 - e) / d;
        return r2 * one_minus_2s;
    }
    if (t >= 50.0) {
        // rho3 = t^2 (m - 1/t) + 3 t m^2 + 2 m^3 - m, with m - 1/t summed
        // directly so the leading 1/t parts cancel exactly
        const double m = mills_excess_series(t);
        const double s = 1.0 / (t * t);
        const double m1 = s * (-2.0 + s * (10.0 + s * (-74.0 + s * 706.0))) / t;
        return t * t * m1 + 3.0 * t * m * m + 2.0 * m * m * m - m;
    }
    const double r = inverse_mills(t);
    const double r2 = r * (r - t);
    return r2 * (2.0 * r - t) - r;
}

double EffectiveLink::mu(double t) const {
    if (model_ == Model::Logistic) return sigmoid(t);
    return normal_cdf(t);
}

}  // namespace hdlr
