#pragma once

namespace hdlr {

// Self-contained probability primitives used across the pipeline.
// No external statistics dependency.

double normal_pdf(double x);

// Phi(x), |error| < 1e-14, via erfc.
double normal_cdf(double x);

// Phi^{-1}(u) for u in (0,1): rational initial guess refined by Newton so
// that |Phi(q) - u| < 1e-12. Throws std::domain_error outside (0,1).
double normal_quantile(double u);

// Upper tail P(chi^2_df > x) = Q(df/2, x/2), absolute error < 1e-10.
// Series branch for x < df + 1, continued fraction otherwise.
double chisq_sf(int df, double x);

double chisq_cdf(int df, double x);

// Regularized incomplete gamma Q(a, x) (upper).
double gamma_q(double a, double x);

}  // namespace hdlr
