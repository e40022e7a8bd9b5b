#include "hdlr/glm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hdlr/dist.hpp"
#include "hdlr/errors.hpp"

namespace hdlr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void Dataset::validate() const {
    if (X.rows() != y_signed.size()) {
        throw std::invalid_argument("Dataset: X rows and y_signed length differ");
    }
    if (!X.allFinite() || !y_signed.allFinite()) {
        throw std::invalid_argument("Dataset: non-finite entries");
    }
}

namespace {

// rho arguments for the current iterate: eta_i = -ytilde_i * x_i' beta
VectorXd link_args(const Dataset& d, const VectorXd& xbeta) {
    return -(d.y_signed.array() * xbeta.array()).matrix();
}

double nll_from_args(const EffectiveLink& link, const VectorXd& eta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) acc += link.rho(eta[i]);
    return acc;
}

// grad = -X' (ytilde .* rho'(eta))
VectorXd gradient(const Dataset& d, const EffectiveLink& link, const VectorXd& eta) {
    VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = link.rho1(eta[i]);
    return -(d.X.transpose() * (d.y_signed.array() * r.array()).matrix());
}

VectorXd hessian_weights(const EffectiveLink& link, const VectorXd& eta) {
    VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) w[i] = link.rho2(eta[i]);
    return w;
}

MatrixXd weighted_gram(const MatrixXd& X, const VectorXd& w) {
    const MatrixXd scaled = w.cwiseSqrt().asDiagonal() * X;
    MatrixXd H = MatrixXd::Zero(X.cols(), X.cols());
    H.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
    return H;
}

// Armijo backtracking along d; xb and xd are X*beta and X*d so each trial
// point costs O(n). Returns the accepted step (0 on failure).
double line_search(const Dataset& d, const EffectiveLink& link, const VectorXd& xb,
                   const VectorXd& xd, double ell0, double slope, double* ell_out) {
    double s = 1.0;
    for (int h = 0; h < 60; ++h) {
        const VectorXd eta = link_args(d, xb + s * xd);
        const double ell = nll_from_args(link, eta);
        if (ell <= ell0 + 1e-4 * s * slope) {
            *ell_out = ell;
            return s;
        }
        s *= 0.5;
    }
    return 0.0;
}

// LINPACK-style rank-one Cholesky update: L L' + x x' = Lnew Lnew'.
void chol_update(MatrixXd& L, VectorXd x) {
    const Eigen::Index m = L.rows();
    for (Eigen::Index k = 0; k < m; ++k) {
        const double lkk = L(k, k);
        const double r = std::hypot(lkk, x[k]);
        const double c = r / lkk;
        const double s = x[k] / lkk;
        L(k, k) = r;
        for (Eigen::Index i = k + 1; i < m; ++i) {
            L(i, k) = (L(i, k) + s * x[i]) / c;
            x[i] = c * x[i] - s * L(i, k);
        }
    }
}

// Factor of H with row/column j removed, given the factor L of H: the
// leading blocks carry over and the trailing block is a rank-one update of
// L33 with the below-diagonal part of column j.
MatrixXd chol_delete(const MatrixXd& L, int j) {
    const Eigen::Index p = L.rows();
    const Eigen::Index m = p - 1;
    const Eigen::Index tail = p - 1 - j;
    MatrixXd out = MatrixXd::Zero(m, m);
    out.topLeftCorner(j, j) = L.topLeftCorner(j, j);
    if (tail > 0) {
        out.bottomLeftCorner(tail, j) = L.bottomLeftCorner(tail, j);
        MatrixXd L33 = L.bottomRightCorner(tail, tail);
        chol_update(L33, L.col(j).tail(tail));
        out.bottomRightCorner(tail, tail) = L33;
    }
    return out;
}

VectorXd drop_entry(const VectorXd& v, int j) {
    VectorXd out(v.size() - 1);
    out.head(j) = v.head(j);
    out.tail(v.size() - 1 - j) = v.tail(v.size() - 1 - j);
    return out;
}

VectorXd embed_entry(const VectorXd& v, int j) {
    VectorXd out(v.size() + 1);
    out.head(j) = v.head(j);
    out[j] = 0.0;
    out.tail(v.size() - j) = v.tail(v.size() - j);
    return out;
}

MatrixXd drop_row_col(const MatrixXd& H, int j) {
    const Eigen::Index p = H.rows();
    MatrixXd out(p - 1, p - 1);
    out.topLeftCorner(j, j) = H.topLeftCorner(j, j);
    out.topRightCorner(j, p - 1 - j) = H.topRightCorner(j, p - 1 - j);
    out.bottomLeftCorner(p - 1 - j, j) = H.bottomLeftCorner(p - 1 - j, j);
    out.bottomRightCorner(p - 1 - j, p - 1 - j) = H.bottomRightCorner(p - 1 - j, p - 1 - j);
    return out;
}

}  // namespace

double negative_log_likelihood(const Dataset& data, const EffectiveLink& link,
                               const VectorXd& beta) {
    return nll_from_args(link, link_args(data, data.X * beta));
}

FitResult fit_mle(const Dataset& data, const EffectiveLink& link, FitOptions opts) {
    data.validate();
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (n <= p) throw std::invalid_argument("fit_mle: requires n > p");

    FitResult res;
    res.beta = VectorXd::Zero(p);
    const double tol = opts.grad_tol_per_n * static_cast<double>(n);
    bool separability_checked = false;

    VectorXd xb = VectorXd::Zero(n);
    VectorXd eta = link_args(data, xb);
    double ell = nll_from_args(link, eta);

    for (int it = 0; it < opts.max_iters; ++it) {
        const VectorXd g = gradient(data, link, eta);
        res.grad_norm = g.lpNorm<Eigen::Infinity>();
        res.newton_iters = it;
        if (res.grad_norm < tol) {
            // a gradient this small with a near-zero likelihood means the
            // loss is flat along a separating ray, not that a finite MLE
            // was found
            if (ell < 1e-3 * static_cast<double>(n) && !opts.skip_separability_check &&
                check_separable(data)) {
                res.separable = true;
                res.converged = false;
                res.negloglik = ell;
                res.diagnostic = "likelihood vanishes along a separating direction";
                return res;
            }
            res.converged = true;
            res.negloglik = ell;
            return res;
        }
        if (!separability_checked && !opts.skip_separability_check &&
            res.beta.norm() > opts.divergence_norm) {
            separability_checked = true;
            if (check_separable(data)) {
                res.separable = true;
                res.converged = false;
                res.negloglik = ell;
                res.diagnostic = "divergence guard: data are perfectly separable";
                return res;
            }
        }
        const MatrixXd H = weighted_gram(data.X, hessian_weights(link, eta));
        Eigen::LLT<MatrixXd> llt(H);
        if (llt.info() != Eigen::Success) {
            res.converged = false;
            res.negloglik = ell;
            res.diagnostic = "singular_hessian";
            return res;
        }
        const VectorXd d = llt.solve(-g);
        const VectorXd xd = data.X * d;
        double ell_new = ell;
        const double s = line_search(data, link, xb, xd, ell, g.dot(d), &ell_new);
        if (s == 0.0) {
            res.converged = false;
            res.negloglik = ell;
            res.diagnostic = "line_search_failed";
            return res;
        }
        res.beta += s * d;
        xb += s * xd;
        eta = link_args(data, xb);
        ell = ell_new;
    }
    res.converged = false;
    res.negloglik = ell;
    res.diagnostic = "max_iterations";
    return res;
}

FitResult fit_mle_reduced(const Dataset& data, const EffectiveLink& link, int fixed_coord,
                          const VectorXd& warm, FitOptions opts,
                          const MatrixXd* full_hessian_factor) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (fixed_coord < 0 || fixed_coord >= p) {
        throw std::invalid_argument("fit_mle_reduced: coordinate out of range");
    }

    FitResult res;
    res.beta = warm;
    res.beta[fixed_coord] = 0.0;
    const double tol = opts.grad_tol_per_n * static_cast<double>(n);

    MatrixXd L_chord;
    bool have_chord = false;
    if (full_hessian_factor != nullptr && p > 1) {
        L_chord = chol_delete(*full_hessian_factor, fixed_coord);
        have_chord = true;
    }
    Eigen::LLT<MatrixXd> llt_exact;
    bool exact_mode = !have_chord;
    bool exact_current = false;

    VectorXd xb = data.X * res.beta;
    VectorXd eta = link_args(data, xb);
    double ell = nll_from_args(link, eta);
    double prev_gn = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int it = 0; it < opts.max_iters; ++it) {
        const VectorXd g_full = gradient(data, link, eta);
        const VectorXd g = drop_entry(g_full, fixed_coord);
        const double gn = g.lpNorm<Eigen::Infinity>();
        res.grad_norm = gn;
        res.newton_iters = it;
        if (gn < tol) {
            res.converged = true;
            res.negloglik = ell;
            return res;
        }
        // chord iterations reuse the warm-start factor; switch to exact
        // Newton if the gradient stops contracting
        if (!exact_mode && gn > 0.5 * prev_gn) {
            if (++stall >= 2) exact_mode = true;
        }
        prev_gn = gn;

        VectorXd d_red;
        if (exact_mode) {
            const MatrixXd H =
                drop_row_col(weighted_gram(data.X, hessian_weights(link, eta)), fixed_coord);
            llt_exact.compute(H);
            if (llt_exact.info() != Eigen::Success) {
                res.converged = false;
                res.negloglik = ell;
                res.diagnostic = "singular_hessian";
                return res;
            }
            exact_current = true;
            d_red = llt_exact.solve(-g);
        } else {
            d_red = g;
            L_chord.triangularView<Eigen::Lower>().solveInPlace(d_red);
            L_chord.transpose().triangularView<Eigen::Upper>().solveInPlace(d_red);
            d_red = -d_red;
            exact_current = false;
        }
        const VectorXd d = embed_entry(d_red, fixed_coord);
        const VectorXd xd = data.X * d;
        double ell_new = ell;
        const double s = line_search(data, link, xb, xd, ell, g.dot(d_red), &ell_new);
        if (s == 0.0) {
            if (!exact_current) {
                exact_mode = true;  // chord direction failed; retry with exact Hessian
                continue;
            }
            res.converged = false;
            res.negloglik = ell;
            res.diagnostic = "line_search_failed";
            return res;
        }
        res.beta += s * d;
        xb += s * xd;
        eta = link_args(data, xb);
        ell = ell_new;
    }
    res.converged = false;
    res.negloglik = ell;
    res.diagnostic = "max_iterations";
    return res;
}

bool check_separable(const Dataset& data) {
    data.validate();
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const MatrixXd Z = data.y_signed.asDiagonal() * data.X;

    const double scale = Z.rowwise().norm().mean();
    if (!(scale > 0.0)) return false;

    auto certified = [&](const VectorXd& beta) {
        const double binf = beta.lpNorm<Eigen::Infinity>();
        if (!(binf > 0.0)) return false;
        const double t = (Z * (beta / binf)).minCoeff();
        return t > 1e-7;
    };

    VectorXd beta = Z.colwise().sum().transpose();
    if (beta.norm() == 0.0) beta = VectorXd::Unit(p, 0);
    beta.normalize();
    if (certified(beta)) return true;

    // smoothed max-margin ascent: maximize softmin_gamma(Z beta) over the
    // unit sphere with a hardening smoothing schedule, certify exactly
    VectorXd m = Z * beta;
    for (double gamma_rel : {4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0}) {
        const double gamma = gamma_rel / scale;
        auto softmin = [&](const VectorXd& margins) {
            const double mn = margins.minCoeff();
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) acc += std::exp(-gamma * (margins[i] - mn));
            return mn - std::log(acc) / gamma;
        };
        double f = softmin(m);
        double step = 1.0;
        for (int it = 0; it < 120; ++it) {
            const double mn = m.minCoeff();
            VectorXd w(n);
            double wsum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                w[i] = std::exp(-gamma * (m[i] - mn));
                wsum += w[i];
            }
            w /= wsum;
            VectorXd grad = Z.transpose() * w;
            grad -= beta.dot(grad) * beta;  // tangent component
            const double gnorm = grad.norm();
            if (gnorm < 1e-14 * scale) break;
            bool accepted = false;
            for (int h = 0; h < 25; ++h) {
                VectorXd cand = (beta + step * grad / gnorm).normalized();
                const VectorXd mc = Z * cand;
                const double fc = softmin(mc);
                if (fc > f) {
                    beta = cand;
                    m = mc;
                    f = fc;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        }
        if (certified(beta)) return true;
    }
    return false;
}

LeverageCache make_leverage_cache(const Dataset& data) {
    const Eigen::Index p = data.p();
    MatrixXd gram = MatrixXd::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(data.X.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    LeverageCache cache;
    cache.gram_llt.compute(gram);
    if (cache.gram_llt.info() != Eigen::Success) {
        throw SingularMatrixError("leverages: singular Gram matrix X'X");
    }
    // h_i = || L^{-1} x_i ||^2
    MatrixXd solved = data.X.transpose();
    cache.gram_llt.matrixL().solveInPlace(solved);
    cache.h = solved.colwise().squaredNorm();
    cache.trace_h_sq = cache.h.squaredNorm();
    // guard against a numerically semi-definite Gram that LLT accepted
    if (!cache.h.allFinite()) throw SingularMatrixError("leverages: singular Gram matrix X'X");
    return cache;
}

double bartlett_alpha(const Dataset& data, int j, const LeverageCache& cache) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (j < 0 || j >= p) throw std::invalid_argument("bartlett_alpha: bad coordinate");

    // removing column j downdates the leverages by v_i^2 / s_jj with
    // v = X (X'X)^{-1} e_j and s_jj = (X'X)^{-1}_jj
    VectorXd w = VectorXd::Unit(p, j);
    cache.gram_llt.matrixL().solveInPlace(w);
    const double s_jj = w.squaredNorm();
    if (!(s_jj > 0.0) || !std::isfinite(s_jj)) {
        throw SingularMatrixError("bartlett_alpha: singular Gram matrix");
    }
    cache.gram_llt.matrixU().solveInPlace(w);
    const VectorXd v = data.X * w;

    double tr_reduced = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = cache.h[i] - v[i] * v[i] / s_jj;
        tr_reduced += hi * hi;
    }
    return 0.5 * static_cast<double>(n) * (cache.trace_h_sq - tr_reduced);
}

double bartlett_alpha(const Dataset& data, int j) {
    return bartlett_alpha(data, j, make_leverage_cache(data));
}

double empirical_alpha_tilde(const Dataset& data, const EffectiveLink& link, int dropped,
                             const FitResult& reduced_fit) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (p < 2) throw std::invalid_argument("empirical_alpha_tilde: reduced model is empty");
    if (dropped < 0 || dropped >= p) {
        throw std::invalid_argument("empirical_alpha_tilde: bad coordinate");
    }
    if (!reduced_fit.converged) {
        throw std::invalid_argument("empirical_alpha_tilde: reduced fit not converged");
    }
    const VectorXd eta = link_args(data, data.X * reduced_fit.beta);
    const MatrixXd G =
        drop_row_col(weighted_gram(data.X, hessian_weights(link, eta)), dropped) /
        static_cast<double>(n);
    Eigen::LLT<MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
        throw SingularMatrixError("empirical_alpha_tilde: singular weighted Gram matrix");
    }
    // Tr(G^{-1}) = ||L^{-1}||_F^2
    MatrixXd Linv = MatrixXd::Identity(p - 1, p - 1);
    llt.matrixL().solveInPlace(Linv);
    return Linv.squaredNorm() / static_cast<double>(n);
}

std::vector<LlrRecord> llr_all(const Dataset& data, const EffectiveLink& link,
                               const FitResult& fit, const std::vector<int>& coords,
                               const ScalingSolution& scaling, int n_threads) {
    data.validate();
    if (!fit.converged) throw std::invalid_argument("llr_all: full fit has not converged");
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const double n_d = static_cast<double>(n);
    const double adjust = scaling.b_star / (scaling.tau_star * scaling.tau_star);

    const LeverageCache cache = make_leverage_cache(data);

    // warm-start factor: full-model Hessian at the MLE, downdated per coordinate
    MatrixXd L_full;
    if (p > 1) {
        const VectorXd eta = link_args(data, data.X * fit.beta);
        const MatrixXd H = weighted_gram(data.X, hessian_weights(link, eta));
        Eigen::LLT<MatrixXd> llt(H);
        if (llt.info() != Eigen::Success) {
            throw SingularMatrixError("llr_all: singular Hessian at the full MLE");
        }
        L_full = llt.matrixL();
    }

    std::vector<LlrRecord> out(coords.size());
    auto run_one = [&](std::size_t idx) {
        LlrRecord rec;
        const int j = coords[idx];
        rec.j = j;
        try {
            if (j < 0 || j >= p) throw std::invalid_argument("coordinate out of range");
            double ell_reduced;
            if (p == 1) {
                ell_reduced = n_d * link.rho(0.0);  // empty reduced model
            } else {
                const FitResult red =
                    fit_mle_reduced(data, link, j, fit.beta, FitOptions{}, &L_full);
                if (!red.converged) {
                    throw NonConvergenceError("reduced fit: " + red.diagnostic);
                }
                ell_reduced = red.negloglik;
            }
            double lambda = ell_reduced - fit.negloglik;
            if (lambda < 0.0) {
                if (lambda < -1e-8 * n_d) {
                    throw NumericError("negative LLR beyond tolerance: reduced fit failed");
                }
                lambda = 0.0;
            }
            rec.lambda = lambda;
            rec.p_classical = chisq_sf(1, 2.0 * lambda);
            rec.p_adjusted = chisq_sf(1, 2.0 * lambda * adjust);
            rec.bartlett_alpha_n = bartlett_alpha(data, j, cache);
            rec.p_bartlett = chisq_sf(1, 2.0 * lambda / (1.0 + rec.bartlett_alpha_n / n_d));
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        out[idx] = rec;
    };

    if (n_threads == 1) {
        for (std::size_t i = 0; i < coords.size(); ++i) run_one(i);
        return out;
    }
#ifdef _OPENMP
    const std::int64_t count = static_cast<std::int64_t>(coords.size());
#pragma omp parallel for schedule(dynamic) num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
    for (std::int64_t i = 0; i < count; ++i) run_one(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < coords.size(); ++i) run_one(i);
#endif
    return out;
}

void write_llr_csv(std::ostream& os, const std::vector<LlrRecord>& records) {
    os << "j,lambda,p_classical,p_bartlett,p_adjusted\n";
    char buf[200];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", r.j, r.lambda,
                      r.p_classical, r.p_bartlett, r.p_adjusted);
        os << buf;
    }
}

}  // namespace hdlr
