#include "hdlr/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "hdlr/dist.hpp"
#include "hdlr/jsonio.hpp"
#include "hdlr/rng.hpp"

namespace hdlr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SimConfig::validate() const {
    if (n <= 0 || p <= 0 || p >= n) throw std::invalid_argument("SimConfig: requires 0 < p < n");
    if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
    if (coords_first_k == 0 || coords_first_k < -1 || coords_first_k > p) {
        throw std::invalid_argument("SimConfig: coords must be 'all' or 1..p");
    }
    if (design == DesignKind::GaussianWithCovariance) {
        if (!sigma_sqrt || sigma_sqrt->rows() != p || sigma_sqrt->cols() != p) {
            throw std::invalid_argument("SimConfig: covariance factor must be p x p");
        }
    }
}

Eigen::MatrixXd covariance_sqrt(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) throw std::invalid_argument("covariance must be square");
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("covariance is not positive definite");
    }
    return llt.matrixL();
}

Dataset make_design(const SimConfig& cfg, int trial_index) {
    Rng rng(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
    Dataset ds;
    ds.X.resize(cfg.n, cfg.p);
    switch (cfg.design) {
        case DesignKind::GaussianIID:
        case DesignKind::GaussianWithCovariance:
            for (int i = 0; i < cfg.n; ++i)
                for (int j = 0; j < cfg.p; ++j) ds.X(i, j) = rng.next_normal();
            if (cfg.design == DesignKind::GaussianWithCovariance) {
                ds.X = ds.X * cfg.sigma_sqrt->transpose();
            }
            break;
        case DesignKind::BernoulliPM1:
            for (int i = 0; i < cfg.n; ++i)
                for (int j = 0; j < cfg.p; ++j) ds.X(i, j) = rng.next_sign();
            break;
    }
    ds.y_signed.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) ds.y_signed[i] = rng.next_sign();
    return ds;
}

namespace {

struct TrialOutcome {
    bool separable = false;
    bool failed = false;
    std::vector<LlrRecord> records;
    std::vector<double> sqrt_p_beta;
};

TrialOutcome run_trial(const SimConfig& cfg, const ScalingSolution& scaling,
                       const EffectiveLink& link, int trial) {
    TrialOutcome out;
    const Dataset ds = make_design(cfg, trial);
    if (check_separable(ds)) {
        out.separable = true;
        return out;
    }
    FitOptions fopts;
    fopts.skip_separability_check = true;  // already decided above
    const FitResult fit = fit_mle(ds, link, fopts);
    if (!fit.converged) {
        out.failed = true;
        return out;
    }
    const int k = cfg.coords_first_k < 0 ? cfg.p : cfg.coords_first_k;
    std::vector<int> coords(k);
    for (int j = 0; j < k; ++j) coords[j] = j;
    out.records = llr_all(ds, link, fit, coords, scaling, /*n_threads=*/1);
    const double sqrt_p = std::sqrt(static_cast<double>(cfg.p));
    out.sqrt_p_beta.resize(cfg.p);
    for (int j = 0; j < cfg.p; ++j) out.sqrt_p_beta[j] = sqrt_p * fit.beta[j];
    return out;
}

// Serial reference kernel; the OpenMP kernel below must produce the same
// outcome slots bit for bit.
void run_trials_serial(const SimConfig& cfg, const ScalingSolution& scaling,
                       const EffectiveLink& link, std::vector<TrialOutcome>& slots) {
    for (int t = 0; t < cfg.trials; ++t) slots[t] = run_trial(cfg, scaling, link, t);
}

void run_trials_parallel(const SimConfig& cfg, const ScalingSolution& scaling,
                         const EffectiveLink& link, std::vector<TrialOutcome>& slots,
                         int n_threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(n_threads > 0 ? n_threads : omp_get_max_threads())
    for (int t = 0; t < cfg.trials; ++t) slots[t] = run_trial(cfg, scaling, link, t);
#else
    (void)n_threads;
    run_trials_serial(cfg, scaling, link, slots);
#endif
}

std::vector<TailEntry> tail_table_for(const std::vector<double>& pool) {
    std::vector<TailEntry> out;
    const double N = static_cast<double>(pool.size());
    for (double thr : tail_thresholds()) {
        TailEntry e;
        e.threshold = thr;
        if (N > 0) {
            std::size_t cnt = 0;
            for (double p : pool) {
                if (p <= thr) ++cnt;
            }
            e.fraction = static_cast<double>(cnt) / N;
            e.se = std::sqrt(e.fraction * (1.0 - e.fraction) / N);
        }
        out.push_back(e);
    }
    return out;
}

}  // namespace

const std::vector<double>& tail_thresholds() {
    static const std::vector<double> kThresholds{0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001};
    return kThresholds;
}

SimulationReport run_simulation(const SimConfig& cfg, const ScalingSolution& scaling) {
    cfg.validate();
    const EffectiveLink link(cfg.model);

    std::vector<TrialOutcome> slots(cfg.trials);
    if (cfg.n_threads == 1) {
        run_trials_serial(cfg, scaling, link, slots);
    } else {
        run_trials_parallel(cfg, scaling, link, slots, cfg.n_threads);
    }

    SimulationReport rep;
    for (int t = 0; t < cfg.trials; ++t) {
        const TrialOutcome& o = slots[t];
        if (o.separable) {
            ++rep.separable_trials;
            continue;
        }
        if (o.failed) {
            ++rep.failed_trials;
            continue;
        }
        for (const LlrRecord& r : o.records) {
            if (!r.ok) {
                ++rep.failed_trials;
                continue;
            }
            rep.rows.push_back({t, r.j, r.p_classical, r.p_bartlett, r.p_adjusted});
            rep.p_classical.push_back(r.p_classical);
            rep.p_bartlett.push_back(r.p_bartlett);
            rep.p_adjusted.push_back(r.p_adjusted);
        }
        rep.sqrt_p_beta.insert(rep.sqrt_p_beta.end(), o.sqrt_p_beta.begin(),
                               o.sqrt_p_beta.end());
    }

    rep.tail_table["classical"] = tail_table_for(rep.p_classical);
    rep.tail_table["bartlett"] = tail_table_for(rep.p_bartlett);
    rep.tail_table["adjusted"] = tail_table_for(rep.p_adjusted);
    if (!rep.p_adjusted.empty()) {
        const auto [stat, pval] = gof_uniformity(rep.p_adjusted);
        rep.gof_stat = stat;
        rep.gof_pvalue = pval;
    }
    return rep;
}

std::pair<double, double> gof_uniformity(const std::vector<double>& pvalues) {
    if (pvalues.empty()) throw std::invalid_argument("gof_uniformity: empty input");
    constexpr int kBins = 20;
    std::array<double, kBins> counts{};
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("gof_uniformity: p-values must lie in [0,1]");
        }
        int b = static_cast<int>(p * kBins);
        if (b == kBins) b = kBins - 1;
        counts[b] += 1.0;
    }
    const double expected = static_cast<double>(pvalues.size()) / kBins;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    return {stat, chisq_sf(kBins - 1, stat)};
}

std::vector<std::pair<double, double>> empirical_cdf(const std::vector<double>& pvalues,
                                                     const std::vector<double>& grid) {
    std::vector<double> sorted = pvalues;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    const double N = static_cast<double>(sorted.size());
    for (double t : grid) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        out.emplace_back(t, N > 0 ? static_cast<double>(it - sorted.begin()) / N : 0.0);
    }
    return out;
}

namespace {

const char* design_name(DesignKind d) {
    switch (d) {
        case DesignKind::GaussianIID: return "gaussian";
        case DesignKind::BernoulliPM1: return "bernoulli";
        case DesignKind::GaussianWithCovariance: return "gaussian_cov";
    }
    return "unknown";
}

}  // namespace

void write_report_json(std::ostream& os, const SimConfig& cfg, const SimulationReport& rep) {
    nlohmann::json j;
    j["config"] = {{"n", cfg.n},
                   {"p", cfg.p},
                   {"trials", cfg.trials},
                   {"design", design_name(cfg.design)},
                   {"model", model_name(cfg.model)},
                   {"coords", cfg.coords_first_k < 0 ? nlohmann::json("all")
                                                     : nlohmann::json(cfg.coords_first_k)},
                   {"seed", cfg.master_seed}};
    nlohmann::json tails;
    for (const auto& [method, entries] : rep.tail_table) {
        nlohmann::json m;
        for (const TailEntry& e : entries) {
            char key[24];
            std::snprintf(key, sizeof(key), "%g", e.threshold);
            m[key] = {{"fraction", json_number(e.fraction)}, {"se", json_number(e.se)}};
        }
        tails[method] = m;
    }
    j["tail_table"] = tails;
    j["gof"] = {{"stat", json_number(rep.gof_stat)}, {"pvalue", json_number(rep.gof_pvalue)}};
    j["separable_trials"] = rep.separable_trials;
    j["failed_trials"] = rep.failed_trials;
    os << j.dump(2) << '\n';
}

void write_pooled_csv(std::ostream& os, const SimulationReport& rep) {
    os << "trial,j,p_classical,p_bartlett,p_adjusted\n";
    char buf[160];
    for (const PooledRow& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.10g\n", r.trial, r.j, r.p_classical,
                      r.p_bartlett, r.p_adjusted);
        os << buf;
    }
}

}  // namespace hdlr
