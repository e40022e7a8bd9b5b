// Command-line front end: solve | curve | simulate | adjust | separability | amp.
//
// Exit codes: 0 success, 1 usage, 2 domain (kappa range), 3 I/O or parse,
// 4 numerical non-convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hdlr/amp.hpp"
#include "hdlr/csv.hpp"
#include "hdlr/dist.hpp"
#include "hdlr/errors.hpp"
#include "hdlr/glm.hpp"
#include "hdlr/jsonio.hpp"
#include "hdlr/links.hpp"
#include "hdlr/scaling.hpp"
#include "hdlr/simulate.hpp"

namespace {

using hdlr::json_number;

nlohmann::json solution_json(const hdlr::ScalingSolution& s) {
    nlohmann::json j;
    j["kappa"] = json_number(s.kappa);
    j["tau_star"] = json_number(s.tau_star);
    j["b_star"] = json_number(s.b_star);
    j["alpha"] = json_number(s.alpha);
    return j;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw hdlr::IoError("cannot open output file: " + path);
    return os;
}

hdlr::DesignKind parse_design(const std::string& name) {
    if (name == "gaussian") return hdlr::DesignKind::GaussianIID;
    if (name == "bernoulli") return hdlr::DesignKind::BernoulliPM1;
    throw CLI::ValidationError("--design", "expected gaussian|bernoulli");
}

int parse_coords(const std::string& spec) {
    if (spec == "all") return -1;
    const int k = std::stoi(spec);
    if (k < 1) throw CLI::ValidationError("--coords", "expected 'all' or a positive count");
    return k;
}

struct Cli {
    std::string model = "logistic";
    double kappa = 0.3;
    double kappa_min = 0.05, kappa_max = 0.45;
    int points = 9;
    int n = 200, p = 60, trials = 400, iters = 25;
    std::uint64_t seed = 1;
    std::string design = "gaussian";
    std::string coords = "all";
    std::string input, out;
    int threads = 0;
};

int cmd_solve(const Cli& c) {
    hdlr::ScalingSolver solver{hdlr::EffectiveLink(hdlr::parse_model(c.model))};
    solver.check_kappa(c.kappa);
    std::cout << solution_json(solver.solve_system(c.kappa)).dump(2) << '\n';
    return 0;
}

int cmd_curve(const Cli& c) {
    hdlr::ScalingSolver solver{hdlr::EffectiveLink(hdlr::parse_model(c.model))};
    if (c.points < 1) throw CLI::ValidationError("--points", "must be >= 1");
    std::vector<double> grid;
    for (int i = 0; i < c.points; ++i) {
        grid.push_back(c.points == 1 ? c.kappa_min
                                     : c.kappa_min + i * (c.kappa_max - c.kappa_min) /
                                                         (c.points - 1));
    }
    for (double k : grid) solver.check_kappa(k);
    const auto points = solver.alpha_curve(grid, c.threads);
    for (const auto& pt : points) {
        if (!pt.ok) throw hdlr::NumericError("curve failed at kappa=" + std::to_string(pt.kappa) +
                                             ": " + pt.error);
    }
    if (!c.out.empty()) {
        auto os = open_output(c.out);
        hdlr::write_curve_csv(os, points);
    }
    if (points.size() == 1) {
        hdlr::ScalingSolution s;
        s.kappa = points[0].kappa;
        s.tau_star = points[0].tau_star;
        s.b_star = points[0].b_star;
        s.alpha = points[0].alpha;
        std::cout << solution_json(s).dump(2) << '\n';
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& pt : points) {
            arr.push_back({{"kappa", json_number(pt.kappa)},
                           {"tau_star", json_number(pt.tau_star)},
                           {"b_star", json_number(pt.b_star)},
                           {"alpha", json_number(pt.alpha)}});
        }
        std::cout << arr.dump(2) << '\n';
    }
    return 0;
}

int cmd_simulate(const Cli& c) {
    hdlr::SimConfig cfg;
    cfg.n = c.n;
    cfg.p = c.p;
    cfg.trials = c.trials;
    cfg.design = parse_design(c.design);
    cfg.model = hdlr::parse_model(c.model);
    cfg.coords_first_k = parse_coords(c.coords);
    cfg.master_seed = c.seed;
    cfg.n_threads = c.threads;
    cfg.validate();

    const double kappa = static_cast<double>(cfg.p) / cfg.n;
    hdlr::ScalingSolver solver{hdlr::EffectiveLink(cfg.model)};
    solver.check_kappa(kappa);
    const auto scaling = solver.solve_system(kappa);
    const auto report = hdlr::run_simulation(cfg, scaling);

    if (!c.out.empty()) {
        auto js = open_output(c.out + ".json");
        hdlr::write_report_json(js, cfg, report);
        auto cs = open_output(c.out + "_pvalues.csv");
        hdlr::write_pooled_csv(cs, report);
    } else {
        hdlr::write_report_json(std::cout, cfg, report);
    }
    return 0;
}

int cmd_adjust(const Cli& c, bool have_kappa, bool have_np) {
    double kappa = c.kappa;
    if (!have_kappa) {
        if (!have_np) throw CLI::ValidationError("--kappa", "need --kappa or both --n and --p");
        kappa = static_cast<double>(c.p) / c.n;
    }
    hdlr::ScalingSolver solver{hdlr::EffectiveLink(hdlr::parse_model(c.model))};
    solver.check_kappa(kappa);
    const auto scaling = solver.solve_system(kappa);
    const double factor = scaling.b_star / (scaling.tau_star * scaling.tau_star);

    std::ifstream in(c.input);
    if (!in) throw hdlr::IoError("cannot open input file: " + c.input);
    hdlr::CsvTable table = hdlr::read_csv(in);
    const int lambda_col = table.column("lambda");
    if (lambda_col < 0) throw hdlr::IoError("csv: line 1: missing required column 'lambda'");
    int adj_col = table.column("p_adjusted");
    if (adj_col < 0) {
        table.header.push_back("p_adjusted");
        adj_col = static_cast<int>(table.header.size()) - 1;
        for (auto& row : table.rows) row.emplace_back();
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        char* end = nullptr;
        const std::string& cell = table.rows[r][lambda_col];
        const double lambda = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') {
            throw hdlr::IoError("csv: line " + std::to_string(r + 2) +
                                ": cannot parse lambda value '" + cell + "'");
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", hdlr::chisq_sf(1, 2.0 * lambda * factor));
        table.rows[r][adj_col] = buf;
    }

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!c.out.empty()) {
        file = open_output(c.out);
        os = &file;
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        *os << table.header[i] << (i + 1 < table.header.size() ? ',' : '\n');
    }
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            *os << row[i] << (i + 1 < row.size() ? ',' : '\n');
        }
    }
    return 0;
}

int cmd_separability(const Cli& c) {
    if (c.p >= c.n * 2) throw CLI::ValidationError("--p", "requires p < 2n");
    hdlr::SimConfig cfg;
    cfg.n = c.n;
    cfg.p = c.p;
    cfg.trials = c.trials;
    cfg.master_seed = c.seed;
    // design draws only; no fitting here, so p >= n is fine for the checker
    int separable = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : separable) \
    num_threads(c.threads > 0 ? c.threads : omp_get_max_threads())
#endif
    for (int t = 0; t < cfg.trials; ++t) {
        const hdlr::Dataset ds = hdlr::make_design(cfg, t);
        if (hdlr::check_separable(ds)) ++separable;
    }
    nlohmann::json j;
    j["separable_fraction"] = json_number(static_cast<double>(separable) / cfg.trials);
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["trials"] = cfg.trials;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_amp(const Cli& c) {
    const hdlr::Model model = hdlr::parse_model(c.model);
    const double kappa = static_cast<double>(c.p) / c.n;
    hdlr::ScalingSolver solver{hdlr::EffectiveLink(model)};
    solver.check_kappa(kappa);
    const auto scaling = solver.solve_system(kappa);

    hdlr::SimConfig cfg;
    cfg.n = c.n;
    cfg.p = c.p;
    cfg.trials = 1;
    cfg.master_seed = c.seed;
    const hdlr::Dataset ds = hdlr::make_design(cfg, 0);
    const auto trace =
        hdlr::amp_run(ds.X, hdlr::EffectiveLink(model), scaling, c.iters, c.seed);

    if (!c.out.empty()) {
        auto os = open_output(c.out);
        hdlr::write_amp_csv(os, trace);
    } else {
        hdlr::write_amp_csv(std::cout, trace);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Likelihood-ratio test calibration for high-dimensional binary regression"};
    app.require_subcommand(1);
    Cli c;

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", c.model, "logistic|probit")->capture_default_str();
    };
    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", c.threads, "worker count (0 = all cores)")
            ->capture_default_str();
    };

    CLI::App* solve = app.add_subcommand("solve", "solve the (tau, b) system at one kappa");
    add_model(solve);
    solve->add_option("--kappa", c.kappa, "aspect ratio p/n")->required();

    CLI::App* curve = app.add_subcommand("curve", "rescaling factor over a kappa grid");
    add_model(curve);
    add_threads(curve);
    curve->add_option("--kappa-min", c.kappa_min)->capture_default_str();
    curve->add_option("--kappa-max", c.kappa_max)->capture_default_str();
    curve->add_option("--points", c.points)->capture_default_str();
    curve->add_option("--out", c.out, "CSV output path");

    CLI::App* sim = app.add_subcommand("simulate", "null Monte Carlo of pooled p-values");
    add_model(sim);
    add_threads(sim);
    sim->add_option("--n", c.n)->required();
    sim->add_option("--p", c.p)->required();
    sim->add_option("--trials", c.trials)->required()->check(CLI::PositiveNumber);
    sim->add_option("--design", c.design, "gaussian|bernoulli")->capture_default_str();
    sim->add_option("--coords", c.coords, "'all' or first-k count")->capture_default_str();
    sim->add_option("--seed", c.seed)->capture_default_str();
    sim->add_option("--out", c.out, "output prefix (.json, _pvalues.csv)");

    CLI::App* adj = app.add_subcommand("adjust", "append rescaled p-values to an LLR CSV");
    add_model(adj);
    adj->add_option("--input", c.input, "CSV with a 'lambda' column")->required();
    CLI::Option* adj_kappa = adj->add_option("--kappa", c.kappa);
    CLI::Option* adj_n = adj->add_option("--n", c.n);
    CLI::Option* adj_p = adj->add_option("--p", c.p);
    adj->add_option("--out", c.out, "output path (default: stdout)");

    CLI::App* sep = app.add_subcommand("separability", "fraction of separable null designs");
    sep->add_option("--n", c.n)->required();
    sep->add_option("--p", c.p)->required();
    sep->add_option("--trials", c.trials)->required()->check(CLI::PositiveNumber);
    sep->add_option("--seed", c.seed)->capture_default_str();
    add_threads(sep);

    CLI::App* amp = app.add_subcommand("amp", "message-passing norm trajectory");
    add_model(amp);
    amp->add_option("--n", c.n)->required();
    amp->add_option("--p", c.p)->required();
    amp->add_option("--iters", c.iters)->capture_default_str();
    amp->add_option("--seed", c.seed)->capture_default_str();
    amp->add_option("--out", c.out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(c);
        if (curve->parsed()) return cmd_curve(c);
        if (sim->parsed()) return cmd_simulate(c);
        if (adj->parsed()) return cmd_adjust(c, adj_kappa->count() > 0,
                                             adj_n->count() > 0 && adj_p->count() > 0);
        if (sep->parsed()) return cmd_separability(c);
        if (amp->parsed()) return cmd_amp(c);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const hdlr::KappaOutOfRangeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hdlr::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const hdlr::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
