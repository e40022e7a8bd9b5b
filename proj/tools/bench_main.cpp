// Timing comparison of the serial reference kernels against the OpenMP
// kernels: per-trial simulation fan-out, per-coordinate LLR refits, and the
// per-kappa curve solves.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hdlr/glm.hpp"
#include "hdlr/scaling.hpp"
#include "hdlr/simulate.hpp"

namespace {

double seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return seconds(t0);
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3fs   openmp %8.3fs   speedup %5.2fx\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n");
#endif

    const hdlr::EffectiveLink link = hdlr::logistic_link();
    hdlr::ScalingSolver solver(link);

    // per-kappa curve fan-out
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(0.05 + 0.04 * i);
    const double curve_serial = timed([&] { solver.alpha_curve(grid, 1); });
    const double curve_parallel = timed([&] { solver.alpha_curve(grid, 0); });
    report("alpha_curve (8 points)", curve_serial, curve_parallel);

    // per-trial simulation fan-out
    const auto scaling = solver.solve_system(0.3);
    hdlr::SimConfig cfg;
    cfg.n = 200;
    cfg.p = 60;
    cfg.trials = 24;
    cfg.master_seed = 11;
    cfg.n_threads = 1;
    const double sim_serial = timed([&] { hdlr::run_simulation(cfg, scaling); });
    cfg.n_threads = 0;
    const double sim_parallel = timed([&] { hdlr::run_simulation(cfg, scaling); });
    report("run_simulation (24 trials)", sim_serial, sim_parallel);

    // per-coordinate LLR fan-out on one larger dataset
    hdlr::SimConfig big = cfg;
    big.n = 1000;
    big.p = 300;
    big.master_seed = 5;
    const hdlr::Dataset ds = hdlr::make_design(big, 0);
    const auto fit = hdlr::fit_mle(ds, link);
    if (!fit.converged) {
        std::printf("llr bench skipped: fit did not converge\n");
        return 0;
    }
    std::vector<int> coords(big.p);
    for (int j = 0; j < big.p; ++j) coords[j] = j;
    const auto big_scaling = solver.solve_system(0.3);
    const double llr_serial =
        timed([&] { hdlr::llr_all(ds, link, fit, coords, big_scaling, 1); });
    const double llr_parallel =
        timed([&] { hdlr::llr_all(ds, link, fit, coords, big_scaling, 0); });
    report("llr_all (300 coords)", llr_serial, llr_parallel);
    return 0;
}
