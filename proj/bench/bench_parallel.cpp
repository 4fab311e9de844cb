// Compares the serial reference kernels against their OpenMP counterparts:
// the eta-grid variance profile and panel generation. Verifies that the
// parallel results are bit-identical before timing them.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "profluct/scaling.hpp"
#include "profluct/synth.hpp"

using namespace profluct;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled (serial build)\n");
#endif

    GeneratorSpec spec;
    spec.n_companies = 2000;
    spec.seed = 1;

    auto t0 = Clock::now();
    auto [panel, truth] = generate_panel(spec);
    const double gen_time = seconds_since(t0);
    std::printf("generate_panel  %zu records  %.3f s\n", panel.records.size(),
                gen_time);

    TrendFit trend;
    trend.amplitude = spec.revenue_trend.amplitude;
    trend.efold_years = spec.revenue_trend.efold_years;
    trend.base_year = spec.revenue_trend.base_year;
    const auto scaled = scale_panel(panel, trend);

    EtaGridSpec grid;
    grid.step = 0.005;

    t0 = Clock::now();
    const auto serial = sigma_profile_serial(scaled, spec.gamma_g, grid);
    const double serial_time = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel = sigma_profile(scaled, spec.gamma_g, grid);
    const double parallel_time = seconds_since(t0);

    bool identical = serial.size() == parallel.size();
    for (std::size_t i = 0; identical && i < serial.size(); ++i)
        identical = serial[i].first == parallel[i].first &&
                    serial[i].second == parallel[i].second;

    std::printf("sigma profile   %zu grid points over %zu entries\n", serial.size(),
                scaled.size());
    std::printf("  serial        %.3f s\n", serial_time);
    std::printf("  parallel      %.3f s  (speedup %.2fx)\n", parallel_time,
                parallel_time > 0.0 ? serial_time / parallel_time : 0.0);
    std::printf("  bit-identical %s\n", identical ? "yes" : "NO");

    return identical ? 0 : 1;
}
