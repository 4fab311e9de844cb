#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "profluct/panel.hpp"
#include "profluct/trend.hpp"

namespace profluct {

struct ScaledEntry {
    std::string company_id;
    int year = 0;
    double r = 0.0;    // R / R0(year)
    double p = 0.0;    // P / R0(year)
    double dp = 0.0;   // p - gamma_g * r
    double dpi = 0.0;  // dp / r^eta
};

struct ScaledSeries {
    std::vector<ScaledEntry> entries;
    double gamma_g = 0.0;
    double eta = 0.0;
    double mean_abs_dp = 0.0;
    double mean_abs_dpi = 0.0;
    std::size_t excluded_small_r = 0;  // entries below the r floor, kept out of stats
};

/// r floor below which entries are dropped from dpi statistics (r^-eta blowup).
inline constexpr double kDefaultRFloor = 1e-6;

/// Divide each record's revenue and profit by the fitted mean revenue of its
/// year. Only (r, p) are populated; dp/dpi are filled in by fluctuations().
std::vector<ScaledEntry> scale_panel(const Panel& panel, const TrendFit& revenue_trend);

/// Populate dp = p - gamma_g*r and dpi = dp/r^eta, plus the aggregate means.
ScaledSeries fluctuations(std::vector<ScaledEntry> scaled, double gamma_g,
                          double eta, double r_floor = kDefaultRFloor);

struct EtaGridSpec {
    double eta_min = 0.0;
    double eta_max = 1.2;
    double step = 0.01;
    double refine_tol = 1e-3;   // golden-section width on eta
    double tune_tol = 1e-12;    // |mean dpi| target for the gamma root
    double tie_tol = 1e-12;     // relative sigma^2 gap treated as a tie
    int rounds = 1;             // >1 iterates gamma and eta to a joint fixed point
};

struct EtaSearchResult {
    double eta_star = 0.0;
    double sigma_eta_star = 0.0;                  // sigma (not squared) at the minimum
    std::vector<std::pair<double, double>> grid;  // (eta, sigma_eta)
    double gamma_g_tuned = 0.0;
    bool multiple_minima = false;
    int rounds_used = 1;
};

/// Unbiased (n-1) variance of dpi at the given eta, compensated summation.
double sigma2_eta(const std::vector<ScaledEntry>& scaled, double gamma_g,
                  double eta, double r_floor = kDefaultRFloor);

/// (eta, sigma_eta) profile over the grid. The parallel version splits over
/// grid points; each point is accumulated serially so results are identical
/// to the serial reference regardless of thread count.
std::vector<std::pair<double, double>> sigma_profile_serial(
    const std::vector<ScaledEntry>& scaled, double gamma_g,
    const EtaGridSpec& spec, double r_floor = kDefaultRFloor);
std::vector<std::pair<double, double>> sigma_profile(
    const std::vector<ScaledEntry>& scaled, double gamma_g,
    const EtaGridSpec& spec, double r_floor = kDefaultRFloor);

/// Grid argmin of sigma^2(eta), golden-section refinement between the
/// neighboring grid points, then gamma_g tuned by bisection so that
/// mean(dpi) = 0 (the root is unique: mean(dpi) is strictly decreasing in
/// gamma_g). With rounds > 1 the (minimize, tune) pair is iterated.
EtaSearchResult eta_search(const std::vector<ScaledEntry>& scaled,
                           double gamma_g_init, const EtaGridSpec& spec = {},
                           double r_floor = kDefaultRFloor);

}  // namespace profluct
