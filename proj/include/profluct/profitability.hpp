#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "profluct/dist.hpp"
#include "profluct/scaling.hpp"

namespace profluct {

/// Break-even / profitability model for a normalized fluctuation density
/// G(eps) with mean |eps| = 1. The density must integrate to 1; beyond
/// +-eps_cut the power-law tail is handled in closed form when present.
struct ProfitabilityModel {
    double gamma_g = 0.0;
    double mean_abs_dpi = 0.0;
    double alpha = 0.0;     // > 1 so the r-exponent 1 - 1/alpha is positive
    double eps_cut = 10.0;
    std::function<double(double)> density;  // normalized G(eps)

    // Asymptotic tail amplitudes: G(eps) ~ tail_amp / |eps|^tail_power.
    bool has_power_tail = false;
    double tail_power = 0.0;
    double tail_amp_pos = 0.0;
    double tail_amp_neg = 0.0;

    double quad_tol = 1e-8;
};

/// Build a model from a fitted two-branch density; the composite form is
/// numerically renormalized to unit mass (the fitted branch amplitudes are
/// not a probability density on their own).
ProfitabilityModel make_levy_model(const TailFit& fit, double gamma_g,
                                   double mean_abs_dpi, double alpha,
                                   double eps_cut = 10.0);

/// eps_BE = (gamma_g / mean_abs_dpi) * r^(1 - 1/alpha).
double eps_be(const ProfitabilityModel& model, double r);

/// P_PF(r) = integral of G from -eps_BE(r) to infinity: adaptive quadrature
/// over the body plus the closed-form power tail beyond eps_cut.
double p_pf(const ProfitabilityModel& model, double r);

/// Gaussian baseline with eta fixed at 1/2: Phi(gamma_g * sqrt(r) / sigma).
double p_pf_gaussian(double gamma_g, double sigma, double r);

struct ProfitabilityBin {
    double r_center = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double fraction = 0.0;  // share of entries with p > 0
    std::size_t n = 0;
    bool low_count = false;
    double mean_r = 0.0;  // mean scaled revenue of the bin's entries
};

/// Per-bin fraction of profitable entries over log-spaced r bins.
std::vector<ProfitabilityBin> empirical_profitability(const ScaledSeries& scaled,
                                                      std::size_t n_bins = 20,
                                                      std::size_t n_min = 10);

/// Model prediction averaged over a set of entries' r values (the correct
/// per-bin comparison point: each entry is Bernoulli(p_pf(r_i))).
double p_pf_mean(const ProfitabilityModel& model, std::span<const double> rs);

struct AbsolutePrediction {
    std::vector<double> revenue;       // absolute R
    std::vector<double> probability;   // P_PF(R / R0_forecast)
    std::vector<double> linear_approx;
    double linear_slope = 0.0;
    double p_at_zero = 0.0;
    double validity_bound = 0.5;  // absolute revenue below which the secant holds
};

/// P_PF on an absolute revenue grid for a forecast mean revenue, plus the
/// small-revenue secant line. P_PF'(0+) diverges for alpha > 1 (the
/// r^{1-1/alpha} threshold has infinite slope at zero), so the linear
/// approximation is the secant over [0, validity_bound].
AbsolutePrediction predict_absolute(const ProfitabilityModel& model,
                                    double r0_forecast,
                                    std::span<const double> revenue_grid,
                                    double validity_bound = 0.5);

/// Company-specific growth factor gamma_g = gamma_s - gamma_c.
inline double company_gamma(double gamma_s, double gamma_c) {
    return gamma_s - gamma_c;
}

}  // namespace profluct
