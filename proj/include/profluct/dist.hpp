#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace profluct {

enum class Binning { log, linear };

struct EmpiricalPdf {
    std::vector<double> bin_edges;  // n_bins + 1, strictly increasing
    std::vector<double> densities;  // normalized: sum(density * width) = 1
    std::vector<std::size_t> counts;
    Binning binning = Binning::linear;

    std::size_t n_bins() const { return counts.size(); }
    double center(std::size_t i) const;
    double width(std::size_t i) const { return bin_edges[i + 1] - bin_edges[i]; }
};

/// Normalized density histogram. Log binning requires all samples > 0
/// (std::domain_error otherwise). Edges span [min, max] of the samples.
EmpiricalPdf empirical_pdf(std::span<const double> samples, Binning binning,
                           std::size_t n_bins);

/// As above with explicitly fixed range.
EmpiricalPdf empirical_pdf(std::span<const double> samples, Binning binning,
                           std::size_t n_bins, double lo, double hi);

/// Parameters of n(r) = prefactor * r^-power_exponent * exp(-r/cutoff_scale).
struct RevenuePdfFit {
    double prefactor = 0.0;
    double power_exponent = 0.0;
    double cutoff_scale = 0.0;
    double fit_range_min = 0.0;
    // Pure power-law fit over the intermediate window (no cutoff term).
    double power_only_exponent = 0.0;
    double power_window_lo = 0.0;
    double power_window_hi = 0.0;
    // Set when the fitted cutoff lies beyond the fitted range (or came out
    // non-decaying); cutoff_scale is then unreliable / effectively infinite.
    bool cutoff_beyond_range = false;
};

/// Least squares of log density against log(prefactor) - power*log(r)
/// - r/cutoff over nonzero bins with center > r_min; linear in
/// (log prefactor, power, 1/cutoff). Throws std::runtime_error
/// ("insufficient_data") with fewer than 4 usable bins.
RevenuePdfFit fit_revenue_pdf(const EmpiricalPdf& pdf, double r_min,
                              double power_window_lo = 0.3,
                              double power_window_hi = 2.0);

/// Two-branch fluctuation density fit:
///   eps <= 0:  a_neg / (1 + |eps/b_neg| + |eps/c_neg|^q)
///   eps >= 0:  a_pos / (1 + |eps/c_pos|^q)
/// with the tail power q shared between branches; alpha = q - 1.
struct TailFit {
    double a_neg = 0.0, b_neg = 0.0, c_neg = 0.0;
    double a_pos = 0.0, c_pos = 0.0;
    double tail_power = 0.0;  // q
    double alpha = 0.0;       // q - 1
    bool levy_like = false;   // 0 < alpha < 2
    bool converged = false;
    double rss = 0.0;  // weighted log-density residual sum of squares

    double evaluate(double eps) const;
};

/// Thrown on optimizer non-convergence; carries the best iterate.
struct TailFitError : std::runtime_error {
    TailFit best;
    explicit TailFitError(TailFit fit)
        : std::runtime_error("fit_fluctuation_pdf: optimizer did not converge"),
          best(std::move(fit)) {}
};

struct TailFitConfig {
    bool count_weighted = true;  // weight log-density residuals by bin counts
    double q_min = 1.5;
    double q_max = 8.0;
    int max_iterations = 20000;
    double f_tol = 1e-13;
};

/// Deterministic multistart Nelder-Mead on log density over nonzero bins.
/// Requires the pdf to span both signs of eps.
TailFit fit_fluctuation_pdf(const EmpiricalPdf& pdf, const TailFitConfig& config = {});

struct HillResult {
    double alpha_pos = 0.0;
    double alpha_neg = 0.0;
    bool plateau_pos = false;  // estimate stable under halving k
    bool plateau_neg = false;
};

/// Hill estimate of the tail exponent on each sign's top k_fraction order
/// statistics. The plateau flags compare against the estimate at k/2; a
/// large drift marks a non-power tail. Throws std::runtime_error
/// ("insufficient_data") below 50 samples per tail.
HillResult hill_tail_exponent(std::span<const double> samples, double k_fraction,
                              double plateau_rel_tol = 0.2);

}  // namespace profluct
