#pragma once

#include <set>
#include <utility>
#include <vector>

namespace profluct {

/// Exponential growth model value(year) = A * exp((year - y0) / B),
/// fitted by linear least squares on log values.
struct TrendFit {
    double amplitude = 0.0;     // A, same unit as the fitted series
    double efold_years = 0.0;   // B, e-folding time in years
    int base_year = 0;          // y0
    std::set<int> excluded_years;
    double residual_rms = 0.0;  // RMS of log residuals over fitted points

    double value_at(int year) const;
};

using YearValue = std::pair<int, double>;

/// Least-squares fit of ln(value) against (year - y0)/B + ln A over the
/// non-excluded points. Throws std::domain_error on a nonpositive value
/// ("log undefined") or a flat series ("degenerate_flat", B would be
/// infinite); std::invalid_argument with fewer than two usable points.
TrendFit fit_exponential(const std::vector<YearValue>& series, int base_year,
                         const std::set<int>& excluded = {});

/// Amplitude-only refit with the e-folding time pinned (used to impose
/// B1 = B0, i.e. profit growth proportional to revenue growth).
TrendFit fit_exponential_fixed_b(const std::vector<YearValue>& series,
                                 int base_year, double efold_years,
                                 const std::set<int>& excluded = {});

struct ProportionalityFit {
    double slope = 0.0;         // OLS slope of P0 on R0
    double intercept = 0.0;
    double r_squared = 0.0;
    double origin_slope = 0.0;  // through-origin slope, the <gamma_g> candidate
};

/// OLS of P0 on R0 plus the through-origin slope sum(P0*R0)/sum(R0^2).
/// Throws std::domain_error when all R0 coincide (singular design).
ProportionalityFit fit_proportionality(const std::vector<std::pair<double, double>>& means,
                                       const std::vector<int>& years = {},
                                       const std::set<int>& excluded = {});

/// Years whose log-residual magnitude exceeds threshold times the residual
/// RMS of the non-flagged set, iterated (with refits) to a fixed point.
std::set<int> flag_anomalous(const std::vector<YearValue>& series, int base_year,
                             double threshold);

}  // namespace profluct
