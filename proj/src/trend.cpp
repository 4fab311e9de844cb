#include "profluct/trend.hpp"

#include <cmath>
#include <stdexcept>

namespace profluct {

double TrendFit::value_at(int year) const {
    return amplitude * std::exp((year - base_year) / efold_years);
}

namespace {

struct LogPoints {
    std::vector<double> x;  // year - y0
    std::vector<double> y;  // ln value
};

LogPoints collect(const std::vector<YearValue>& series, int base_year,
                  const std::set<int>& excluded) {
    LogPoints pts;
    for (const auto& [year, value] : series) {
        if (excluded.count(year)) continue;
        if (value <= 0.0)
            throw std::domain_error("fit_exponential: nonpositive value, log undefined");
        pts.x.push_back(static_cast<double>(year - base_year));
        pts.y.push_back(std::log(value));
    }
    if (pts.x.size() < 2)
        throw std::invalid_argument("fit_exponential: need >= 2 non-excluded points");
    return pts;
}

double rms_residual(const LogPoints& pts, double log_a, double inv_b) {
    double ss = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
        const double res = pts.y[i] - (log_a + inv_b * pts.x[i]);
        ss += res * res;
    }
    return std::sqrt(ss / static_cast<double>(pts.x.size()));
}

}  // namespace

TrendFit fit_exponential(const std::vector<YearValue>& series, int base_year,
                         const std::set<int>& excluded) {
    const LogPoints pts = collect(series, base_year, excluded);
    const auto n = static_cast<double>(pts.x.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
        mx += pts.x[i];
        my += pts.y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i) {
        sxx += (pts.x[i] - mx) * (pts.x[i] - mx);
        sxy += (pts.x[i] - mx) * (pts.y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("fit_exponential: all years identical");
    const double slope = sxy / sxx;  // 1/B
    if (std::abs(slope) < 1e-14)
        throw std::domain_error("fit_exponential: degenerate_flat");
    const double log_a = my - slope * mx;

    TrendFit fit;
    fit.amplitude = std::exp(log_a);
    fit.efold_years = 1.0 / slope;
    fit.base_year = base_year;
    fit.excluded_years = excluded;
    fit.residual_rms = rms_residual(pts, log_a, slope);
    return fit;
}

TrendFit fit_exponential_fixed_b(const std::vector<YearValue>& series,
                                 int base_year, double efold_years,
                                 const std::set<int>& excluded) {
    if (efold_years == 0.0)
        throw std::domain_error("fit_exponential_fixed_b: B = 0");
    const LogPoints pts = collect(series, base_year, excluded);
    const double inv_b = 1.0 / efold_years;
    double log_a = 0.0;
    for (std::size_t i = 0; i < pts.x.size(); ++i)
        log_a += pts.y[i] - inv_b * pts.x[i];
    log_a /= static_cast<double>(pts.x.size());

    TrendFit fit;
    fit.amplitude = std::exp(log_a);
    fit.efold_years = efold_years;
    fit.base_year = base_year;
    fit.excluded_years = excluded;
    fit.residual_rms = rms_residual(pts, log_a, inv_b);
    return fit;
}

ProportionalityFit fit_proportionality(const std::vector<std::pair<double, double>>& means,
                                       const std::vector<int>& years,
                                       const std::set<int>& excluded) {
    std::vector<double> r0, p0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (!years.empty() && i < years.size() && excluded.count(years[i])) continue;
        r0.push_back(means[i].first);
        p0.push_back(means[i].second);
    }
    if (r0.size() < 2)
        throw std::invalid_argument("fit_proportionality: need >= 2 non-excluded points");

    const auto n = static_cast<double>(r0.size());
    double mr = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < r0.size(); ++i) {
        mr += r0[i];
        mp += p0[i];
    }
    mr /= n;
    mp /= n;
    double srr = 0.0, srp = 0.0, spp = 0.0, srr0 = 0.0, srp0 = 0.0;
    for (std::size_t i = 0; i < r0.size(); ++i) {
        srr += (r0[i] - mr) * (r0[i] - mr);
        srp += (r0[i] - mr) * (p0[i] - mp);
        spp += (p0[i] - mp) * (p0[i] - mp);
        srr0 += r0[i] * r0[i];
        srp0 += r0[i] * p0[i];
    }
    if (srr == 0.0)
        throw std::domain_error("fit_proportionality: singular design, all R0 equal");

    ProportionalityFit fit;
    fit.slope = srp / srr;
    fit.intercept = mp - fit.slope * mr;
    fit.r_squared = spp == 0.0 ? 1.0 : (srp * srp) / (srr * spp);
    fit.origin_slope = srp0 / srr0;
    return fit;
}

std::set<int> flag_anomalous(const std::vector<YearValue>& series, int base_year,
                             double threshold) {
    std::set<int> flagged;
    for (int round = 0; round < 20; ++round) {
        TrendFit fit;
        try {
            fit = fit_exponential(series, base_year, flagged);
        } catch (const std::invalid_argument&) {
            break;  // flagged nearly everything, stop
        }
        std::set<int> next;
        // Small absolute floor keeps exact data (rms ~ 0) from flagging
        // everything through float noise.
        const double cut = threshold * fit.residual_rms + 1e-12;
        for (const auto& [year, value] : series) {
            if (value <= 0.0) {
                next.insert(year);  // log-undefined points are anomalous by definition
                continue;
            }
            const double res = std::log(value) - std::log(fit.value_at(year));
            if (std::abs(res) > cut) next.insert(year);
        }
        if (next == flagged) break;
        flagged = std::move(next);
    }
    return flagged;
}

}  // namespace profluct
