#include "profluct/scaling.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace profluct {

namespace {

// Kahan-compensated accumulator; keeps reductions deterministic.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double mean_dpi_at(const std::vector<ScaledEntry>& scaled, double gamma_g,
                   double eta, double r_floor, std::size_t& used) {
    Kahan acc;
    used = 0;
    for (const auto& e : scaled) {
        if (e.r < r_floor) continue;
        acc.add((e.p - gamma_g * e.r) / std::pow(e.r, eta));
        ++used;
    }
    if (used == 0) throw std::invalid_argument("scaling: no entries above r floor");
    return acc.sum / static_cast<double>(used);
}

}  // namespace

std::vector<ScaledEntry> scale_panel(const Panel& panel, const TrendFit& revenue_trend) {
    std::vector<ScaledEntry> out;
    out.reserve(panel.records.size());
    for (const auto& rec : panel.records) {
        const double r0 = revenue_trend.value_at(rec.year);
        out.push_back({rec.company_id, rec.year, rec.revenue / r0, rec.profit / r0,
                       0.0, 0.0});
    }
    return out;
}

ScaledSeries fluctuations(std::vector<ScaledEntry> scaled, double gamma_g,
                          double eta, double r_floor) {
    if (eta < 0.0) throw std::domain_error("fluctuations: eta < 0");
    ScaledSeries series;
    series.gamma_g = gamma_g;
    series.eta = eta;

    const std::size_t n = scaled.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        auto& e = scaled[i];
        e.dp = e.p - gamma_g * e.r;
        e.dpi = e.dp / std::pow(e.r, eta);
    }

    Kahan abs_dp, abs_dpi;
    std::size_t used = 0;
    for (const auto& e : scaled) {
        if (e.r < r_floor) {
            ++series.excluded_small_r;
            continue;
        }
        abs_dp.add(std::abs(e.dp));
        abs_dpi.add(std::abs(e.dpi));
        ++used;
    }
    if (used > 0) {
        series.mean_abs_dp = abs_dp.sum / static_cast<double>(used);
        series.mean_abs_dpi = abs_dpi.sum / static_cast<double>(used);
    }
    series.entries = std::move(scaled);
    return series;
}

double sigma2_eta(const std::vector<ScaledEntry>& scaled, double gamma_g,
                  double eta, double r_floor) {
    Kahan sum, sumsq;
    std::size_t used = 0;
    for (const auto& e : scaled) {
        if (e.r < r_floor) continue;
        const double dpi = (e.p - gamma_g * e.r) / std::pow(e.r, eta);
        sum.add(dpi);
        sumsq.add(dpi * dpi);
        ++used;
    }
    if (used < 2) throw std::invalid_argument("sigma2_eta: fewer than 2 entries");
    const auto n = static_cast<double>(used);
    const double mean = sum.sum / n;
    return (sumsq.sum - n * mean * mean) / (n - 1.0);
}

std::vector<std::pair<double, double>> sigma_profile_serial(
    const std::vector<ScaledEntry>& scaled, double gamma_g,
    const EtaGridSpec& spec, double r_floor) {
    const auto n_points =
        static_cast<std::size_t>((spec.eta_max - spec.eta_min) / spec.step + 1.5);
    std::vector<std::pair<double, double>> profile;
    profile.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        // Grid points from the index, not accumulation, so the parallel
        // version lands on bit-identical etas.
        const double eta = spec.eta_min + static_cast<double>(i) * spec.step;
        profile.emplace_back(eta, std::sqrt(sigma2_eta(scaled, gamma_g, eta, r_floor)));
    }
    return profile;
}

std::vector<std::pair<double, double>> sigma_profile(
    const std::vector<ScaledEntry>& scaled, double gamma_g,
    const EtaGridSpec& spec, double r_floor) {
    const auto n_points =
        static_cast<std::size_t>((spec.eta_max - spec.eta_min) / spec.step + 1.5);
    std::vector<std::pair<double, double>> profile(n_points);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_points; ++i) {
        const double eta = spec.eta_min + static_cast<double>(i) * spec.step;
        profile[i] = {eta, std::sqrt(sigma2_eta(scaled, gamma_g, eta, r_floor))};
    }
    return profile;
}

namespace {

double golden_refine(const std::vector<ScaledEntry>& scaled, double gamma_g,
                     double lo, double hi, double tol, double r_floor) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = sigma2_eta(scaled, gamma_g, x1, r_floor);
    double f2 = sigma2_eta(scaled, gamma_g, x2, r_floor);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = sigma2_eta(scaled, gamma_g, x1, r_floor);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = sigma2_eta(scaled, gamma_g, x2, r_floor);
        }
    }
    return 0.5 * (a + b);
}

double tune_gamma(const std::vector<ScaledEntry>& scaled, double eta,
                  double gamma_init, double tol, double r_floor) {
    std::size_t used = 0;
    // mean(dpi) is linear and strictly decreasing in gamma (slope
    // -mean(r^{1-eta}) < 0); bracket by doubling, then bisect.
    double lo = gamma_init - 0.5, hi = gamma_init + 0.5;
    double flo = mean_dpi_at(scaled, lo, eta, r_floor, used);
    double fhi = mean_dpi_at(scaled, hi, eta, r_floor, used);
    assert(flo > fhi && "mean(dpi) must be decreasing in gamma_g");
    for (int i = 0; i < 64 && !(flo >= 0.0 && fhi <= 0.0); ++i) {
        const double width = hi - lo;
        if (flo < 0.0) {
            lo -= width;
            flo = mean_dpi_at(scaled, lo, eta, r_floor, used);
        }
        if (fhi > 0.0) {
            hi += width;
            fhi = mean_dpi_at(scaled, hi, eta, r_floor, used);
        }
    }
    if (!(flo >= 0.0 && fhi <= 0.0))
        throw std::runtime_error("tune_gamma: failed to bracket the root");
    double mid = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double fm = mean_dpi_at(scaled, mid, eta, r_floor, used);
        if (std::abs(fm) <= tol) break;
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return mid;
}

}  // namespace

EtaSearchResult eta_search(const std::vector<ScaledEntry>& scaled,
                           double gamma_g_init, const EtaGridSpec& spec,
                           double r_floor) {
    if (scaled.empty()) throw std::invalid_argument("eta_search: empty input");
    if (spec.eta_max < 1.0)
        throw std::invalid_argument("eta_search: grid must cover [0, eta_max >= 1]");

    EtaSearchResult result;
    double gamma = gamma_g_init;
    const int rounds = std::max(1, spec.rounds);
    double prev_eta = -1.0;

    for (int round = 0; round < rounds; ++round) {
        result.grid = sigma_profile(scaled, gamma, spec, r_floor);

        std::size_t best = 0;
        for (std::size_t i = 1; i < result.grid.size(); ++i)
            if (result.grid[i].second < result.grid[best].second) best = i;

        // Ties within tolerance: keep the smallest eta, set the flag.
        const double best_s2 = result.grid[best].second * result.grid[best].second;
        for (std::size_t i = 0; i < result.grid.size(); ++i) {
            if (i == best) continue;
            const double s2 = result.grid[i].second * result.grid[i].second;
            if (std::abs(s2 - best_s2) <= spec.tie_tol * std::max(best_s2, 1e-300)) {
                result.multiple_minima = true;
                if (i < best) best = i;
            }
        }

        const double lo = best > 0 ? result.grid[best - 1].first : result.grid[best].first;
        const double hi = best + 1 < result.grid.size() ? result.grid[best + 1].first
                                                        : result.grid[best].first;
        result.eta_star = (hi > lo)
                              ? golden_refine(scaled, gamma, lo, hi, spec.refine_tol, r_floor)
                              : result.grid[best].first;
        gamma = tune_gamma(scaled, result.eta_star, gamma, spec.tune_tol, r_floor);
        result.rounds_used = round + 1;
        if (std::abs(result.eta_star - prev_eta) < spec.refine_tol) break;
        prev_eta = result.eta_star;
    }

    result.sigma_eta_star =
        std::sqrt(sigma2_eta(scaled, gamma, result.eta_star, r_floor));
    result.gamma_g_tuned = gamma;
    return result;
}

}  // namespace profluct
