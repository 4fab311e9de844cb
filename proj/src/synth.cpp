#include "profluct/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace profluct {

double stable_variate(double alpha, double skew, Rng& rng) {
    const double u = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
    const double w = rng.exponential();

    if (alpha == 1.0) {
        const double half_pi = M_PI / 2.0;
        if (skew == 0.0) return std::tan(u);  // Cauchy
        return (2.0 / M_PI) *
               ((half_pi + skew * u) * std::tan(u) -
                skew * std::log((half_pi * w * std::cos(u)) / (half_pi + skew * u)));
    }

    const double t = skew * std::tan(M_PI * alpha / 2.0);
    const double shift = std::atan(t) / alpha;
    const double scale = std::pow(1.0 + t * t, 0.5 / alpha);
    return scale * std::sin(alpha * (u + shift)) /
           std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - alpha * (u + shift)) / w, (1.0 - alpha) / alpha);
}

std::vector<double> sample_stable(double alpha, double skew, std::size_t n,
                                  std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw std::domain_error("sample_stable: alpha outside (0, 2]");
    if (!(skew >= -1.0 && skew <= 1.0))
        throw std::domain_error("sample_stable: skew outside [-1, 1]");
    if (n < 1) throw std::domain_error("sample_stable: n < 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = stable_variate(alpha, skew, rng);
    return out;
}

double mean_abs_stable(double alpha, double skew) {
    static std::map<std::pair<double, double>, double> cache;
    static std::mutex cache_mutex;
    const std::pair<double, double> key{alpha, skew};
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    constexpr std::size_t calibration_size = 1'000'000;
    constexpr std::uint64_t calibration_seed = 0x5ca1ab1e0ddba11ULL;
    Rng rng(calibration_seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < calibration_size; ++i)
        sum += std::abs(stable_variate(alpha, skew, rng));
    const double mean = sum / static_cast<double>(calibration_size);
    std::lock_guard lock(cache_mutex);
    cache.emplace(key, mean);
    return mean;
}

double revenue_variate(const RevenueLaw& law, Rng& rng) {
    // Proposal: truncated Pareto with the law's power exponent; accept with
    // the exponential-cutoff factor.
    const double k = law.power_exponent;
    if (!(k > 1.0)) throw std::domain_error("revenue_variate: power exponent <= 1");
    for (;;) {
        const double u = rng.uniform_pos();
        const double r = law.r_min * std::pow(u, -1.0 / (k - 1.0));
        if (rng.uniform() < std::exp(-(r - law.r_min) / law.cutoff_scale)) return r;
    }
}

namespace {

std::string company_name(std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "C%05zu", index);
    return buf;
}

struct CompanyDraws {
    std::vector<double> r, eps;  // one per year
};

CompanyDraws draw_company(const GeneratorSpec& spec, std::size_t company_index,
                          double mean_abs_noise) {
    Rng rng(Rng::derive_seed(spec.seed, company_index));
    const auto n_years = static_cast<std::size_t>(spec.year_max - spec.year_min + 1);
    CompanyDraws draws;
    draws.r.resize(n_years);
    draws.eps.resize(n_years);
    for (std::size_t y = 0; y < n_years; ++y) {
        draws.r[y] = revenue_variate(spec.revenue_law, rng);
        double raw;
        if (const auto* stable = std::get_if<StableNoise>(&spec.noise_law)) {
            raw = stable_variate(stable->alpha, stable->skew, rng) / mean_abs_noise;
        } else {
            raw = rng.gaussian() / mean_abs_noise;
        }
        draws.eps[y] = raw;
    }
    return draws;
}

}  // namespace

std::pair<Panel, GroundTruth> generate_panel(const GeneratorSpec& spec) {
    if (spec.year_max < spec.year_min + 1)
        throw std::invalid_argument("generate_panel: need at least 2 years");
    if (spec.n_companies == 0)
        throw std::invalid_argument("generate_panel: no companies");

    double mean_abs_noise;
    if (const auto* stable = std::get_if<StableNoise>(&spec.noise_law)) {
        mean_abs_noise = mean_abs_stable(stable->alpha, stable->skew);
    } else {
        mean_abs_noise = std::sqrt(2.0 / M_PI);  // E|N(0,1)|
    }

    const auto n_companies = spec.n_companies;
    std::vector<CompanyDraws> draws(n_companies);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < n_companies; ++c)
        draws[c] = draw_company(spec, c, mean_abs_noise);

    const auto n_years = static_cast<std::size_t>(spec.year_max - spec.year_min + 1);
    if (spec.survivorship_fraction > 0.0) {
        // Redraw the lowest-revenue tail of each year's cohort; mimics
        // dropping out of a largest-companies list.
        Rng redraw_rng(Rng::derive_seed(spec.seed, n_companies + 1));
        const auto n_drop = static_cast<std::size_t>(
            spec.survivorship_fraction * static_cast<double>(n_companies));
        for (std::size_t y = 0; y < n_years; ++y) {
            std::vector<std::size_t> order(n_companies);
            for (std::size_t c = 0; c < n_companies; ++c) order[c] = c;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return draws[a].r[y] < draws[b].r[y];
            });
            for (std::size_t i = 0; i < n_drop && i < n_companies; ++i) {
                auto& d = draws[order[i]];
                d.r[y] = revenue_variate(spec.revenue_law, redraw_rng);
                if (const auto* stable = std::get_if<StableNoise>(&spec.noise_law)) {
                    d.eps[y] = stable_variate(stable->alpha, stable->skew, redraw_rng) /
                               mean_abs_noise;
                } else {
                    d.eps[y] = redraw_rng.gaussian() / mean_abs_noise;
                }
            }
        }
    }

    Panel panel;
    panel.year_min = spec.year_min;
    panel.year_max = spec.year_max;
    panel.unit_label = spec.unit_label;
    panel.records.reserve(n_companies * n_years);
    GroundTruth truth;
    truth.rows.reserve(n_companies * n_years);

    const TrendParams& trend = spec.revenue_trend;
    for (std::size_t c = 0; c < n_companies; ++c) {
        const std::string name = company_name(c);
        for (std::size_t y = 0; y < n_years; ++y) {
            const int year = spec.year_min + static_cast<int>(y);
            const double r = draws[c].r[y];
            const double eps = draws[c].eps[y];
            const double p = spec.gamma_g * r +
                             spec.noise_amplitude * std::pow(r, spec.eta) * eps;
            const double r0 =
                trend.amplitude * std::exp((year - trend.base_year) / trend.efold_years);
            panel.records.push_back({name, year, r * r0, p * r0});
            truth.rows.push_back({name, year, r, p, eps});
        }
    }
    return {std::move(panel), std::move(truth)};
}

AggregateCheck aggregate_check(double alpha, const std::vector<std::size_t>& n_values,
                               std::size_t samples_per_n, std::uint64_t seed) {
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw std::domain_error("aggregate_check: alpha outside (1, 2]");
    AggregateCheck check;
    Rng rng(seed);
    for (std::size_t n : n_values) {
        std::vector<double> abs_sums(samples_per_n);
        for (auto& s : abs_sums) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += stable_variate(alpha, 0.0, rng);
            s = std::abs(sum);
        }
        std::nth_element(abs_sums.begin(), abs_sums.begin() + abs_sums.size() / 2,
                         abs_sums.end());
        check.points.push_back({n, abs_sums[abs_sums.size() / 2]});
    }

    // log-log slope across distinct n.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& pt : check.points) {
        const double x = std::log(static_cast<double>(pt.n_terms));
        const double y = std::log(pt.scale_estimate);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const auto m = static_cast<double>(check.points.size());
    const double denom = m * sxx - sx * sx;
    if (denom > 1e-12) {
        check.slope = (m * sxy - sx * sy) / denom;
        check.slope_defined = true;
    }
    return check;
}

}  // namespace profluct
