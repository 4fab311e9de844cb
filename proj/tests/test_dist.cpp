#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "profluct/dist.hpp"
#include "profluct/synth.hpp"

using namespace profluct;

namespace {

// Test-side oracles use std::mt19937 on purpose: they must be independent
// of the library's own PRNG and samplers.

std::vector<double> pareto_signed(double alpha, std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) {
        const double mag = std::pow(1.0 - unif(gen), -1.0 / alpha);
        x = unif(gen) < 0.5 ? mag : -mag;
    }
    return out;
}

std::vector<double> exponential_signed(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) {
        const double mag = 1.0 + expo(gen);
        x = unif(gen) < 0.5 ? mag : -mag;
    }
    return out;
}

// Rejection sampler for c * r^-k * exp(-r/s) on [r_min, r_max]: truncated
// Pareto proposal by inverse CDF, exponential-factor acceptance.
std::vector<double> revenue_law_oracle(double k, double s, double r_min,
                                       double r_max, std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double a = std::pow(r_min, 1.0 - k);
    const double b = std::pow(r_max, 1.0 - k);
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double u = unif(gen);
        const double r = std::pow(a + (b - a) * u, 1.0 / (1.0 - k));
        if (unif(gen) < std::exp(-(r - r_min) / s)) out.push_back(r);
    }
    return out;
}

// Numeric inverse-CDF sampler for an arbitrary positive density on a grid.
template <typename F>
std::vector<double> inverse_cdf_oracle(const F& density, double lo, double hi,
                                       std::size_t grid_n, std::size_t n,
                                       unsigned seed) {
    std::vector<double> xs(grid_n + 1), cdf(grid_n + 1, 0.0);
    for (std::size_t i = 0; i <= grid_n; ++i)
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_n);
    for (std::size_t i = 1; i <= grid_n; ++i)
        cdf[i] = cdf[i - 1] +
                 0.5 * (density(xs[i - 1]) + density(xs[i])) * (xs[i] - xs[i - 1]);
    for (auto& c : cdf) c /= cdf.back();

    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& x : out) {
        const double u = unif(gen);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const auto i = static_cast<std::size_t>(
            std::max<std::ptrdiff_t>(1, it - cdf.begin()));
        const double t = (u - cdf[i - 1]) / std::max(cdf[i] - cdf[i - 1], 1e-300);
        x = xs[i - 1] + t * (xs[i] - xs[i - 1]);
    }
    return out;
}

double branch_density(double eps) {
    if (eps <= 0.0)
        return 0.55 / (1.0 + std::abs(eps / 0.6) + std::pow(std::abs(eps / 0.9), 2.7));
    return 0.55 / (1.0 + std::pow(eps / 0.75, 2.7));
}

double total_mass(const EmpiricalPdf& pdf) {
    double mass = 0.0;
    for (std::size_t i = 0; i < pdf.n_bins(); ++i)
        mass += pdf.densities[i] * pdf.width(i);
    return mass;
}

}  // namespace

TEST_CASE("empirical_pdf of uniform samples is flat at density 1") {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> samples(1000);
    for (auto& x : samples) x = unif(gen);
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::linear, 10);
    for (std::size_t i = 0; i < pdf.n_bins(); ++i)
        CHECK(pdf.densities[i] == doctest::Approx(1.0).epsilon(0.25));
    CHECK(total_mass(pdf) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("empirical_pdf of a repeated value concentrates in one thin bin") {
    std::vector<double> samples(100, 3.5);
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::linear, 10);
    REQUIRE(pdf.n_bins() == 1);
    CHECK(pdf.counts[0] == 100);
    CHECK(pdf.densities[0] == doctest::Approx(1.0 / pdf.width(0)));
}

TEST_CASE("empirical_pdf rejects log binning with nonpositive samples") {
    std::vector<double> samples = {1.0, 2.0, -0.5};
    CHECK_THROWS_AS(empirical_pdf(samples, Binning::log, 5), std::domain_error);
}

TEST_CASE("empirical_pdf normalization holds for log and linear binning") {
    const auto samples = revenue_law_oracle(1.55, 6.0, 0.2, 60.0, 5000, 2);
    for (Binning binning : {Binning::log, Binning::linear}) {
        const EmpiricalPdf pdf = empirical_pdf(samples, binning, 40);
        CHECK(total_mass(pdf) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("fit_revenue_pdf recovers the truncated power-law-with-cutoff form") {
    const auto samples = revenue_law_oracle(1.55, 6.0, 0.2, 80.0, 20000, 3);
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::log, 50);
    const RevenuePdfFit fit = fit_revenue_pdf(pdf, 0.2);
    // Normalized over r > 0.2 the prefactor is 0.3/0.9747 = 0.3078.
    CHECK(fit.prefactor == doctest::Approx(0.3078).epsilon(0.15));
    CHECK(fit.power_exponent == doctest::Approx(1.55).epsilon(0.15));
    CHECK(fit.cutoff_scale == doctest::Approx(6.0).epsilon(0.35));
    CHECK_FALSE(fit.cutoff_beyond_range);
}

TEST_CASE("fit_revenue_pdf flags an absent cutoff on pure power-law samples") {
    std::mt19937 gen(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> samples(20000);
    for (auto& r : samples) r = 0.2 * std::pow(1.0 - unif(gen), -1.0 / 1.55);
    // Cap the range so the histogram is not dominated by one huge outlier.
    std::vector<double> capped;
    for (double r : samples)
        if (r < 50.0) capped.push_back(r);
    const EmpiricalPdf pdf = empirical_pdf(capped, Binning::log, 50);
    const RevenuePdfFit fit = fit_revenue_pdf(pdf, 0.2);
    CHECK(fit.power_exponent == doctest::Approx(1.0 + 1.55).epsilon(0.15));
    CHECK(fit.cutoff_beyond_range);
}

TEST_CASE("fit_revenue_pdf on pure exponential samples finds no power law") {
    std::mt19937 gen(5);
    std::exponential_distribution<double> expo(1.0 / 6.0);
    std::vector<double> samples;
    while (samples.size() < 20000) {
        const double r = 0.2 + expo(gen);
        samples.push_back(r);
    }
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::log, 50);
    const RevenuePdfFit fit = fit_revenue_pdf(pdf, 0.2);
    CHECK(std::abs(fit.power_exponent) < 0.2);
    CHECK(fit.cutoff_scale == doctest::Approx(6.0).epsilon(0.2));
}

TEST_CASE("fit_revenue_pdf needs at least 4 usable bins") {
    std::vector<double> samples = {1.0, 1.1, 1.2, 1.3};
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::log, 3);
    CHECK_THROWS_AS(fit_revenue_pdf(pdf, 0.2), std::runtime_error);
}

TEST_CASE("fit_fluctuation_pdf round-trips the two-branch form") {
    const auto samples =
        inverse_cdf_oracle(branch_density, -60.0, 60.0, 60000, 20000, 6);
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::linear, 80, -20.0, 20.0);
    const TailFit fit = fit_fluctuation_pdf(pdf);
    // The sampled density is the normalized branch form; shapes are preserved,
    // amplitudes are rescaled by the common normalization constant.
    const double norm = fit.a_pos / 0.55;
    CHECK(fit.tail_power == doctest::Approx(2.7).epsilon(0.2));
    CHECK(fit.alpha == doctest::Approx(1.7).epsilon(0.25));
    CHECK(fit.a_neg / norm == doctest::Approx(0.55).epsilon(0.2));
    CHECK(fit.b_neg == doctest::Approx(0.6).epsilon(0.45));
    CHECK(fit.c_neg == doctest::Approx(0.9).epsilon(0.35));
    CHECK(fit.c_pos == doctest::Approx(0.75).epsilon(0.2));
    CHECK(fit.levy_like);
    CHECK(fit.converged);
}

TEST_CASE("fit_fluctuation_pdf drives Gaussian samples to the q box top") {
    std::mt19937 gen(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> samples(50000);
    for (auto& x : samples) x = normal(gen);
    const EmpiricalPdf pdf = empirical_pdf(samples, Binning::linear, 60, -6.0, 6.0);
    TailFitConfig config;
    config.count_weighted = false;  // equal bin weight exposes the far tail
    TailFit fit;
    try {
        fit = fit_fluctuation_pdf(pdf, config);
    } catch (const TailFitError& e) {
        fit = e.best;
    }
    CHECK(fit.tail_power > config.q_max - 0.5);
    CHECK_FALSE(fit.levy_like);
}

TEST_CASE("fit_fluctuation_pdf recovers alpha from stable samples") {
    // The power tail only dominates the fit with a wide histogram and equal
    // bin weighting; count weighting concentrates on the Gaussian-like core.
    const auto samples = sample_stable(1.7, 0.0, 2000000, 8);
    const EmpiricalPdf pdf =
        empirical_pdf(samples, Binning::linear, 200, -200.0, 200.0);
    TailFitConfig config;
    config.count_weighted = false;
    const TailFit fit = fit_fluctuation_pdf(pdf, config);
    CHECK(fit.alpha == doctest::Approx(1.7).epsilon(0.09));
    CHECK(fit.levy_like);

    // Independent cross-check: Hill on the same sample set.
    const HillResult hill = hill_tail_exponent(samples, 0.005);
    const double hill_alpha = 0.5 * (hill.alpha_pos + hill.alpha_neg);
    CHECK(hill_alpha == doctest::Approx(1.7).epsilon(0.09));
    CHECK(std::abs(fit.alpha - hill_alpha) < 0.3);
}

TEST_CASE("hill_tail_exponent is exact on Pareto tails") {
    const auto samples = pareto_signed(1.7, 10000, 9);
    const HillResult result = hill_tail_exponent(samples, 0.05);
    CHECK(result.alpha_pos == doctest::Approx(1.7).epsilon(0.06));
    CHECK(result.alpha_neg == doctest::Approx(1.7).epsilon(0.06));
    CHECK(result.plateau_pos);
    CHECK(result.plateau_neg);
}

TEST_CASE("hill_tail_exponent at the boundary Levy case alpha = 1") {
    const auto samples = pareto_signed(1.0, 10000, 10);
    const HillResult result = hill_tail_exponent(samples, 0.05);
    CHECK(result.alpha_pos == doctest::Approx(1.0).epsilon(0.1));
    CHECK(result.alpha_neg == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("hill_tail_exponent flags the drifting exponential tail") {
    const auto samples = exponential_signed(20000, 11);
    const HillResult result = hill_tail_exponent(samples, 0.1, 0.1);
    CHECK_FALSE(result.plateau_pos);
    CHECK_FALSE(result.plateau_neg);
}

TEST_CASE("hill_tail_exponent is invariant under positive rescaling") {
    const auto samples = pareto_signed(1.7, 5000, 12);
    auto scaled = samples;
    for (auto& x : scaled) x *= 123.45;
    const HillResult a = hill_tail_exponent(samples, 0.05);
    const HillResult b = hill_tail_exponent(scaled, 0.05);
    CHECK(a.alpha_pos == doctest::Approx(b.alpha_pos).epsilon(1e-10));
    CHECK(a.alpha_neg == doctest::Approx(b.alpha_neg).epsilon(1e-10));
}

TEST_CASE("hill_tail_exponent validates inputs") {
    const auto samples = pareto_signed(1.7, 5000, 13);
    CHECK_THROWS_AS(hill_tail_exponent(samples, 0.5), std::invalid_argument);
    std::vector<double> tiny = {1.0, -1.0, 2.0, -2.0};
    CHECK_THROWS_AS(hill_tail_exponent(tiny, 0.05), std::runtime_error);
}
