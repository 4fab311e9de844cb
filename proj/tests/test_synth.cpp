#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "profluct/dist.hpp"
#include "profluct/scaling.hpp"
#include "profluct/synth.hpp"

using namespace profluct;

TEST_CASE("stable sampler degenerates to a variance-2 Gaussian at alpha = 2") {
    const auto samples = sample_stable(2.0, 0.0, 100000, 101);
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(samples.size() - 1);
    CHECK(mean == doctest::Approx(0.0).epsilon(0.05));
    CHECK(var == doctest::Approx(2.0).epsilon(0.05));
    // No power-law plateau in a Gaussian tail.
    const HillResult hill = hill_tail_exponent(samples, 0.02, 0.1);
    CHECK_FALSE(hill.plateau_pos);
    CHECK_FALSE(hill.plateau_neg);
}

TEST_CASE("stable sampler tail index cross-checks against Hill") {
    const auto samples = sample_stable(1.7, 0.0, 100000, 103);
    const HillResult hill = hill_tail_exponent(samples, 0.005);
    CHECK(hill.alpha_pos == doctest::Approx(1.7).epsilon(0.12));
    CHECK(hill.alpha_neg == doctest::Approx(1.7).epsilon(0.12));
}

TEST_CASE("stable sampler at alpha = 1 reproduces Cauchy quartiles") {
    auto samples = sample_stable(1.0, 0.0, 100000, 107);
    std::sort(samples.begin(), samples.end());
    const double median = samples[samples.size() / 2];
    const double q1 = samples[samples.size() / 4];
    const double q3 = samples[3 * samples.size() / 4];
    CHECK(median == doctest::Approx(0.0).epsilon(0.05));
    CHECK(q3 - q1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("stable sampler validates parameters and is seed-deterministic") {
    CHECK_THROWS_AS(sample_stable(0.0, 0.0, 10, 1), std::domain_error);
    CHECK_THROWS_AS(sample_stable(2.1, 0.0, 10, 1), std::domain_error);
    CHECK_THROWS_AS(sample_stable(1.7, 1.5, 10, 1), std::domain_error);
    const auto a = sample_stable(1.7, 0.3, 1000, 42);
    const auto b = sample_stable(1.7, 0.3, 1000, 42);
    CHECK(a == b);
}

TEST_CASE("revenue_variate respects the law's support and decays") {
    RevenueLaw law;
    Rng rng(5);
    std::size_t above_cutoff = 0;
    for (int i = 0; i < 20000; ++i) {
        const double r = revenue_variate(law, rng);
        CHECK(r >= law.r_min);
        if (r > 30.0) ++above_cutoff;
    }
    // exp(-r/6) suppresses the far tail almost completely.
    CHECK(above_cutoff < 20);
}

TEST_CASE("balanced revenue floor centers the law's log mean") {
    RevenueLaw law;  // default floor
    Rng rng(9);
    double sum_log = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) sum_log += std::log(revenue_variate(law, rng));
    CHECK(sum_log / n == doctest::Approx(0.0).epsilon(0.01));
}

TEST_CASE("noiseless generation lies exactly on the mean line") {
    GeneratorSpec spec;
    spec.n_companies = 20;
    spec.noise_amplitude = 0.0;
    spec.seed = 3;
    auto [panel, truth] = generate_panel(spec);
    for (const auto& rec : panel.records)
        CHECK(rec.profit == doctest::Approx(spec.gamma_g * rec.revenue).epsilon(1e-12));
    for (const auto& row : truth.rows)
        CHECK(row.p == doctest::Approx(spec.gamma_g * row.r).epsilon(1e-12));
}

TEST_CASE("generation is bit-deterministic for a fixed spec") {
    GeneratorSpec spec;
    spec.n_companies = 30;
    spec.seed = 77;
    auto [panel_a, truth_a] = generate_panel(spec);
    auto [panel_b, truth_b] = generate_panel(spec);
    REQUIRE(panel_a.records.size() == panel_b.records.size());
    for (std::size_t i = 0; i < panel_a.records.size(); ++i) {
        CHECK(panel_a.records[i].revenue == panel_b.records[i].revenue);
        CHECK(panel_a.records[i].profit == panel_b.records[i].profit);
    }
    for (std::size_t i = 0; i < truth_a.rows.size(); ++i)
        CHECK(truth_a.rows[i].eps == truth_b.rows[i].eps);
}

TEST_CASE("ground truth round-trips through scale_panel") {
    GeneratorSpec spec;
    spec.n_companies = 25;
    spec.seed = 19;
    auto [panel, truth] = generate_panel(spec);
    TrendFit trend;
    trend.amplitude = spec.revenue_trend.amplitude;
    trend.efold_years = spec.revenue_trend.efold_years;
    trend.base_year = spec.revenue_trend.base_year;
    const auto scaled = scale_panel(panel, trend);
    REQUIRE(scaled.size() == truth.rows.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        CHECK(scaled[i].r == doctest::Approx(truth.rows[i].r).epsilon(1e-12));
        CHECK(scaled[i].p == doctest::Approx(truth.rows[i].p).epsilon(1e-12));
    }
}

TEST_CASE("generated panel is sorted and rectangular") {
    GeneratorSpec spec;
    spec.n_companies = 7;
    spec.year_min = 1990;
    spec.year_max = 1999;
    spec.seed = 23;
    auto [panel, truth] = generate_panel(spec);
    REQUIRE(panel.records.size() == 70);
    for (std::size_t i = 1; i < panel.records.size(); ++i) {
        const auto& prev = panel.records[i - 1];
        const auto& cur = panel.records[i];
        const bool ordered = prev.company_id < cur.company_id ||
                             (prev.company_id == cur.company_id && prev.year < cur.year);
        CHECK(ordered);
    }
}

TEST_CASE("noise amplitude calibration hits the injected mean |dpi|") {
    GeneratorSpec spec;
    spec.n_companies = 400;
    spec.seed = 29;
    auto [panel, truth] = generate_panel(spec);
    // mean |eps| ~ 1 by calibration, so mean |amplitude * eps| ~ amplitude.
    double sum_abs = 0.0;
    for (const auto& row : truth.rows) sum_abs += std::abs(row.eps);
    CHECK(sum_abs / static_cast<double>(truth.rows.size()) ==
          doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("survivorship redraw only replaces the low-revenue cohort") {
    GeneratorSpec base;
    base.n_companies = 60;
    base.seed = 31;
    GeneratorSpec culled = base;
    culled.survivorship_fraction = 0.1;
    auto [panel_base, truth_base] = generate_panel(base);
    auto [panel_cull, truth_cull] = generate_panel(culled);
    REQUIRE(truth_base.rows.size() == truth_cull.rows.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < truth_base.rows.size(); ++i)
        if (truth_base.rows[i].r != truth_cull.rows[i].r) ++changed;
    // 10% of 60 companies redrawn per year.
    CHECK(changed > 0);
    CHECK(changed <= truth_base.rows.size() / 5);
}

TEST_CASE("aggregate_check slope approximates 1/alpha") {
    const std::vector<std::size_t> ns = {10, 100, 1000, 10000};
    const AggregateCheck heavy = aggregate_check(1.7, ns, 400, 7);
    REQUIRE(heavy.slope_defined);
    CHECK(heavy.slope == doctest::Approx(1.0 / 1.7).epsilon(0.06));
    const AggregateCheck gauss = aggregate_check(2.0, ns, 400, 7);
    REQUIRE(gauss.slope_defined);
    CHECK(gauss.slope == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("aggregate_check with a single n leaves the slope undefined") {
    const AggregateCheck check = aggregate_check(1.7, {1, 1, 1}, 100, 11);
    CHECK_FALSE(check.slope_defined);
    for (const auto& pt : check.points) CHECK(pt.n_terms == 1);
}

TEST_CASE("aggregate_check error shrinks with more samples per n") {
    const std::vector<std::size_t> ns = {10, 100, 1000};
    std::vector<double> err_small, err_large;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        err_small.push_back(
            std::abs(aggregate_check(1.7, ns, 50, seed).slope - 1.0 / 1.7));
        err_large.push_back(
            std::abs(aggregate_check(1.7, ns, 2000, seed).slope - 1.0 / 1.7));
    }
    std::sort(err_small.begin(), err_small.end());
    std::sort(err_large.begin(), err_large.end());
    CHECK(err_large[2] <= err_small[2] + 0.01);
}
