#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "profluct/pipeline.hpp"

using namespace profluct;

namespace {

const AnalysisReport& reference_report() {
    // One representative default-parameter synthetic run, shared across cases.
    static const AnalysisReport report = [] {
        GeneratorSpec spec;
        spec.seed = 33;
        auto [panel, truth] = generate_panel(spec);
        return run_pipeline(panel, RunConfig{});
    }();
    return report;
}

}  // namespace

TEST_CASE("config JSON round-trips through a file") {
    RunConfig config;
    config.seed = 1234;
    config.gamma_g_init = 0.06;
    config.eta_grid.step = 0.02;
    config.anomalous_years = {1990, 2000};
    const std::string path = "test_config_roundtrip.json";
    {
        std::ofstream out(path);
        out << config.to_json();
    }
    const RunConfig loaded = RunConfig::from_json_file(path);
    std::remove(path.c_str());
    CHECK(loaded.seed == config.seed);
    CHECK(loaded.gamma_g_init == config.gamma_g_init);
    CHECK(loaded.eta_grid.step == config.eta_grid.step);
    CHECK(loaded.anomalous_years == config.anomalous_years);
    CHECK(loaded.hash() == config.hash());
}

TEST_CASE("config hash is sensitive to parameter changes") {
    RunConfig a, b;
    b.eps_cut = 8.0;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash() == RunConfig{}.hash());
}

TEST_CASE("missing config file raises a config-stage error") {
    try {
        RunConfig::from_json_file("definitely_not_here.json");
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == Stage::config);
    }
}

TEST_CASE("empty panel fails in the ingest stage with no partial report") {
    Panel panel;
    try {
        run_pipeline(panel, RunConfig{});
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == Stage::ingest);
    }
}

TEST_CASE("single-year panel fails in the trend stage") {
    Panel panel;
    panel.year_min = panel.year_max = 1960;
    panel.records.push_back({"A", 1960, 1.0, 0.1});
    panel.records.push_back({"B", 1960, 2.0, 0.1});
    try {
        run_pipeline(panel, RunConfig{});
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == Stage::trend);
    }
}

TEST_CASE("default-parameter synthetic run recovers the generator inputs") {
    const AnalysisReport& report = reference_report();
    CHECK(report.revenue_trend.amplitude == doctest::Approx(0.27).epsilon(0.1));
    CHECK(report.revenue_trend.efold_years == doctest::Approx(12.0).epsilon(0.1));
    CHECK(report.eta.eta_star == doctest::Approx(0.6).epsilon(0.1));
    CHECK(report.eta.gamma_g_tuned == doctest::Approx(0.052).epsilon(0.05));
    CHECK(report.scaled.mean_abs_dpi == doctest::Approx(0.030).epsilon(0.25));
    CHECK(report.revenue_fit.power_exponent == doctest::Approx(1.55).epsilon(0.15));
    const double hill = 0.5 * (report.hill.alpha_pos + report.hill.alpha_neg);
    CHECK(hill == doctest::Approx(1.7).epsilon(0.1));
    CHECK(report.model.density);  // profitability stage ran
    CHECK(report.gaussian_sigma > 0.0);
}

TEST_CASE("pipeline report serialization is deterministic") {
    GeneratorSpec spec;
    spec.n_companies = 60;
    spec.year_min = 1954;
    spec.year_max = 1990;
    spec.seed = 5;
    auto [panel, truth] = generate_panel(spec);
    RunConfig config;
    const AnalysisReport a = run_pipeline(panel, config);
    const AnalysisReport b = run_pipeline(panel, config);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("report JSON carries per-stage sections and the config hash") {
    const AnalysisReport& report = reference_report();
    const std::string j = report.to_json();
    for (const char* key : {"\"trend\"", "\"scaling\"", "\"dist\"",
                            "\"profitability\"", "\"config_hash\"", "\"eta_star\""})
        CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("emit_series honors the column contracts") {
    const AnalysisReport& report = reference_report();
    auto header_of = [&](FigureId fig) {
        std::ostringstream out;
        emit_series(report, fig, out);
        std::istringstream in(out.str());
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(header_of(FigureId::fig3b) == "# r,dpi_over_mean_abs_dpi");
    CHECK(header_of(FigureId::fig3a) == "# r,dp_over_mean_abs_dp");
    CHECK(header_of(FigureId::fig5) ==
          "# r_bin_center,empirical_fraction,n,levy_prediction,gaussian_prediction");
    CHECK(header_of(FigureId::fig2) == "# r,density,fitted_density");
    CHECK(header_of(FigureId::fig6).find("R0_forecast=24.3") != std::string::npos);
}

TEST_CASE("emit_series output is byte-deterministic") {
    const AnalysisReport& report = reference_report();
    for (FigureId fig : {FigureId::fig1a, FigureId::fig1b, FigureId::fig2,
                         FigureId::fig3a, FigureId::fig3b, FigureId::fig4,
                         FigureId::fig5, FigureId::fig6}) {
        std::ostringstream a, b;
        emit_series(report, fig, a);
        emit_series(report, fig, b);
        CHECK(a.str() == b.str());
        CHECK(!a.str().empty());
    }
}

TEST_CASE("emit_series reports the missing stage by name") {
    AnalysisReport empty;
    std::ostringstream out;
    try {
        emit_series(empty, FigureId::fig5, out);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == Stage::profitability);
    }
    try {
        emit_series(empty, FigureId::fig2, out);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == Stage::dist);
    }
}

TEST_CASE("figure names round-trip") {
    for (FigureId fig : {FigureId::fig1a, FigureId::fig1b, FigureId::fig2,
                         FigureId::fig3a, FigureId::fig3b, FigureId::fig4,
                         FigureId::fig5, FigureId::fig6}) {
        const auto back = figure_from_name(to_string(fig));
        REQUIRE(back.has_value());
        CHECK(*back == fig);
    }
    CHECK_FALSE(figure_from_name("fig7").has_value());
}

TEST_CASE("stage names are stable identifiers") {
    CHECK(std::string(to_string(Stage::config)) == "config");
    CHECK(std::string(to_string(Stage::ingest)) == "ingest");
    CHECK(std::string(to_string(Stage::trend)) == "trend");
    CHECK(std::string(to_string(Stage::scaling)) == "scaling");
    CHECK(std::string(to_string(Stage::dist)) == "dist");
    CHECK(std::string(to_string(Stage::profitability)) == "profitability");
    CHECK(std::string(to_string(Stage::io)) == "io");
}
