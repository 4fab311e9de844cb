#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "profluct/dist.hpp"
#include "profluct/panel.hpp"
#include "profluct/profitability.hpp"
#include "profluct/scaling.hpp"
#include "profluct/synth.hpp"
#include "profluct/trend.hpp"

namespace profluct {

enum class Stage { config, ingest, trend, scaling, dist, profitability, io };
const char* to_string(Stage stage);

/// Thrown by run_pipeline; names the failing stage for exit-code mapping.
struct StageError : std::runtime_error {
    Stage stage;
    StageError(Stage s, const std::string& what)
        : std::runtime_error(std::string(to_string(s)) + ": " + what), stage(s) {}
};

struct RunConfig {
    IngestConfig ingest;
    std::set<int> anomalous_years = {1991, 1992, 1993, 2001, 2002};
    bool detect_anomalous = false;       // manual list wins when both are present
    double anomalous_threshold = 2.5;
    bool exclude_anomalous_from_r0 = false;
    bool proportional_profit_trend = true;  // refit P0 amplitude with B pinned to R0's
    int base_year = 1954;

    double gamma_g_init = 0.056;  // scatter-regression slope
    // Rescale (r, p) by the sample geometric mean of r before the eta search.
    // The fitted trend amplitude tracks the arithmetic mean of the cohort, so
    // raw scaled revenue is not centered around the typical (geometric-mean)
    // company; the multiplicative fluctuation decomposition is only
    // scale-free once mean(ln r) = 0.
    bool log_center_r = true;
    EtaGridSpec eta_grid;
    double r_floor = kDefaultRFloor;

    std::size_t revenue_pdf_bins = 50;
    double revenue_fit_r_min = 0.2;
    std::size_t fluct_pdf_bins = 60;
    double fluct_pdf_range = 12.0;  // linear bins on [-range, range]
    double hill_k_fraction = 0.005;
    TailFitConfig tail_fit;

    double eps_cut = 10.0;
    std::size_t profitability_bins = 20;
    std::size_t profitability_n_min = 10;
    double r0_forecast = 24.3;

    std::uint64_t seed = 0;
    std::string output_dir = ".";

    static RunConfig from_json_file(const std::string& path);
    std::string to_json() const;
    std::uint64_t hash() const;  // FNV-1a over the canonical JSON dump
};

struct AnalysisReport {
    RunConfig config;
    std::uint64_t config_hash = 0;

    std::vector<YearlyMean> means;
    TrendFit revenue_trend;
    TrendFit profit_trend;
    std::optional<TrendFit> profit_trend_free;  // unconstrained B, when it differs
    ProportionalityFit proportionality;
    std::set<int> anomalous_years;

    ScaledSeries scaled;
    double log_center_factor = 1.0;  // geometric mean divided out of (r, p)
    EtaSearchResult eta;

    EmpiricalPdf revenue_pdf;
    RevenuePdfFit revenue_fit;
    EmpiricalPdf fluct_pdf;
    TailFit tail_fit;
    HillResult hill;

    ProfitabilityModel model;       // alpha = 1/eta_star (the eta = 1/alpha relation)
    double gaussian_sigma = 0.0;    // std of dpi on the eta = 1/2 track
    std::vector<ProfitabilityBin> profitability_bins;

    std::vector<std::string> warnings;

    /// Fitted parameters with stage provenance, as JSON.
    std::string to_json() const;
};

/// ingest -> yearly means -> trend fits -> scaling -> eta search -> PDFs ->
/// tail fits -> profitability model. Throws StageError with the failing stage.
AnalysisReport run_pipeline(const Panel& panel, const RunConfig& config);

enum class FigureId { fig1a, fig1b, fig2, fig3a, fig3b, fig4, fig5, fig6 };
std::optional<FigureId> figure_from_name(const std::string& name);
const char* to_string(FigureId id);

/// Plot-ready series for one figure: comma-separated columns under a
/// '#'-prefixed header naming each column. Byte-deterministic for a fixed
/// report.
void emit_series(const AnalysisReport& report, FigureId figure, std::ostream& out);

}  // namespace profluct
