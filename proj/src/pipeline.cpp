#include "profluct/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace profluct {

using nlohmann::json;

const char* to_string(Stage stage) {
    switch (stage) {
        case Stage::config: return "config";
        case Stage::ingest: return "ingest";
        case Stage::trend: return "trend";
        case Stage::scaling: return "scaling";
        case Stage::dist: return "dist";
        case Stage::profitability: return "profitability";
        case Stage::io: return "io";
    }
    return "unknown";
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StageError(Stage::config, "cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw StageError(Stage::config, e.what());
    }
    RunConfig cfg;
    if (j.contains("delimiter")) cfg.ingest.delimiter = j["delimiter"].get<std::string>().at(0);
    if (j.contains("company_column")) cfg.ingest.company_column = j["company_column"];
    if (j.contains("year_column")) cfg.ingest.year_column = j["year_column"];
    if (j.contains("revenue_column")) cfg.ingest.revenue_column = j["revenue_column"];
    if (j.contains("profit_column")) cfg.ingest.profit_column = j["profit_column"];
    if (j.contains("unit_label")) cfg.ingest.unit_label = j["unit_label"];
    if (j.contains("anomalous_years"))
        cfg.anomalous_years = j["anomalous_years"].get<std::set<int>>();
    if (j.contains("detect_anomalous")) cfg.detect_anomalous = j["detect_anomalous"];
    if (j.contains("anomalous_threshold")) cfg.anomalous_threshold = j["anomalous_threshold"];
    if (j.contains("exclude_anomalous_from_r0"))
        cfg.exclude_anomalous_from_r0 = j["exclude_anomalous_from_r0"];
    if (j.contains("proportional_profit_trend"))
        cfg.proportional_profit_trend = j["proportional_profit_trend"];
    if (j.contains("base_year")) cfg.base_year = j["base_year"];
    if (j.contains("gamma_g_init")) cfg.gamma_g_init = j["gamma_g_init"];
    if (j.contains("log_center_r")) cfg.log_center_r = j["log_center_r"];
    if (j.contains("eta_min")) cfg.eta_grid.eta_min = j["eta_min"];
    if (j.contains("eta_max")) cfg.eta_grid.eta_max = j["eta_max"];
    if (j.contains("eta_step")) cfg.eta_grid.step = j["eta_step"];
    if (j.contains("eta_rounds")) cfg.eta_grid.rounds = j["eta_rounds"];
    if (j.contains("r_floor")) cfg.r_floor = j["r_floor"];
    if (j.contains("revenue_pdf_bins")) cfg.revenue_pdf_bins = j["revenue_pdf_bins"];
    if (j.contains("revenue_fit_r_min")) cfg.revenue_fit_r_min = j["revenue_fit_r_min"];
    if (j.contains("fluct_pdf_bins")) cfg.fluct_pdf_bins = j["fluct_pdf_bins"];
    if (j.contains("fluct_pdf_range")) cfg.fluct_pdf_range = j["fluct_pdf_range"];
    if (j.contains("hill_k_fraction")) cfg.hill_k_fraction = j["hill_k_fraction"];
    if (j.contains("eps_cut")) cfg.eps_cut = j["eps_cut"];
    if (j.contains("profitability_bins")) cfg.profitability_bins = j["profitability_bins"];
    if (j.contains("profitability_n_min")) cfg.profitability_n_min = j["profitability_n_min"];
    if (j.contains("r0_forecast")) cfg.r0_forecast = j["r0_forecast"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"];
    return cfg;
}

std::string RunConfig::to_json() const {
    json j;
    j["delimiter"] = std::string(1, ingest.delimiter);
    j["company_column"] = ingest.company_column;
    j["year_column"] = ingest.year_column;
    j["revenue_column"] = ingest.revenue_column;
    j["profit_column"] = ingest.profit_column;
    j["unit_label"] = ingest.unit_label;
    j["anomalous_years"] = anomalous_years;
    j["detect_anomalous"] = detect_anomalous;
    j["anomalous_threshold"] = anomalous_threshold;
    j["exclude_anomalous_from_r0"] = exclude_anomalous_from_r0;
    j["proportional_profit_trend"] = proportional_profit_trend;
    j["base_year"] = base_year;
    j["gamma_g_init"] = gamma_g_init;
    j["log_center_r"] = log_center_r;
    j["eta_min"] = eta_grid.eta_min;
    j["eta_max"] = eta_grid.eta_max;
    j["eta_step"] = eta_grid.step;
    j["eta_rounds"] = eta_grid.rounds;
    j["r_floor"] = r_floor;
    j["revenue_pdf_bins"] = revenue_pdf_bins;
    j["revenue_fit_r_min"] = revenue_fit_r_min;
    j["fluct_pdf_bins"] = fluct_pdf_bins;
    j["fluct_pdf_range"] = fluct_pdf_range;
    j["hill_k_fraction"] = hill_k_fraction;
    j["eps_cut"] = eps_cut;
    j["profitability_bins"] = profitability_bins;
    j["profitability_n_min"] = profitability_n_min;
    j["r0_forecast"] = r0_forecast;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["rng_version"] = kRngVersion;
    return j.dump(2);
}

std::uint64_t RunConfig::hash() const {
    const std::string dump = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

AnalysisReport run_pipeline(const Panel& panel, const RunConfig& config) {
    AnalysisReport report;
    report.config = config;
    report.config_hash = config.hash();

    if (panel.records.empty()) throw StageError(Stage::ingest, "empty panel");

    // Yearly means and trend fits.
    try {
        report.means = yearly_means(panel);
        std::vector<YearValue> r_series, p_series;
        std::vector<std::pair<double, double>> rp;
        std::vector<int> years;
        for (const auto& m : report.means) {
            r_series.emplace_back(m.year, m.mean_revenue);
            p_series.emplace_back(m.year, m.mean_profit);
            rp.emplace_back(m.mean_revenue, m.mean_profit);
            years.push_back(m.year);
        }

        if (config.detect_anomalous && config.anomalous_years.empty()) {
            report.anomalous_years =
                flag_anomalous(p_series, config.base_year, config.anomalous_threshold);
        } else {
            report.anomalous_years = config.anomalous_years;
        }

        const std::set<int> r0_excluded =
            config.exclude_anomalous_from_r0 ? report.anomalous_years : std::set<int>{};
        report.revenue_trend = fit_exponential(r_series, config.base_year, r0_excluded);

        TrendFit free_fit =
            fit_exponential(p_series, config.base_year, report.anomalous_years);
        if (config.proportional_profit_trend) {
            report.profit_trend =
                fit_exponential_fixed_b(p_series, config.base_year,
                                        report.revenue_trend.efold_years,
                                        report.anomalous_years);
            report.profit_trend_free = free_fit;
        } else {
            report.profit_trend = free_fit;
        }
        report.proportionality = fit_proportionality(rp, years, report.anomalous_years);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(Stage::trend, e.what());
    }

    // Scaling and the eta search.
    try {
        auto scaled_rp = scale_panel(panel, report.revenue_trend);
        if (config.log_center_r && !scaled_rp.empty()) {
            double sum_log = 0.0;
            for (const auto& e : scaled_rp) sum_log += std::log(e.r);
            const double gm = std::exp(sum_log / static_cast<double>(scaled_rp.size()));
            for (auto& e : scaled_rp) {
                e.r /= gm;
                e.p /= gm;
            }
            report.log_center_factor = gm;
        }
        report.eta = eta_search(scaled_rp, config.gamma_g_init, config.eta_grid,
                                config.r_floor);
        report.scaled = fluctuations(std::move(scaled_rp), report.eta.gamma_g_tuned,
                                     report.eta.eta_star, config.r_floor);
        if (report.eta.multiple_minima)
            report.warnings.push_back("eta grid minimum is not unique within tolerance");
    } catch (const std::exception& e) {
        throw StageError(Stage::scaling, e.what());
    }

    // PDFs, tail fits, Hill cross-check.
    try {
        std::vector<double> r_samples, eps_samples;
        for (const auto& e : report.scaled.entries) {
            r_samples.push_back(e.r);
            if (e.r >= config.r_floor)
                eps_samples.push_back(e.dpi / report.scaled.mean_abs_dpi);
        }
        report.revenue_pdf =
            empirical_pdf(r_samples, Binning::log, config.revenue_pdf_bins);
        report.revenue_fit = fit_revenue_pdf(report.revenue_pdf, config.revenue_fit_r_min);

        report.fluct_pdf = empirical_pdf(eps_samples, Binning::linear,
                                         config.fluct_pdf_bins,
                                         -config.fluct_pdf_range, config.fluct_pdf_range);
        try {
            report.tail_fit = fit_fluctuation_pdf(report.fluct_pdf, config.tail_fit);
        } catch (const TailFitError& e) {
            report.tail_fit = e.best;
            report.warnings.push_back("fluctuation pdf fit did not converge");
        }
        report.hill = hill_tail_exponent(eps_samples, config.hill_k_fraction);
        if (!report.hill.plateau_pos || !report.hill.plateau_neg)
            report.warnings.push_back("hill estimate lacks a stable plateau");
    } catch (const std::exception& e) {
        throw StageError(Stage::dist, e.what());
    }

    // Profitability model. The break-even exponent uses alpha = 1/eta (the
    // eta = 1/alpha aggregation relation read in reverse) so eps_be is
    // consistent with how dpi was actually rescaled; the Hill and tail-fit
    // alphas are reported alongside.
    try {
        const double eta_star = report.eta.eta_star;
        if (!(eta_star > 0.0 && eta_star < 1.0)) {
            report.warnings.push_back("eta outside (0,1); profitability model skipped");
        } else {
            report.model = make_levy_model(report.tail_fit, report.eta.gamma_g_tuned,
                                           report.scaled.mean_abs_dpi,
                                           1.0 / eta_star, config.eps_cut);
            report.profitability_bins = empirical_profitability(
                report.scaled, config.profitability_bins, config.profitability_n_min);
        }
        // Gaussian baseline sigma: std of dpi on the eta = 1/2 track.
        double ss = 0.0, s = 0.0;
        std::size_t n = 0;
        for (const auto& e : report.scaled.entries) {
            if (e.r < config.r_floor) continue;
            const double dpi_half = (e.p - report.eta.gamma_g_tuned * e.r) / std::sqrt(e.r);
            s += dpi_half;
            ss += dpi_half * dpi_half;
            ++n;
        }
        if (n > 1) {
            const auto dn = static_cast<double>(n);
            report.gaussian_sigma = std::sqrt((ss - s * s / dn) / (dn - 1.0));
        }
    } catch (const std::exception& e) {
        throw StageError(Stage::profitability, e.what());
    }

    return report;
}

std::string AnalysisReport::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    j["config"] = json::parse(config.to_json());
    j["warnings"] = warnings;

    json trend_stage;
    trend_stage["revenue_amplitude"] = revenue_trend.amplitude;
    trend_stage["revenue_efold_years"] = revenue_trend.efold_years;
    trend_stage["profit_amplitude"] = profit_trend.amplitude;
    trend_stage["profit_efold_years"] = profit_trend.efold_years;
    if (profit_trend_free) {
        trend_stage["profit_amplitude_free"] = profit_trend_free->amplitude;
        trend_stage["profit_efold_years_free"] = profit_trend_free->efold_years;
    }
    trend_stage["proportionality_slope"] = proportionality.slope;
    trend_stage["proportionality_intercept"] = proportionality.intercept;
    trend_stage["proportionality_r_squared"] = proportionality.r_squared;
    trend_stage["origin_slope"] = proportionality.origin_slope;
    trend_stage["anomalous_years"] = anomalous_years;
    j["trend"] = trend_stage;

    json scaling_stage;
    scaling_stage["eta_star"] = eta.eta_star;
    scaling_stage["sigma_eta_star"] = eta.sigma_eta_star;
    scaling_stage["gamma_g_tuned"] = eta.gamma_g_tuned;
    scaling_stage["multiple_minima"] = eta.multiple_minima;
    scaling_stage["rounds_used"] = eta.rounds_used;
    scaling_stage["mean_abs_dp"] = scaled.mean_abs_dp;
    scaling_stage["mean_abs_dpi"] = scaled.mean_abs_dpi;
    scaling_stage["excluded_small_r"] = scaled.excluded_small_r;
    scaling_stage["log_center_factor"] = log_center_factor;
    j["scaling"] = scaling_stage;

    json dist_stage;
    dist_stage["revenue_prefactor"] = revenue_fit.prefactor;
    dist_stage["revenue_power_exponent"] = revenue_fit.power_exponent;
    dist_stage["revenue_cutoff_scale"] = revenue_fit.cutoff_scale;
    dist_stage["revenue_power_only_exponent"] = revenue_fit.power_only_exponent;
    dist_stage["revenue_cutoff_beyond_range"] = revenue_fit.cutoff_beyond_range;
    dist_stage["tail_a_neg"] = tail_fit.a_neg;
    dist_stage["tail_b_neg"] = tail_fit.b_neg;
    dist_stage["tail_c_neg"] = tail_fit.c_neg;
    dist_stage["tail_a_pos"] = tail_fit.a_pos;
    dist_stage["tail_c_pos"] = tail_fit.c_pos;
    dist_stage["tail_power"] = tail_fit.tail_power;
    dist_stage["tail_alpha"] = tail_fit.alpha;
    dist_stage["levy_like"] = tail_fit.levy_like;
    dist_stage["hill_alpha_pos"] = hill.alpha_pos;
    dist_stage["hill_alpha_neg"] = hill.alpha_neg;
    dist_stage["hill_plateau_pos"] = hill.plateau_pos;
    dist_stage["hill_plateau_neg"] = hill.plateau_neg;
    j["dist"] = dist_stage;

    json prof_stage;
    prof_stage["model_alpha"] = model.alpha;
    prof_stage["gamma_g"] = model.gamma_g;
    prof_stage["mean_abs_dpi"] = model.mean_abs_dpi;
    prof_stage["eps_cut"] = model.eps_cut;
    prof_stage["gaussian_sigma"] = gaussian_sigma;
    j["profitability"] = prof_stage;
    return j.dump(2);
}

std::optional<FigureId> figure_from_name(const std::string& name) {
    if (name == "fig1a") return FigureId::fig1a;
    if (name == "fig1b") return FigureId::fig1b;
    if (name == "fig2") return FigureId::fig2;
    if (name == "fig3a") return FigureId::fig3a;
    if (name == "fig3b") return FigureId::fig3b;
    if (name == "fig4") return FigureId::fig4;
    if (name == "fig5") return FigureId::fig5;
    if (name == "fig6") return FigureId::fig6;
    return std::nullopt;
}

const char* to_string(FigureId id) {
    switch (id) {
        case FigureId::fig1a: return "fig1a";
        case FigureId::fig1b: return "fig1b";
        case FigureId::fig2: return "fig2";
        case FigureId::fig3a: return "fig3a";
        case FigureId::fig3b: return "fig3b";
        case FigureId::fig4: return "fig4";
        case FigureId::fig5: return "fig5";
        case FigureId::fig6: return "fig6";
    }
    return "unknown";
}

void emit_series(const AnalysisReport& report, FigureId figure, std::ostream& out) {
    out.precision(12);
    switch (figure) {
        case FigureId::fig1a: {
            if (report.means.empty())
                throw StageError(Stage::trend, "fig1a requires the trend stage");
            out << "# year,R0[" << report.config.ingest.unit_label << "],P0["
                << report.config.ingest.unit_label
                << "],R0_fit,P0_fit,R0_log_residual,P0_log_residual\n";
            for (const auto& m : report.means) {
                const double r_fit = report.revenue_trend.value_at(m.year);
                const double p_fit = report.profit_trend.value_at(m.year);
                out << m.year << ',' << m.mean_revenue << ',' << m.mean_profit << ','
                    << r_fit << ',' << p_fit << ','
                    << std::log(m.mean_revenue / r_fit) << ','
                    << (m.mean_profit > 0.0 ? std::log(m.mean_profit / p_fit) : 0.0)
                    << '\n';
            }
            break;
        }
        case FigureId::fig1b: {
            if (report.means.empty())
                throw StageError(Stage::trend, "fig1b requires the trend stage");
            out << "# R0,P0,P0_linear,anomalous\n";
            for (const auto& m : report.means) {
                out << m.mean_revenue << ',' << m.mean_profit << ','
                    << report.proportionality.origin_slope * m.mean_revenue << ','
                    << (report.anomalous_years.count(m.year) ? 1 : 0) << '\n';
            }
            break;
        }
        case FigureId::fig2: {
            if (report.revenue_pdf.n_bins() == 0)
                throw StageError(Stage::dist, "fig2 requires the dist stage");
            out << "# r,density,fitted_density\n";
            const auto& fit = report.revenue_fit;
            for (std::size_t i = 0; i < report.revenue_pdf.n_bins(); ++i) {
                const double c = report.revenue_pdf.center(i);
                const double fitted =
                    fit.prefactor * std::pow(c, -fit.power_exponent) *
                    (fit.cutoff_beyond_range ? 1.0 : std::exp(-c / fit.cutoff_scale));
                out << c << ',' << report.revenue_pdf.densities[i] << ',' << fitted
                    << '\n';
            }
            break;
        }
        case FigureId::fig3a:
        case FigureId::fig3b: {
            if (report.scaled.entries.empty())
                throw StageError(Stage::scaling, "fig3 requires the scaling stage");
            const bool renormalized = figure == FigureId::fig3b;
            out << (renormalized ? "# r,dpi_over_mean_abs_dpi\n"
                                 : "# r,dp_over_mean_abs_dp\n");
            for (const auto& e : report.scaled.entries) {
                const double y = renormalized ? e.dpi / report.scaled.mean_abs_dpi
                                              : e.dp / report.scaled.mean_abs_dp;
                out << e.r << ',' << y << '\n';
            }
            break;
        }
        case FigureId::fig4: {
            if (report.fluct_pdf.n_bins() == 0)
                throw StageError(Stage::dist, "fig4 requires the dist stage");
            out << "# eps,density,fitted_density,gaussian_overlay\n";
            // Gaussian with the same mean |eps| = 1 for the dashed overlay.
            const double overlay_sigma = std::sqrt(M_PI / 2.0);
            for (std::size_t i = 0; i < report.fluct_pdf.n_bins(); ++i) {
                const double c = report.fluct_pdf.center(i);
                const double gauss =
                    std::exp(-0.5 * c * c / (overlay_sigma * overlay_sigma)) /
                    (overlay_sigma * std::sqrt(2.0 * M_PI));
                out << c << ',' << report.fluct_pdf.densities[i] << ','
                    << report.tail_fit.evaluate(c) << ',' << gauss << '\n';
            }
            break;
        }
        case FigureId::fig5: {
            if (report.profitability_bins.empty())
                throw StageError(Stage::profitability,
                                 "fig5 requires the profitability stage");
            out << "# r_bin_center,empirical_fraction,n,levy_prediction,"
                   "gaussian_prediction\n";
            for (const auto& bin : report.profitability_bins) {
                if (bin.n == 0) continue;
                out << bin.r_center << ',' << bin.fraction << ',' << bin.n << ','
                    << p_pf(report.model, bin.r_center) << ','
                    << p_pf_gaussian(report.model.gamma_g, report.gaussian_sigma,
                                     bin.r_center)
                    << '\n';
            }
            break;
        }
        case FigureId::fig6: {
            if (!report.model.density)
                throw StageError(Stage::profitability,
                                 "fig6 requires the profitability stage");
            std::vector<double> grid;
            for (double rev = 0.05; rev <= 100.0 + 1e-9; rev *= 1.1)
                grid.push_back(rev);
            const auto pred =
                predict_absolute(report.model, report.config.r0_forecast, grid);
            out << "# R_absolute[" << report.config.ingest.unit_label
                << "],p_pf,linear_approx (R0_forecast=" << report.config.r0_forecast
                << ")\n";
            for (std::size_t i = 0; i < pred.revenue.size(); ++i)
                out << pred.revenue[i] << ',' << pred.probability[i] << ','
                    << pred.linear_approx[i] << '\n';
            break;
        }
    }
}

}  // namespace profluct
