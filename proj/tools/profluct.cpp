// Command-line driver for the profit-fluctuation analysis pipeline.
//
// Subcommands compose the stages: ingest, simulate, trend, scale, eta, pdf,
// profitability, cvp-bounds, and the all-in-one `run`. Each stage can consume
// the serialized output of the previous one, enabling partial reruns.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "profluct/cvp.hpp"
#include "profluct/pipeline.hpp"
#include "profluct/synth.hpp"

namespace fs = std::filesystem;
using namespace profluct;
using nlohmann::json;

namespace {

int exit_code_for(Stage stage) {
    switch (stage) {
        case Stage::config: return 2;
        case Stage::ingest: return 3;
        case Stage::trend: return 4;
        case Stage::scaling: return 5;
        case Stage::dist: return 6;
        case Stage::profitability: return 7;
        case Stage::io: return 8;
    }
    return 1;
}

Panel load_panel(const std::string& path, const IngestConfig& config) {
    std::ifstream in(path);
    if (!in) throw StageError(Stage::io, "cannot open " + path);
    auto [panel, report] = ingest(in, config);
    if (!report.rows.empty())
        std::cerr << "note: " << report.total() << " rows rejected while reading "
                  << path << "\n";
    return panel;
}

std::string output_dir(const RunConfig& config) {
    if (const char* env = std::getenv("PROFLUCT_OUTPUT_DIR")) return env;
    return config.output_dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw StageError(Stage::io, "cannot write " + path.string());
    out << content;
}

TrendFit load_trend(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StageError(Stage::io, "cannot open " + path);
    json j;
    in >> j;
    TrendFit fit;
    fit.amplitude = j.at("amplitude");
    fit.efold_years = j.at("efold_years");
    fit.base_year = j.at("base_year");
    return fit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Profit-fluctuation analysis of company panel data"};
    app.require_subcommand(1);

    std::string config_path, input_path, output_path, trend_path, figure_name;
    RunConfig config;

    auto apply_config = [&]() {
        if (!config_path.empty()) config = RunConfig::from_json_file(config_path);
    };
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--seed", config.seed, "top-level RNG seed");
        cmd->add_option("--output-dir", config.output_dir, "output directory");
    };

    // --- ingest ---
    auto* cmd_ingest = app.add_subcommand("ingest", "validate a raw panel file");
    cmd_ingest->add_option("input", input_path, "raw CSV")->required();
    cmd_ingest->add_option("-o,--output", output_path, "canonical panel CSV");
    add_common(cmd_ingest);
    cmd_ingest->callback([&] {
        apply_config();
        std::ifstream in(input_path);
        if (!in) throw StageError(Stage::io, "cannot open " + input_path);
        auto [panel, report] = ingest(in, config.ingest);
        std::ostringstream csv, meta;
        write_panel_csv(csv, panel);
        write_panel_metadata(meta, panel, report);
        if (output_path.empty()) {
            std::cout << meta.str();
        } else {
            write_file(output_path, csv.str());
            write_file(output_path + ".meta.json", meta.str());
        }
    });

    // --- simulate ---
    GeneratorSpec spec;
    std::string noise = "stable";
    double noise_alpha = 1.7, noise_skew = 0.0;
    auto* cmd_sim = app.add_subcommand("simulate", "generate a synthetic panel");
    cmd_sim->add_option("-o,--output", output_path, "panel CSV path")->required();
    cmd_sim->add_option("--companies", spec.n_companies, "number of companies");
    cmd_sim->add_option("--year-min", spec.year_min, "first year");
    cmd_sim->add_option("--year-max", spec.year_max, "last year");
    cmd_sim->add_option("--gamma-g", spec.gamma_g, "growth factor");
    cmd_sim->add_option("--eta", spec.eta, "fluctuation exponent");
    cmd_sim->add_option("--amplitude", spec.noise_amplitude, "fluctuation amplitude");
    cmd_sim->add_option("--noise", noise, "stable|gaussian");
    cmd_sim->add_option("--alpha", noise_alpha, "stable tail exponent");
    cmd_sim->add_option("--skew", noise_skew, "stable skew");
    cmd_sim->add_option("--survivorship", spec.survivorship_fraction,
                        "lowest-revenue share redrawn per year");
    add_common(cmd_sim);
    cmd_sim->callback([&] {
        apply_config();
        spec.seed = config.seed;
        if (noise == "gaussian")
            spec.noise_law = GaussianNoise{};
        else
            spec.noise_law = StableNoise{noise_alpha, noise_skew};
        auto [panel, truth] = generate_panel(spec);
        std::ostringstream csv;
        write_panel_csv(csv, panel);
        write_file(output_path, csv.str());
        std::ostringstream gt;
        gt << "company,year,r,p,eps\n";
        gt.precision(17);
        for (const auto& row : truth.rows)
            gt << row.company_id << ',' << row.year << ',' << row.r << ',' << row.p
               << ',' << row.eps << '\n';
        write_file(output_path + ".truth.csv", gt.str());
    });

    // --- trend ---
    auto* cmd_trend = app.add_subcommand("trend", "fit yearly-mean growth trends");
    cmd_trend->add_option("input", input_path, "panel CSV")->required();
    cmd_trend->add_option("-o,--output", output_path, "trend JSON");
    add_common(cmd_trend);
    cmd_trend->callback([&] {
        apply_config();
        const Panel panel = load_panel(input_path, config.ingest);
        auto means = yearly_means(panel);
        std::vector<YearValue> r_series;
        for (const auto& m : means) r_series.emplace_back(m.year, m.mean_revenue);
        const TrendFit fit = fit_exponential(r_series, config.base_year);
        json j;
        j["amplitude"] = fit.amplitude;
        j["efold_years"] = fit.efold_years;
        j["base_year"] = fit.base_year;
        j["residual_rms"] = fit.residual_rms;
        if (output_path.empty())
            std::cout << j.dump(2) << "\n";
        else
            write_file(output_path, j.dump(2) + "\n");
    });

    // --- scale ---
    auto* cmd_scale = app.add_subcommand("scale", "emit scaled (r, p) per record");
    cmd_scale->add_option("input", input_path, "panel CSV")->required();
    cmd_scale->add_option("--trend", trend_path, "trend JSON")->required();
    cmd_scale->add_option("-o,--output", output_path, "scaled CSV");
    add_common(cmd_scale);
    cmd_scale->callback([&] {
        apply_config();
        const Panel panel = load_panel(input_path, config.ingest);
        const TrendFit trend = load_trend(trend_path);
        std::ostringstream out;
        out << "company,year,r,p\n";
        out.precision(17);
        for (const auto& e : scale_panel(panel, trend))
            out << e.company_id << ',' << e.year << ',' << e.r << ',' << e.p << '\n';
        if (output_path.empty())
            std::cout << out.str();
        else
            write_file(output_path, out.str());
    });

    // --- cvp-bounds ---
    double gamma_g_arg = 0.052;
    auto* cmd_cvp = app.add_subcommand("cvp-bounds",
                                       "parameter bounds implied by gamma_g");
    cmd_cvp->add_option("--gamma-g", gamma_g_arg, "mean growth factor");
    cmd_cvp->callback([&] {
        const CvpBounds bounds = bound_report(gamma_g_arg);
        std::cout << "gamma_g            " << gamma_g_arg << "\n"
                  << "alpha_beta_lower   " << bounds.alpha_beta_lower << "\n"
                  << "gamma_s_lower      " << bounds.gamma_s_lower << "\n"
                  << "gamma_c_lower      " << bounds.gamma_c_lower << "\n";
    });

    // --- run (and the thin stage wrappers eta/pdf/profitability) ---
    auto run_full = [&](const std::vector<FigureId>& figures, bool with_report) {
        apply_config();
        const Panel panel = load_panel(input_path, config.ingest);
        const AnalysisReport report = run_pipeline(panel, config);
        const fs::path dir = output_dir(config);
        fs::create_directories(dir);
        if (with_report) write_file(dir / "report.json", report.to_json() + "\n");
        for (FigureId fig : figures) {
            std::ostringstream out;
            emit_series(report, fig, out);
            write_file(dir / (std::string(to_string(fig)) + ".csv"), out.str());
        }
        std::cout << "eta_star " << report.eta.eta_star << "\n"
                  << "sigma_eta_star " << report.eta.sigma_eta_star << "\n"
                  << "gamma_g " << report.eta.gamma_g_tuned << "\n"
                  << "mean_abs_dp " << report.scaled.mean_abs_dp << "\n"
                  << "mean_abs_dpi " << report.scaled.mean_abs_dpi << "\n"
                  << "hill_alpha " << 0.5 * (report.hill.alpha_pos + report.hill.alpha_neg)
                  << "\n"
                  << "tail_alpha " << report.tail_fit.alpha << "\n"
                  << "revenue_exponent " << report.revenue_fit.power_exponent << "\n";
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    };

    auto* cmd_eta = app.add_subcommand("eta", "stationarity-exponent search");
    cmd_eta->add_option("input", input_path, "panel CSV")->required();
    add_common(cmd_eta);
    cmd_eta->callback([&] { run_full({FigureId::fig3a, FigureId::fig3b}, false); });

    auto* cmd_pdf = app.add_subcommand("pdf", "revenue and fluctuation PDFs");
    cmd_pdf->add_option("input", input_path, "panel CSV")->required();
    add_common(cmd_pdf);
    cmd_pdf->callback([&] { run_full({FigureId::fig2, FigureId::fig4}, false); });

    auto* cmd_prof = app.add_subcommand("profitability", "break-even prediction");
    cmd_prof->add_option("input", input_path, "panel CSV")->required();
    add_common(cmd_prof);
    cmd_prof->callback([&] { run_full({FigureId::fig5, FigureId::fig6}, false); });

    auto* cmd_run = app.add_subcommand("run", "full pipeline, report plus all figures");
    cmd_run->add_option("input", input_path, "panel CSV")->required();
    cmd_run->add_option("--figure", figure_name, "emit only this figure");
    add_common(cmd_run);
    cmd_run->callback([&] {
        std::vector<FigureId> figures;
        if (figure_name.empty()) {
            figures = {FigureId::fig1a, FigureId::fig1b, FigureId::fig2,
                       FigureId::fig3a, FigureId::fig3b, FigureId::fig4,
                       FigureId::fig5,  FigureId::fig6};
        } else {
            const auto fig = figure_from_name(figure_name);
            if (!fig) throw StageError(Stage::config, "unknown figure " + figure_name);
            figures = {*fig};
        }
        run_full(figures, true);
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.stage);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
