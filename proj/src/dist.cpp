#include "profluct/dist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace profluct {

double EmpiricalPdf::center(std::size_t i) const {
    if (binning == Binning::log)
        return std::sqrt(bin_edges[i] * bin_edges[i + 1]);
    return 0.5 * (bin_edges[i] + bin_edges[i + 1]);
}

namespace {

EmpiricalPdf build_histogram(std::span<const double> samples, Binning binning,
                             std::size_t n_bins, double lo, double hi) {
    if (binning == Binning::log && lo <= 0.0)
        throw std::domain_error("empirical_pdf: log binning needs positive range");
    if (!(hi > lo)) {
        // Degenerate sample set: a single repeated value. Give it one thin bin.
        const double pad = std::max(std::abs(lo) * 1e-9, 1e-12);
        lo -= pad;
        hi += pad;
        n_bins = 1;
    }

    EmpiricalPdf pdf;
    pdf.binning = binning;
    pdf.bin_edges.resize(n_bins + 1);
    if (binning == Binning::log) {
        const double llo = std::log(lo), lhi = std::log(hi);
        for (std::size_t i = 0; i <= n_bins; ++i)
            pdf.bin_edges[i] =
                std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                   static_cast<double>(n_bins));
        pdf.bin_edges.front() = lo;
        pdf.bin_edges.back() = hi;
    } else {
        for (std::size_t i = 0; i <= n_bins; ++i)
            pdf.bin_edges[i] = lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(n_bins);
    }

    pdf.counts.assign(n_bins, 0);
    std::size_t in_range = 0;
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        auto it = std::upper_bound(pdf.bin_edges.begin(), pdf.bin_edges.end(), x);
        std::size_t idx = static_cast<std::size_t>(it - pdf.bin_edges.begin());
        idx = idx == 0 ? 0 : std::min(idx - 1, n_bins - 1);
        ++pdf.counts[idx];
        ++in_range;
    }
    if (in_range == 0) throw std::invalid_argument("empirical_pdf: no samples in range");

    pdf.densities.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        pdf.densities[i] = static_cast<double>(pdf.counts[i]) /
                           (static_cast<double>(in_range) * pdf.width(i));
    return pdf;
}

}  // namespace

EmpiricalPdf empirical_pdf(std::span<const double> samples, Binning binning,
                           std::size_t n_bins) {
    if (samples.empty()) throw std::invalid_argument("empirical_pdf: no samples");
    auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    if (binning == Binning::log && *lo_it <= 0.0)
        throw std::domain_error("empirical_pdf: nonpositive sample with log binning");
    return build_histogram(samples, binning, n_bins, *lo_it, *hi_it);
}

EmpiricalPdf empirical_pdf(std::span<const double> samples, Binning binning,
                           std::size_t n_bins, double lo, double hi) {
    if (samples.empty()) throw std::invalid_argument("empirical_pdf: no samples");
    return build_histogram(samples, binning, n_bins, lo, hi);
}

RevenuePdfFit fit_revenue_pdf(const EmpiricalPdf& pdf, double r_min,
                              double power_window_lo, double power_window_hi) {
    // log density = c0 - k*log r - r*c2, linear in (c0, k, c2 = 1/cutoff).
    std::vector<double> lr, r, ld;
    for (std::size_t i = 0; i < pdf.n_bins(); ++i) {
        const double c = pdf.center(i);
        if (pdf.counts[i] == 0 || c <= r_min) continue;
        lr.push_back(std::log(c));
        r.push_back(c);
        ld.push_back(std::log(pdf.densities[i]));
    }
    if (lr.size() < 4) throw std::runtime_error("fit_revenue_pdf: insufficient_data");

    // Normal equations for the 3-parameter design [1, -log r, -r].
    std::array<std::array<double, 3>, 3> ata{};
    std::array<double, 3> atb{};
    for (std::size_t i = 0; i < lr.size(); ++i) {
        const std::array<double, 3> row{1.0, -lr[i], -r[i]};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) ata[a][b] += row[a] * row[b];
            atb[a] += row[a] * ld[i];
        }
    }
    // Gaussian elimination with partial pivoting.
    std::array<double, 3> x{};
    {
        auto m = ata;
        auto v = atb;
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int row = col + 1; row < 3; ++row)
                if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
            std::swap(m[col], m[piv]);
            std::swap(v[col], v[piv]);
            for (int row = col + 1; row < 3; ++row) {
                const double f = m[row][col] / m[col][col];
                for (int k = col; k < 3; ++k) m[row][k] -= f * m[col][k];
                v[row] -= f * v[col];
            }
        }
        for (int row = 2; row >= 0; --row) {
            double s = v[row];
            for (int k = row + 1; k < 3; ++k) s -= m[row][k] * x[k];
            x[row] = s / m[row][row];
        }
    }

    RevenuePdfFit fit;
    fit.prefactor = std::exp(x[0]);
    fit.power_exponent = x[1];
    fit.fit_range_min = r_min;
    const double range_max = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
    if (x[2] <= 0.0 || 1.0 / x[2] > range_max) {
        fit.cutoff_beyond_range = true;
        fit.cutoff_scale = x[2] > 0.0 ? 1.0 / x[2]
                                      : std::numeric_limits<double>::infinity();
    } else {
        fit.cutoff_scale = 1.0 / x[2];
    }

    // Pure-power sub-range fit over the intermediate window.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t nw = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        if (r[i] < power_window_lo || r[i] > power_window_hi) continue;
        sx += lr[i];
        sy += ld[i];
        sxx += lr[i] * lr[i];
        sxy += lr[i] * ld[i];
        ++nw;
    }
    fit.power_window_lo = power_window_lo;
    fit.power_window_hi = power_window_hi;
    if (nw >= 2) {
        const auto n = static_cast<double>(nw);
        fit.power_only_exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else {
        fit.power_only_exponent = fit.power_exponent;
    }
    return fit;
}

double TailFit::evaluate(double eps) const {
    if (eps <= 0.0)
        return a_neg / (1.0 + std::abs(eps / b_neg) +
                        std::pow(std::abs(eps / c_neg), tail_power));
    return a_pos / (1.0 + std::pow(eps / c_pos, tail_power));
}

namespace {

// Minimal deterministic Nelder-Mead with reflection/expansion/contraction.
struct NelderMead {
    std::function<double(const std::vector<double>&)> objective;
    int max_iterations = 20000;
    double f_tol = 1e-13;

    std::pair<std::vector<double>, double> minimize(std::vector<double> start,
                                                    double scale, bool& converged) const {
        const std::size_t n = start.size();
        std::vector<std::vector<double>> simplex(n + 1, start);
        std::vector<double> fvals(n + 1);
        for (std::size_t i = 0; i < n; ++i)
            simplex[i + 1][i] += scale * std::max(std::abs(start[i]), 0.1);
        for (std::size_t i = 0; i <= n; ++i) fvals[i] = objective(simplex[i]);

        converged = false;
        for (int iter = 0; iter < max_iterations; ++iter) {
            std::vector<std::size_t> order(n + 1);
            std::iota(order.begin(), order.end(), 0u);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
            const std::size_t best = order[0], worst = order[n], second = order[n - 1];
            if (std::abs(fvals[worst] - fvals[best]) <=
                f_tol * (std::abs(fvals[best]) + f_tol)) {
                converged = true;
                return {simplex[best], fvals[best]};
            }
            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == worst) continue;
                for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d];
            }
            for (auto& c : centroid) c /= static_cast<double>(n);

            auto blend = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t d = 0; d < n; ++d)
                    p[d] = centroid[d] + t * (simplex[worst][d] - centroid[d]);
                return p;
            };
            const auto reflected = blend(-1.0);
            const double fr = objective(reflected);
            if (fr < fvals[order[0]]) {
                const auto expanded = blend(-2.0);
                const double fe = objective(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    fvals[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    fvals[worst] = fr;
                }
            } else if (fr < fvals[second]) {
                simplex[worst] = reflected;
                fvals[worst] = fr;
            } else {
                const auto contracted = blend(fr < fvals[worst] ? -0.5 : 0.5);
                const double fc = objective(contracted);
                if (fc < std::min(fr, fvals[worst])) {
                    simplex[worst] = contracted;
                    fvals[worst] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == best) continue;
                        for (std::size_t d = 0; d < n; ++d)
                            simplex[i][d] =
                                0.5 * (simplex[i][d] + simplex[best][d]);
                        fvals[i] = objective(simplex[i]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i <= n; ++i)
            if (fvals[i] < fvals[best]) best = i;
        return {simplex[best], fvals[best]};
    }
};

}  // namespace

TailFit fit_fluctuation_pdf(const EmpiricalPdf& pdf, const TailFitConfig& config) {
    std::vector<double> x, ld, w;
    bool has_neg = false, has_pos = false;
    for (std::size_t i = 0; i < pdf.n_bins(); ++i) {
        if (pdf.counts[i] == 0) continue;
        const double c = pdf.center(i);
        has_neg = has_neg || c < 0.0;
        has_pos = has_pos || c > 0.0;
        x.push_back(c);
        ld.push_back(std::log(pdf.densities[i]));
        w.push_back(config.count_weighted ? static_cast<double>(pdf.counts[i]) : 1.0);
    }
    if (!has_neg || !has_pos)
        throw std::domain_error("fit_fluctuation_pdf: pdf must span both signs");

    // Parameters are log-transformed so positivity is structural; q is kept
    // inside its box by clamping inside the objective.
    auto unpack = [&](const std::vector<double>& th, TailFit& fit) {
        fit.a_neg = std::exp(th[0]);
        fit.b_neg = std::exp(th[1]);
        fit.c_neg = std::exp(th[2]);
        fit.a_pos = std::exp(th[3]);
        fit.c_pos = std::exp(th[4]);
        fit.tail_power = std::clamp(th[5], config.q_min, config.q_max);
    };
    auto objective = [&](const std::vector<double>& th) {
        TailFit fit;
        unpack(th, fit);
        double penalty = 0.0;
        if (th[5] < config.q_min) penalty = 1e3 * (config.q_min - th[5]);
        if (th[5] > config.q_max) penalty = 1e3 * (th[5] - config.q_max);
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double res = std::log(fit.evaluate(x[i])) - ld[i];
            ss += w[i] * res * res;
        }
        return ss + penalty;
    };

    NelderMead nm{objective, config.max_iterations, config.f_tol};
    std::vector<double> best_theta;
    double best_f = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (double q0 : {2.0, 2.7, 4.0, 6.0}) {
        std::vector<double> start = {std::log(0.5), std::log(0.6), std::log(0.9),
                                     std::log(0.5), std::log(0.75), q0};
        bool conv = false;
        auto [theta, f] = nm.minimize(std::move(start), 0.5, conv);
        if (f < best_f) {
            best_f = f;
            best_theta = theta;
            any_converged = conv;
        }
    }

    TailFit fit;
    unpack(best_theta, fit);
    fit.alpha = fit.tail_power - 1.0;
    fit.levy_like = fit.alpha > 0.0 && fit.alpha < 2.0 &&
                    fit.tail_power < config.q_max - 1e-6;
    fit.converged = any_converged;
    fit.rss = best_f;
    if (!any_converged) throw TailFitError(fit);
    return fit;
}

namespace {

double hill_at_k(const std::vector<double>& sorted_desc, std::size_t k) {
    // sorted_desc: absolute tail samples, descending. k < size.
    double mean_log = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean_log += std::log(sorted_desc[i]);
    mean_log /= static_cast<double>(k);
    return 1.0 / (mean_log - std::log(sorted_desc[k]));
}

}  // namespace

HillResult hill_tail_exponent(std::span<const double> samples, double k_fraction,
                              double plateau_rel_tol) {
    if (!(k_fraction > 0.0 && k_fraction <= 0.2))
        throw std::invalid_argument("hill_tail_exponent: k_fraction outside (0, 0.2]");
    std::vector<double> pos, neg;
    for (double x : samples) {
        if (x > 0.0) pos.push_back(x);
        if (x < 0.0) neg.push_back(-x);
    }
    if (pos.size() < 50 || neg.size() < 50)
        throw std::runtime_error("hill_tail_exponent: insufficient_data");

    HillResult result;
    auto estimate = [&](std::vector<double>& tail, double& alpha, bool& plateau) {
        std::sort(tail.begin(), tail.end(), std::greater<>());
        const std::size_t k = std::max<std::size_t>(
            10, static_cast<std::size_t>(k_fraction * static_cast<double>(tail.size())));
        alpha = hill_at_k(tail, std::min(k, tail.size() - 1));
        const double half = hill_at_k(tail, std::min(std::max<std::size_t>(5, k / 2),
                                                     tail.size() - 1));
        plateau = std::abs(half - alpha) <= plateau_rel_tol * alpha;
    };
    estimate(pos, result.alpha_pos, result.plateau_pos);
    estimate(neg, result.alpha_neg, result.plateau_neg);
    return result;
}

}  // namespace profluct
