#include "profluct/profitability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "profluct/quad.hpp"

namespace profluct {

namespace {

// Mass of amp/|x|^q between lo and hi (1 < lo <= hi), q > 1.
double power_tail_mass(double amp, double q, double lo, double hi) {
    if (hi <= lo) return 0.0;
    const double upper = std::isinf(hi) ? 0.0 : std::pow(hi, 1.0 - q);
    return amp / (q - 1.0) * (std::pow(lo, 1.0 - q) - upper);
}

}  // namespace

ProfitabilityModel make_levy_model(const TailFit& fit, double gamma_g,
                                   double mean_abs_dpi, double alpha,
                                   double eps_cut) {
    if (!(alpha > 1.0))
        throw std::domain_error("make_levy_model: alpha must exceed 1");
    const double q = fit.tail_power;
    const double amp_pos_raw = fit.a_pos * std::pow(fit.c_pos, q);
    const double amp_neg_raw = fit.a_neg * std::pow(fit.c_neg, q);

    // Unit mass: numeric body over [-X, X] plus the asymptotic power tails.
    constexpr double body_limit = 200.0;
    const double body = integrate([&fit](double e) { return fit.evaluate(e); },
                                  -body_limit, body_limit, 1e-10);
    const double mass = body +
                        power_tail_mass(amp_pos_raw, q, body_limit,
                                        std::numeric_limits<double>::infinity()) +
                        power_tail_mass(amp_neg_raw, q, body_limit,
                                        std::numeric_limits<double>::infinity());

    ProfitabilityModel model;
    model.gamma_g = gamma_g;
    model.mean_abs_dpi = mean_abs_dpi;
    model.alpha = alpha;
    model.eps_cut = eps_cut;
    model.density = [fit, mass](double e) { return fit.evaluate(e) / mass; };
    model.has_power_tail = true;
    model.tail_power = q;
    model.tail_amp_pos = amp_pos_raw / mass;
    model.tail_amp_neg = amp_neg_raw / mass;
    return model;
}

double eps_be(const ProfitabilityModel& model, double r) {
    if (!(r > 0.0)) throw std::domain_error("eps_be: r must be positive");
    return model.gamma_g / model.mean_abs_dpi * std::pow(r, 1.0 - 1.0 / model.alpha);
}

double p_pf(const ProfitabilityModel& model, double r) {
    const double lower = -eps_be(model, r);
    const double cut = model.eps_cut;

    double prob = 0.0;
    if (lower < cut) {
        const double body_lo = std::max(lower, -cut);
        prob += integrate(model.density, body_lo, cut, model.quad_tol);
        if (lower < -cut) {
            if (model.has_power_tail) {
                prob += power_tail_mass(model.tail_amp_neg, model.tail_power,
                                        cut, -lower);
            } else {
                prob += integrate(model.density, lower, -cut, model.quad_tol);
            }
        }
    } else if (model.has_power_tail) {
        // Entire integration range sits in the positive tail.
        return std::clamp(power_tail_mass(model.tail_amp_pos, model.tail_power,
                                          lower,
                                          std::numeric_limits<double>::infinity()),
                          0.0, 1.0);
    }
    if (model.has_power_tail) {
        prob += power_tail_mass(model.tail_amp_pos, model.tail_power, cut,
                                std::numeric_limits<double>::infinity());
    }
    return std::clamp(prob, 0.0, 1.0);
}

double p_pf_gaussian(double gamma_g, double sigma, double r) {
    if (!(sigma > 0.0)) throw std::domain_error("p_pf_gaussian: sigma <= 0");
    if (!(r > 0.0)) throw std::domain_error("p_pf_gaussian: r <= 0");
    const double threshold = gamma_g * std::sqrt(r) / sigma;
    return 0.5 * std::erfc(-threshold / std::sqrt(2.0));
}

std::vector<ProfitabilityBin> empirical_profitability(const ScaledSeries& scaled,
                                                      std::size_t n_bins,
                                                      std::size_t n_min) {
    if (scaled.entries.empty())
        throw std::invalid_argument("empirical_profitability: empty series");
    double r_lo = std::numeric_limits<double>::infinity();
    double r_hi = 0.0;
    for (const auto& e : scaled.entries) {
        r_lo = std::min(r_lo, e.r);
        r_hi = std::max(r_hi, e.r);
    }
    if (!(r_hi > r_lo)) r_hi = r_lo * (1.0 + 1e-9);

    std::vector<ProfitabilityBin> bins(n_bins);
    const double llo = std::log(r_lo), lhi = std::log(r_hi);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double frac_lo = static_cast<double>(i) / static_cast<double>(n_bins);
        const double frac_hi = static_cast<double>(i + 1) / static_cast<double>(n_bins);
        bins[i].r_lo = std::exp(llo + (lhi - llo) * frac_lo);
        bins[i].r_hi = std::exp(llo + (lhi - llo) * frac_hi);
        bins[i].r_center = std::sqrt(bins[i].r_lo * bins[i].r_hi);
    }
    bins.front().r_lo = r_lo;
    bins.back().r_hi = r_hi;

    std::vector<std::size_t> profitable(n_bins, 0);
    for (const auto& e : scaled.entries) {
        const double t = (std::log(e.r) - llo) / (lhi - llo);
        auto idx = static_cast<std::size_t>(t * static_cast<double>(n_bins));
        idx = std::min(idx, n_bins - 1);
        ++bins[idx].n;
        bins[idx].mean_r += e.r;
        if (e.p > 0.0) ++profitable[idx];
    }
    for (std::size_t i = 0; i < n_bins; ++i) {
        if (bins[i].n > 0) {
            bins[i].fraction = static_cast<double>(profitable[i]) /
                               static_cast<double>(bins[i].n);
            bins[i].mean_r /= static_cast<double>(bins[i].n);
        }
        bins[i].low_count = bins[i].n < n_min;
    }
    return bins;
}

double p_pf_mean(const ProfitabilityModel& model, std::span<const double> rs) {
    if (rs.empty()) throw std::invalid_argument("p_pf_mean: no entries");
    double sum = 0.0;
    for (double r : rs) sum += p_pf(model, r);
    return sum / static_cast<double>(rs.size());
}

AbsolutePrediction predict_absolute(const ProfitabilityModel& model,
                                    double r0_forecast,
                                    std::span<const double> revenue_grid,
                                    double validity_bound) {
    if (!(r0_forecast > 0.0))
        throw std::domain_error("predict_absolute: R0 forecast must be positive");

    AbsolutePrediction pred;
    pred.validity_bound = validity_bound;
    // At R = 0 the threshold vanishes: P_PF is the density mass above 0.
    pred.p_at_zero = integrate(model.density, 0.0, model.eps_cut, model.quad_tol) +
                     (model.has_power_tail
                          ? model.tail_amp_pos / (model.tail_power - 1.0) *
                                std::pow(model.eps_cut, 1.0 - model.tail_power)
                          : 0.0);
    const double r_lin = validity_bound / r0_forecast;
    pred.linear_slope =
        (p_pf(model, r_lin) - pred.p_at_zero) / validity_bound;

    for (double revenue : revenue_grid) {
        pred.revenue.push_back(revenue);
        pred.probability.push_back(revenue <= 0.0
                                       ? pred.p_at_zero
                                       : p_pf(model, revenue / r0_forecast));
        pred.linear_approx.push_back(pred.p_at_zero + pred.linear_slope * revenue);
    }
    return pred;
}

}  // namespace profluct
