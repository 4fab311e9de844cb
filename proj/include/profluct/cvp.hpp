#pragma once

namespace profluct {

/// Cost-volume-profit coefficients of a (typical) company. Only the
/// products and ratios the identities consume are stored; unit prices and
/// unit counts never appear on their own.
struct CvpParams {
    double alpha_beta = 1.0;   // alpha_s * beta_s, > 0
    double gamma_s = 0.0;      // (alpha_beta - 1) / alpha_beta
    double gamma_c = 0.0;      // fixed-cost-to-revenue ratio
    double gamma_g = 0.0;      // gamma_s - gamma_c
    double fixed_cost = 0.0;   // F >= 0

    static CvpParams from_alpha_beta(double alpha_beta, double gamma_c = 0.0,
                                     double fixed_cost = 0.0);
};

/// Margin fraction gamma_s = (ab - 1)/ab. Throws std::domain_error at ab = 0;
/// negative below ab = 1.
double gamma_s_from_product(double alpha_beta);

/// P = gamma_s * R - F.
double profit(double revenue, const CvpParams& params);

/// Lower bounds on (alpha_s*beta_s, gamma_s, gamma_c) implied by a measured
/// mean growth factor gamma_g in (0, 1), via the mean-of-reciprocal
/// approximation <1/(ab)> ~ 1/<ab>. Note: the exact bound 1/(1 - gamma_g)
/// at gamma_g = 0.052 is ~1.0549; quoting it as 1.062 requires rounding
/// gamma_g differently. We always report the recomputed value.
struct CvpBounds {
    double alpha_beta_lower = 1.0;
    double gamma_s_lower = 0.0;
    double gamma_c_lower = 0.0;
};

CvpBounds bound_report(double gamma_g);

}  // namespace profluct
