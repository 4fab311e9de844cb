#include "profluct/cvp.hpp"

#include <stdexcept>

namespace profluct {

double gamma_s_from_product(double alpha_beta) {
    if (alpha_beta == 0.0)
        throw std::domain_error("gamma_s_from_product: alpha_beta = 0");
    return (alpha_beta - 1.0) / alpha_beta;
}

CvpParams CvpParams::from_alpha_beta(double alpha_beta, double gamma_c,
                                     double fixed_cost) {
    CvpParams params;
    params.alpha_beta = alpha_beta;
    params.gamma_s = gamma_s_from_product(alpha_beta);
    params.gamma_c = gamma_c;
    params.gamma_g = params.gamma_s - gamma_c;
    params.fixed_cost = fixed_cost;
    return params;
}

double profit(double revenue, const CvpParams& params) {
    if (revenue < 0.0) throw std::domain_error("profit: negative revenue");
    return params.gamma_s * revenue - params.fixed_cost;
}

CvpBounds bound_report(double gamma_g) {
    if (!(gamma_g > 0.0 && gamma_g < 1.0))
        throw std::domain_error("bound_report: gamma_g outside (0,1)");
    CvpBounds bounds;
    bounds.alpha_beta_lower = 1.0 / (1.0 - gamma_g);
    bounds.gamma_s_lower = gamma_s_from_product(bounds.alpha_beta_lower);
    bounds.gamma_c_lower = bounds.gamma_s_lower - gamma_g;
    return bounds;
}

}  // namespace profluct
