#pragma once

// Likelihood-ratio comparison of nested ordered logit fits, with a
// self-contained chi-square tail.

#include "ebike/ordlogit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ebike::inference {

// Regularized upper incomplete gamma Q(a, x); series for x < a + 1, Lentz
// continued fraction otherwise.
double regularized_gamma_q(double a, double x);

double lr_statistic(double ll_restricted, double ll_full);

// P(chi2_df > x). Throws DomainError for df <= 0 or x < 0.
double chi_square_sf(double x, int df);
// Upper-tail critical value: chi_square_sf(q, df) == alpha.
double chi_square_quantile_upper(double alpha, int df);

struct LrTestResult {
    double lr = 0.0;
    int df = 0;
    double p_value = 1.0;
    double alpha = 0.05;
    double critical_value = 0.0;
    bool reject = false;
    std::optional<double> reject_at;  // alpha when rejected
    double ll_restricted = 0.0;
    double ll_full = 0.0;
    std::vector<std::string> warnings;
};

// Restricted covariates must be a strict subset of the full ones, with the
// same n and K. Throws DomainError otherwise.
LrTestResult lr_test(const ordlogit::OrderedLogitFit& restricted, const ordlogit::OrderedLogitFit& full,
                     double alpha = 0.05);

}  // namespace ebike::inference
