#include "ebike/inference.hpp"

#include "ebike/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ebike::inference {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 100000;

// log of the common factor x^a e^-x / Gamma(a)
double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(log_prefactor(a, x));
}

double upper_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(log_prefactor(a, x)) * h;
}

std::vector<std::string> covariates(const ordlogit::OrderedLogitFit& f) {
    const auto p = f.names.size() - static_cast<std::size_t>(f.theta.size());
    return {f.names.begin(), f.names.begin() + static_cast<std::ptrdiff_t>(p)};
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0)) throw DomainError("gamma shape must be positive");
    if (x < 0 || std::isnan(x)) throw DomainError("gamma argument must be non-negative");
    if (x == 0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - lower_series(a, x);
    return upper_fraction(a, x);
}

double lr_statistic(double ll_restricted, double ll_full) { return -2.0 * (ll_restricted - ll_full); }

double chi_square_sf(double x, int df) {
    if (df <= 0) throw DomainError("chi-square degrees of freedom must be positive");
    if (x < 0 || std::isnan(x)) throw DomainError("chi-square statistic must be non-negative");
    return regularized_gamma_q(df / 2.0, x / 2.0);
}

double chi_square_quantile_upper(double alpha, int df) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0, 1)");
    double lo = 0.0, hi = std::max(1.0, static_cast<double>(df));
    while (chi_square_sf(hi, df) > alpha) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (chi_square_sf(mid, df) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

LrTestResult lr_test(const ordlogit::OrderedLogitFit& restricted, const ordlogit::OrderedLogitFit& full,
                     double alpha) {
    if (restricted.n != full.n) {
        throw DomainError("models fitted on different samples (n=" + std::to_string(restricted.n) + " vs " +
                          std::to_string(full.n) + ")");
    }
    if (restricted.categories != full.categories) throw DomainError("models have different outcome categories");
    const auto rc = covariates(restricted);
    const auto fc = covariates(full);
    for (const auto& name : rc) {
        if (std::find(fc.begin(), fc.end(), name) == fc.end()) {
            throw DomainError("models are not nested: " + name + " is absent from the full model");
        }
    }
    if (rc.size() >= fc.size()) throw DomainError("models are not nested: restricted model is not smaller");

    LrTestResult r;
    r.alpha = alpha;
    r.ll_restricted = restricted.ll_model;
    r.ll_full = full.ll_model;
    r.df = full.parameter_count() - restricted.parameter_count();
    r.lr = lr_statistic(restricted.ll_model, full.ll_model);
    r.critical_value = chi_square_quantile_upper(alpha, r.df);
    if (!restricted.converged || !full.converged) r.warnings.push_back("at least one model did not converge");
    if (r.lr < 0) {
        r.warnings.push_back("negative LR statistic: models not nested or not at their optimum");
        r.p_value = 1.0;
        return r;
    }
    r.p_value = chi_square_sf(r.lr, r.df);
    r.reject = r.p_value < alpha;
    if (r.reject) r.reject_at = alpha;
    return r;
}

}  // namespace ebike::inference
