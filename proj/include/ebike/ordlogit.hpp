#pragma once

// Proportional-odds ordered logit:  logit P(Y <= j | x) = theta_j - x.beta
//
// Parameter vectors are laid out as [beta (p), theta (K-1)].

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ebike::ordlogit {

struct ModelData {
    Eigen::MatrixXd x;                      // n x p
    std::vector<int> y;                     // categories 1..K
    int categories = 0;                     // K
    std::vector<std::string> covariate_names;  // size p; defaults to x1..xp

    ModelData() = default;
    // Validates shape, ranges and finiteness; names default when empty.
    // Throws DomainError.
    ModelData(Eigen::MatrixXd x, std::vector<int> y, int categories, std::vector<std::string> names = {});

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }
    // Observations per category, index 0 = category 1.
    std::vector<int> category_counts() const;
};

struct Params {
    Eigen::VectorXd beta;
    Eigen::VectorXd theta;

    Eigen::VectorXd packed() const;
    static Params unpack(const Eigen::VectorXd& v, int p);
};

// P(Y = j), j = 1..K. Throws DomainError unless theta is strictly increasing.
Eigen::VectorXd cumulative_probs(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta,
                                 const Eigen::VectorXd& x_row);

// -sum log P(y_i | x_i); +infinity when some observed category has zero
// probability (non-monotone or overflowing thresholds).
double neg_log_likelihood(const Params& params, const ModelData& data);
// Analytic gradient of neg_log_likelihood, packed layout.
Eigen::VectorXd gradient(const Params& params, const ModelData& data);
// Analytic Hessian of neg_log_likelihood (observed information), packed layout.
Eigen::MatrixXd hessian(const Params& params, const ModelData& data);

struct FitConfig {
    double tol = 1e-8;  // on the max-norm of the gradient
    int max_iter = 100;
};

struct OrderedLogitFit {
    std::vector<std::string> names;  // covariates then cut1..cut{K-1}
    Eigen::VectorXd beta;
    Eigen::VectorXd theta;
    double ll_model = 0.0;
    double ll_null = 0.0;
    Eigen::MatrixXd cov;     // packed layout
    Eigen::VectorXd se;      // NaN where undefined
    Eigen::VectorXd z;
    Eigen::VectorXd p_values;
    std::vector<bool> se_unreliable;
    bool converged = false;
    int iterations = 0;
    int n = 0;
    int categories = 0;
    std::vector<std::string> warnings;

    int parameter_count() const { return static_cast<int>(beta.size() + theta.size()); }
    Eigen::VectorXd estimates() const;
};

// Damped Newton on (theta_1, log-gaps, beta). Throws DomainError if a category
// is empty or n <= p + K - 1.
OrderedLogitFit fit(const ModelData& data, const FitConfig& config = {});

// Thresholds-only model: theta_j = logit of the empirical cumulative share.
Eigen::VectorXd null_thresholds(const std::vector<int>& counts);
double null_log_likelihood(const std::vector<int>& counts);

// McFadden: 1 - ll_model / ll_null. Throws DomainError when ll_null == 0.
double pseudo_r2(double ll_null, double ll_model);

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
};
InformationCriteria information_criteria(int k, int n, double ll);

double normal_two_sided_p(double z);

struct WaldResult {
    std::vector<double> p_values;
    std::vector<bool> unreliable;  // p-value emitted with a warning marker
};
WaldResult wald_p_values(const OrderedLogitFit& fit);

// "***" p < 0.01, "**" p < 0.05, "" otherwise.
std::string significance_stars(double p);

}  // namespace ebike::ordlogit
