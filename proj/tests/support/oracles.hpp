#pragma once

// Independent reference implementations and random generators for tests.
// Nothing here calls into the library's estimation code.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

double logistic(double t);
double logit(double p);

// Binary logistic regression with intercept by IRLS. Returns
// [intercept, slopes...]; y holds 0/1.
Eigen::VectorXd binary_logit_irls(const Eigen::MatrixXd& x, const std::vector<int>& y, int max_iter = 100,
                                  double tol = 1e-12);

// Upper chi-square tails in closed form for df 1, 2, 3.
double chi2_sf_closed(double x, int df);

// Central finite differences of f at v.
Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& v,
                                 double h);

// Intercept-only thresholds: logit of cumulative shares.
std::vector<double> empirical_thresholds(const std::vector<int>& y, int categories);

// ---------------------------------------------------------------------------

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    // Strictly increasing thresholds with gaps in [min_gap, max_gap].
    Eigen::VectorXd thresholds(int count, double start_lo, double start_hi, double min_gap, double max_gap);
    Eigen::VectorXd vector(int size, double lo, double hi);
    Eigen::MatrixXd matrix(int rows, int cols, double lo, double hi);
    std::string word(int min_len, int max_len);

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

// Draws y from logit P(Y <= j) = theta_j - x.beta for every row of x.
std::vector<int> draw_ordered(Gen& g, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd& theta);

}  // namespace oracle
