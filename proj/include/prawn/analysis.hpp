#pragma once

#include "prawn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prawn::analysis {

// Lanczos log-gamma plus the digamma/trigamma needed by the dispersion
// profile; accurate to ~1e-13 relative over the positive axis.
double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

struct CollinearityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DesignMatrix {
    Mat X; // N x p, intercept column included by the caller
    std::vector<std::string> column_names;
    Vec y; // nonnegative integer counts

    void validate() const;
};

struct NBConfig {
    int max_iterations = 200;
    double tolerance = 1e-8;
};

struct NBFit {
    Vec coefficients;
    Vec standard_errors;
    double dispersion = 0.0; // NB-2 theta; variance is mu + mu^2/theta
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
    bool poisson_like = false; // theta ran into its upper bound
    std::vector<double> ll_history; // one entry per alternating iteration
};

// NB-2 maximum likelihood with log link: IRLS for beta given theta
// alternating with a safeguarded Newton step for ln(theta) bracketed in
// [-10, 15]; both halves only accept steps that do not lower the
// log-likelihood. Standard errors come from the inverse observed information
// for beta.
NBFit fit_negative_binomial(const DesignMatrix& design, const NBConfig& config = {});

double nb_log_likelihood(const Mat& X, const Vec& y, const Vec& beta, double theta);
double poisson_log_likelihood(const Mat& X, const Vec& y, const Vec& beta);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

// Pearson r with a two-sided seeded permutation test on y.
Correlation pearson_with_permutation(std::span<const double> x, std::span<const double> y,
                                     int permutations, std::uint64_t seed);

struct LogNormalFit {
    double mu = 0.0;
    double sigma = 0.0;
};

// MLE on ln(counts): mean and population standard deviation.
LogNormalFit fit_lognormal(std::span<const double> counts);

struct RankFrequencyFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Least-squares line through (log rank, log frequency), ranks 1-based after
// a descending sort.
RankFrequencyFit rank_frequency_fit(std::span<const double> counts);

// Design matrix file: CSV with a header row, first column y.
DesignMatrix read_design_csv(std::istream& in);
DesignMatrix read_design_csv_file(const std::string& path);

} // namespace prawn::analysis
