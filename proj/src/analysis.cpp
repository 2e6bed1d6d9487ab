#include "prawn/analysis.hpp"

#include "prawn/io.hpp"
#include "prawn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

namespace prawn::analysis {

double log_gamma(double x) {
    if (!(x > 0.0) && x == std::floor(x))
        return std::numeric_limits<double>::infinity(); // poles at 0, -1, -2, ...
    // Lanczos, g = 7, 9 terms.
    static const double coefficients[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,    12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // reflection: ln G(x) = ln(pi / sin(pi x)) - ln G(1 - x)
        return std::log(M_PI / std::abs(std::sin(M_PI * x))) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double series = coefficients[0];
    for (int i = 1; i < 9; ++i) series += coefficients[i] / (z + i);
    const double t = z + 7.5;
    return 0.91893853320467274178 /* ln sqrt(2 pi) */ + (z + 0.5) * std::log(t) - t +
           std::log(series);
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma: positive argument required");
    double value = 0.0;
    while (x < 10.0) {
        value -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    value += std::log(x) - 0.5 * inv -
             inv2 * (1.0 / 12.0 -
                     inv2 * (1.0 / 120.0 -
                             inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return value;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("trigamma: positive argument required");
    double value = 0.0;
    while (x < 10.0) {
        value += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    value += inv * (1.0 + 0.5 * inv +
                    inv2 * (1.0 / 6.0 -
                            inv2 * (1.0 / 30.0 -
                                    inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0)))));
    return value;
}

void DesignMatrix::validate() const {
    if (X.rows() != y.size())
        throw std::invalid_argument("design matrix: X and y row counts differ");
    if (X.rows() <= X.cols())
        throw std::invalid_argument("design matrix: need more observations than parameters");
    if (!X.allFinite()) throw std::invalid_argument("design matrix: non-finite entry in X");
    if (!column_names.empty() && static_cast<Index>(column_names.size()) != X.cols())
        throw std::invalid_argument("design matrix: column name count mismatch");
    for (Index i = 0; i < y.size(); ++i)
        if (!(y(i) >= 0.0) || y(i) != std::floor(y(i)))
            throw std::invalid_argument("design matrix: y must be nonnegative integers");
}

namespace {

constexpr double kLogThetaLow = -10.0;
constexpr double kLogThetaHigh = 15.0;
constexpr double kEtaCap = 300.0; // keeps exp() finite; never binds on sane fits

Vec mean_from(const Mat& X, const Vec& beta) {
    Vec mu = (X * beta).array().min(kEtaCap).exp();
    return mu;
}

double nb_ll_mu(const Vec& y, const Vec& mu, double theta) {
    const double lg_theta = log_gamma(theta);
    double ll = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double yi = y(i);
        const double mi = mu(i);
        ll += log_gamma(yi + theta) - lg_theta - log_gamma(yi + 1.0) -
              theta * std::log1p(mi / theta) + yi * (std::log(mi) - std::log(theta + mi));
    }
    return ll;
}

// d ll / d theta with mu fixed
double nb_dll_dtheta(const Vec& y, const Vec& mu, double theta) {
    const double dg_theta = digamma(theta);
    double grad = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double yi = y(i);
        const double mi = mu(i);
        grad += digamma(yi + theta) - dg_theta - std::log1p(mi / theta) + 1.0 -
                (yi + theta) / (theta + mi);
    }
    return grad;
}

double nb_d2ll_dtheta2(const Vec& y, const Vec& mu, double theta) {
    const double tg_theta = trigamma(theta);
    double hess = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double yi = y(i);
        const double mi = mu(i);
        hess += trigamma(yi + theta) - tg_theta + 1.0 / theta - 1.0 / (theta + mi) -
                (mi - yi) / ((theta + mi) * (theta + mi));
    }
    return hess;
}

// Profile step in t = ln(theta): safeguarded Newton inside [lo, hi], falling
// back to bisection on the sign bracket; returns the accepted t.
double profile_log_theta(const Vec& y, const Vec& mu, double t_start) {
    const auto grad_t = [&](double t) {
        const double theta = std::exp(t);
        return theta * nb_dll_dtheta(y, mu, theta);
    };
    const auto hess_t = [&](double t) {
        const double theta = std::exp(t);
        return theta * nb_dll_dtheta(y, mu, theta) +
               theta * theta * nb_d2ll_dtheta2(y, mu, theta);
    };

    double lo = kLogThetaLow, hi = kLogThetaHigh;
    const double f_lo = grad_t(lo), f_hi = grad_t(hi);
    if (f_hi >= 0.0) return hi; // likelihood still rising: Poisson-like data
    if (f_lo <= 0.0) return lo;

    double t = std::clamp(t_start, lo, hi);
    double f = grad_t(t);
    for (int it = 0; it < 100; ++it) {
        if (f > 0.0) lo = t;
        else hi = t;
        const double h = hess_t(t);
        double t_next = h < 0.0 ? t - f / h : std::numeric_limits<double>::quiet_NaN();
        if (!(t_next > lo) || !(t_next < hi)) t_next = 0.5 * (lo + hi);
        if (std::abs(t_next - t) < 1e-11) return t_next;
        t = t_next;
        f = grad_t(t);
        if (f == 0.0) return t;
    }
    return t;
}

} // namespace

double nb_log_likelihood(const Mat& X, const Vec& y, const Vec& beta, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("nb_log_likelihood: theta must be positive");
    return nb_ll_mu(y, mean_from(X, beta), theta);
}

double poisson_log_likelihood(const Mat& X, const Vec& y, const Vec& beta) {
    const Vec mu = mean_from(X, beta);
    double ll = 0.0;
    for (Index i = 0; i < y.size(); ++i)
        ll += y(i) * std::log(mu(i)) - mu(i) - log_gamma(y(i) + 1.0);
    return ll;
}

NBFit fit_negative_binomial(const DesignMatrix& design, const NBConfig& config) {
    design.validate();
    const Mat& X = design.X;
    const Vec& y = design.y;
    const Index n = X.rows();
    const Index p = X.cols();

    Eigen::ColPivHouseholderQR<Mat> rank_check(X);
    rank_check.setThreshold(1e-10);
    if (rank_check.rank() < p)
        throw CollinearityError("fit_negative_binomial: design matrix is rank deficient");

    // beta init: least squares on the log response, theta init from moments.
    Vec log_response(n);
    for (Index i = 0; i < n; ++i) log_response(i) = std::log(y(i) + 0.5);
    Vec beta = X.colPivHouseholderQr().solve(log_response);

    const double y_mean = y.mean();
    const double y_var = (y.array() - y_mean).square().sum() / static_cast<double>(n);
    double theta = (y_var > y_mean && y_mean > 0.0)
                       ? std::clamp(y_mean * y_mean / (y_var - y_mean), 1e-3, 1e4)
                       : 100.0;

    NBFit fit;
    double ll = nb_log_likelihood(X, y, beta, theta);
    fit.ll_history.push_back(ll);

    int iteration = 0;
    for (; iteration < config.max_iterations; ++iteration) {
        // IRLS half-step for beta with Fisher weights, step-halved so the
        // likelihood never decreases.
        const Vec mu = mean_from(X, beta);
        Vec working(n), weight_sqrt(n);
        for (Index i = 0; i < n; ++i) {
            const double w = theta * mu(i) / (theta + mu(i));
            weight_sqrt(i) = std::sqrt(w);
            working(i) = std::log(mu(i)) + (y(i) - mu(i)) / mu(i);
        }
        const Mat Xw = weight_sqrt.asDiagonal() * X;
        const Vec zw = weight_sqrt.asDiagonal() * working;
        const Vec beta_target = Xw.colPivHouseholderQr().solve(zw);

        Vec beta_new = beta;
        double ll_new = ll;
        double step = 1.0;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
            const Vec candidate = beta + step * (beta_target - beta);
            const double candidate_ll = nb_log_likelihood(X, y, candidate, theta);
            if (candidate_ll >= ll - 1e-12 && std::isfinite(candidate_ll)) {
                beta_new = candidate;
                ll_new = candidate_ll;
                break;
            }
        }
        beta = beta_new;

        // Profile step for theta, likewise accepted only on improvement.
        const Vec mu_now = mean_from(X, beta);
        const double t_old = std::log(theta);
        double t_candidate = profile_log_theta(y, mu_now, t_old);
        double theta_new = theta;
        for (int halving = 0; halving < 40; ++halving) {
            const double candidate_theta = std::exp(t_candidate);
            const double candidate_ll = nb_ll_mu(y, mu_now, candidate_theta);
            if (candidate_ll >= ll_new - 1e-12 && std::isfinite(candidate_ll)) {
                theta_new = candidate_theta;
                break;
            }
            t_candidate = 0.5 * (t_candidate + t_old);
        }
        theta = theta_new;

        const double ll_next = nb_log_likelihood(X, y, beta, theta);
        fit.ll_history.push_back(ll_next);
        const bool done = std::abs(ll_next - ll) < config.tolerance;
        ll = ll_next;
        if (done) {
            fit.converged = true;
            ++iteration;
            break;
        }
    }

    fit.iterations = iteration;
    fit.coefficients = beta;
    fit.dispersion = theta;
    fit.log_likelihood = ll;
    fit.poisson_like = std::log(theta) >= kLogThetaHigh - 1e-6;

    // Observed information for beta at the optimum.
    const Vec mu = mean_from(X, beta);
    Vec obs_weight(n);
    for (Index i = 0; i < n; ++i) {
        const double denom = theta + mu(i);
        obs_weight(i) = (y(i) + theta) * theta * mu(i) / (denom * denom);
    }
    const Mat information = X.transpose() * obs_weight.asDiagonal() * X;
    const Mat covariance = information.ldlt().solve(Mat::Identity(p, p));
    fit.standard_errors.resize(p);
    for (Index j = 0; j < p; ++j)
        fit.standard_errors(j) = std::sqrt(std::max(covariance(j, j), 0.0));
    return fit;
}

Correlation pearson_with_permutation(std::span<const double> x, std::span<const double> y,
                                     int permutations, std::uint64_t seed) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw std::invalid_argument("pearson_with_permutation: need equal lengths >= 3");
    if (permutations < 1)
        throw std::invalid_argument("pearson_with_permutation: need at least 1 permutation");

    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - x_mean) * (x[i] - x_mean);
        syy += (y[i] - y_mean) * (y[i] - y_mean);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson_with_permutation: zero variance");

    const auto r_with = [&](std::span<const double> yy) {
        double sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - x_mean) * (yy[i] - y_mean);
        return sxy / std::sqrt(sxx * syy);
    };

    Correlation result;
    result.r = r_with(y);

    Rng rng(seed);
    std::vector<double> permuted(y.begin(), y.end());
    long at_least_as_extreme = 0;
    const double threshold = std::abs(result.r) - 1e-12;
    for (int it = 0; it < permutations; ++it) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(permuted[i - 1], permuted[rng.below(i)]);
        if (std::abs(r_with(permuted)) >= threshold) ++at_least_as_extreme;
    }
    result.p_value = static_cast<double>(at_least_as_extreme + 1) /
                     static_cast<double>(permutations + 1);
    return result;
}

LogNormalFit fit_lognormal(std::span<const double> counts) {
    if (counts.empty()) throw std::invalid_argument("fit_lognormal: empty input");
    double sum = 0.0;
    for (const double count : counts) {
        if (!(count >= 1.0)) throw std::invalid_argument("fit_lognormal: counts must be >= 1");
        sum += std::log(count);
    }
    const double mu = sum / static_cast<double>(counts.size());
    double ss = 0.0;
    for (const double count : counts) {
        const double d = std::log(count) - mu;
        ss += d * d;
    }
    return LogNormalFit{mu, std::sqrt(ss / static_cast<double>(counts.size()))};
}

RankFrequencyFit rank_frequency_fit(std::span<const double> counts) {
    if (counts.size() < 2)
        throw std::invalid_argument("rank_frequency_fit: need at least 2 points");
    std::vector<double> sorted(counts.begin(), counts.end());
    for (const double count : sorted)
        if (!(count > 0.0))
            throw std::invalid_argument("rank_frequency_fit: counts must be positive");
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    const std::size_t n = sorted.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(static_cast<double>(i + 1));
        ly[i] = std::log(sorted[i]);
        sx += lx[i];
        sy += ly[i];
    }
    const double x_mean = sx / static_cast<double>(n);
    const double y_mean = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - x_mean) * (lx[i] - x_mean);
        sxy += (lx[i] - x_mean) * (ly[i] - y_mean);
        syy += (ly[i] - y_mean) * (ly[i] - y_mean);
    }
    RankFrequencyFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += resid * resid;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res <= 1e-20 ? 1.0 : 0.0);
    return fit;
}

DesignMatrix read_design_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("design csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = io::split_csv_line(line);
    if (header.size() < 2) throw std::runtime_error("design csv: need y plus covariates");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = io::split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("design csv: ragged row: " + line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& field : fields) row.push_back(std::stod(field));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("design csv: no data rows");

    DesignMatrix design;
    design.column_names.assign(header.begin() + 1, header.end());
    design.y.resize(static_cast<Index>(rows.size()));
    design.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(header.size() - 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        design.y(static_cast<Index>(i)) = rows[i][0];
        for (std::size_t j = 1; j < rows[i].size(); ++j)
            design.X(static_cast<Index>(i), static_cast<Index>(j - 1)) = rows[i][j];
    }
    return design;
}

DesignMatrix read_design_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open design csv: " + path);
    return read_design_csv(in);
}

} // namespace prawn::analysis
