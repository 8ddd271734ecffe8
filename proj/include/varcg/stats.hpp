#pragma once

// Statistical comparison of vulnerable vs. non-vulnerable metric samples:
// Welch t-tests with effect sizes and confidence intervals, bootstrap null
// distributions of the t statistic, Pearson correlation, logistic
// regression by iteratively reweighted least squares, and confounding
// analysis via odds ratios and analysis of deviance.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace varcg {

// ---------------------------------------------------------------------------
// Deterministic randomness

/// Derives a per-task seed from a master seed and a task index (splitmix64
/// finalizer), so parallel or repeated sub-streams stay reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic random source: a seeded mt19937_64 with rejection-sampled
/// bounded draws and 53-bit uniform doubles in [0, 1).
class DetRng {
  public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t bounded(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Distribution functions

/// Student-t CDF with (possibly fractional) df > 0, via the regularized
/// incomplete beta function; absolute error <= 1e-10.  t_cdf(0, df) == 0.5
/// exactly.
double t_cdf(double t, double df);

/// Chi-squared CDF with (possibly fractional) k > 0 degrees of freedom, via
/// the regularized lower incomplete gamma function; absolute error <= 1e-10.
double chisq_cdf(double x, double k);

/// Inverse of t_cdf in its first argument (bisection); p must lie in (0,1).
double t_quantile(double p, double df);

// ---------------------------------------------------------------------------
// Samples and tests

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (n-1 denominator); 0 if n < 2
};

/// Throws StatsError on an empty sample.
SampleSummary summarize(const std::vector<double>& values);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;  // Welch–Satterthwaite
    double p_two_sided = 1.0;
    double mean_diff = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    double ratio_of_means = 0.0;  // meaningful only when ratio_defined
    bool ratio_defined = false;   // false when mean(y) == 0
};

/// Welch two-sample t-test of x against y (unequal variances).  Requires
/// both samples to have at least two elements; throws StatsError when both
/// variances are zero (degenerate samples).
TTestResult welch_t_test(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationResult {
    double r = 0.0;
    std::size_t n = 0;
};

/// Product-moment correlation; requires equal lengths >= 3 and nonzero
/// variance in both arguments (StatsError otherwise).
CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Bootstrap

enum class Transform { Identity, Log1p };

/// Applies a transform elementwise; Log1p is ln(1+x) and requires all
/// values > -1.
std::vector<double> apply_transform(const std::vector<double>& values,
                                    Transform transform);

struct BootstrapResult {
    int B = 0;
    std::vector<double> null_t;  // in iteration order, length B
    double observed_t = 0.0;
    double percentile_of_observed = 0.0;  // (#less + 0.5 * #equal) / B
    Transform transform = Transform::Identity;
    std::uint64_t seed = 0;
};

/// Null distribution of the t statistic: B times, draw |observed| values
/// from `pool` without replacement and record the Welch t of the draw
/// against the whole pool (both transformed).  observed_t is the Welch t of
/// the transformed observed sample against the transformed pool, and its
/// percentile is taken against the null.  Deterministic given `seed`
/// (iteration i uses derive_seed(seed, i)).  Zero-variance draws are
/// redrawn up to 100 times; a degenerate pool or B < 100 is a StatsError.
BootstrapResult bootstrap_null(const std::vector<double>& pool,
                               const std::vector<double>& observed, int B,
                               Transform transform, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticModel {
    std::vector<double> coefficients;  // intercept first
    double deviance = 0.0;             // -2 log-likelihood
    int iterations = 0;
    bool converged = false;
    bool diverging = false;  // some fitted probability is numerically 0 or 1
};

/// Maximum-likelihood logistic fit by iteratively reweighted least squares.
/// `design` is row-major with a leading all-ones intercept column and at
/// least one predictor; `y` must contain both classes.  Convergence:
/// max |delta beta| < 1e-8 within 50 iterations.  Exactly separable data
/// yields converged=false with the diverging flag set and the last iterate
/// returned.  A singular weighted normal system throws RankDeficientError.
LogisticModel logistic_fit(const std::vector<std::vector<double>>& design,
                           const std::vector<bool>& y);

/// 100 * (or_uni - or_adj) / or_uni.
double percent_change(double or_uni, double or_adj);

struct ConfoundReport {
    double beta_uni = 0.0;
    double beta_adj = 0.0;
    double sd_metric = 0.0;
    double or_per_sd_uni = 0.0;
    double or_per_sd_adj = 0.0;
    double pct_change = 0.0;
    double deviance_chi2 = 0.0;
    int chi2_df = 1;
    double p_deviance = 1.0;
    bool rank_deficient = false;  // adjusted fit collinear; adj fields are NaN
};

/// Compares the univariate model (intercept + metric) against the adjusted
/// model (intercept + metric + control): odds ratios per one standard
/// deviation of the metric, their percent change, and an analysis of
/// deviance (control-only deviance minus adjusted deviance, df 1) testing
/// the metric's contribution.  A collinear control sets rank_deficient and
/// leaves the adjusted-model fields NaN.
ConfoundReport confound_analysis(const std::vector<double>& metric,
                                 const std::vector<double>& control,
                                 const std::vector<bool>& y);

// ---------------------------------------------------------------------------
// Group comparison

struct GroupCompareOptions {
    bool with_bootstrap = false;
    int bootstrap_b = 1000;
    std::uint64_t seed = 0;
    Transform transform = Transform::Identity;
};

struct GroupComparison {
    SampleSummary vulnerable;
    SampleSummary non_vulnerable;
    TTestResult test;  // x = vulnerable group, y = non-vulnerable group
    std::optional<BootstrapResult> bootstrap;
};

/// Splits `values` by the parallel `vulnerable` flags and compares the two
/// groups.  Throws StatsError naming the group when either is empty.  The
/// optional bootstrap uses the non-vulnerable values as the pool and the
/// vulnerable values as the observed sample.
GroupComparison group_compare(const std::vector<double>& values,
                              const std::vector<bool>& vulnerable,
                              const GroupCompareOptions& options = {});

}  // namespace varcg
