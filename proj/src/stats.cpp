#include "varcg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varcg/errors.hpp"

namespace varcg {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

// ---------------------------------------------------------------------------
// Deterministic randomness

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer applied to the (index+1)-th state of the stream
    // started at `seed`.
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t DetRng::bounded(std::uint64_t bound) {
    if (bound == 0) throw StatsError("bounded draw with zero bound");
    // Rejection sampling: discard the low partial block so every residue
    // is equally likely.
    std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
        std::uint64_t r = engine_();
        if (r >= threshold) return r % bound;
    }
}

// ---------------------------------------------------------------------------
// Special functions

namespace {

constexpr int kMaxSeriesIterations = 10000;
constexpr double kSeriesEps = 1e-16;
constexpr double kLentzTiny = 1e-300;

/// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kLentzTiny) d = kLentzTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxSeriesIterations; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kLentzTiny) d = kLentzTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kLentzTiny) c = kLentzTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kLentzTiny) d = kLentzTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kLentzTiny) c = kLentzTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kSeriesEps) return h;
    }
    throw StatsError("incomplete beta continued fraction failed to converge");
}

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
    double bt = std::exp(log_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

/// Regularized lower incomplete gamma P(a, x).
double reg_inc_gamma(double a, double x) {
    if (x <= 0.0) return 0.0;
    double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // Series representation.
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < kMaxSeriesIterations; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * kSeriesEps)
                return sum * std::exp(log_prefix);
        }
        throw StatsError("incomplete gamma series failed to converge");
    }
    // Continued fraction for Q(a, x) (modified Lentz).
    double b = x + 1.0 - a;
    double c = 1.0 / kLentzTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxSeriesIterations; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kLentzTiny) d = kLentzTiny;
        c = b + an / c;
        if (std::fabs(c) < kLentzTiny) c = kLentzTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kSeriesEps)
            return 1.0 - std::exp(log_prefix) * h;
    }
    throw StatsError("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double t_cdf(double t, double df) {
    if (!(df > 0.0) || !std::isfinite(df)) throw StatsError("t_cdf: df must be positive");
    if (!std::isfinite(t)) return t > 0.0 ? 1.0 : 0.0;
    if (t == 0.0) return 0.5;
    double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, df / (df + t * t));
    double p = (t > 0.0) ? 1.0 - tail : tail;
    return std::clamp(p, 0.0, 1.0);
}

double chisq_cdf(double x, double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw StatsError("chisq_cdf: degrees of freedom must be positive");
    if (x < 0.0) throw StatsError("chisq_cdf: x must be nonnegative");
    return std::clamp(reg_inc_gamma(0.5 * k, 0.5 * x), 0.0, 1.0);
}

double t_quantile(double p, double df) {
    if (!(p > 0.0) || !(p < 1.0)) throw StatsError("t_quantile: p must be in (0, 1)");
    if (!(df > 0.0) || !std::isfinite(df))
        throw StatsError("t_quantile: df must be positive");
    if (p == 0.5) return 0.0;

    double hi = 1.0;
    while (t_cdf(hi, df) < p && hi < 1e300) hi *= 2.0;
    double lo = -1.0;
    while (t_cdf(lo, df) > p && lo > -1e300) lo *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (t_cdf(mid, df) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Samples and tests

SampleSummary summarize(const std::vector<double>& values) {
    if (values.empty()) throw StatsError("summarize: empty sample");
    SampleSummary s;
    s.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

namespace {

struct Moments {
    std::size_t n;
    double mean;
    double var;  // sample variance (n-1)
};

Moments moments(const std::vector<double>& values) {
    Moments m{values.size(), 0.0, 0.0};
    for (double v : values) m.mean += v;
    m.mean /= static_cast<double>(m.n);
    for (double v : values) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(m.n - 1);
    return m;
}

/// Welch t statistic only (no p value / CI), for the bootstrap inner loop.
/// The y-side moments are precomputed by the caller.
double welch_t_only(const Moments& mx, const Moments& my) {
    double se2 = mx.var / static_cast<double>(mx.n) + my.var / static_cast<double>(my.n);
    if (se2 <= 0.0) throw StatsError("degenerate samples: both variances are zero");
    return (mx.mean - my.mean) / std::sqrt(se2);
}

}  // namespace

TTestResult welch_t_test(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2 || y.size() < 2)
        throw StatsError("welch_t_test: each sample needs at least two values");
    Moments mx = moments(x);
    Moments my = moments(y);
    double ax = mx.var / static_cast<double>(mx.n);
    double ay = my.var / static_cast<double>(my.n);
    double se2 = ax + ay;
    if (se2 <= 0.0) throw StatsError("degenerate samples: both variances are zero");

    TTestResult result;
    result.mean_diff = mx.mean - my.mean;
    result.t = result.mean_diff / std::sqrt(se2);
    result.df = se2 * se2 /
                (ax * ax / static_cast<double>(mx.n - 1) +
                 ay * ay / static_cast<double>(my.n - 1));
    result.p_two_sided = std::clamp(2.0 * (1.0 - t_cdf(std::fabs(result.t), result.df)),
                                    0.0, 1.0);
    double tq = t_quantile(0.975, result.df);
    result.ci95_low = result.mean_diff - tq * std::sqrt(se2);
    result.ci95_high = result.mean_diff + tq * std::sqrt(se2);
    result.ratio_defined = (my.mean != 0.0);
    result.ratio_of_means = result.ratio_defined ? mx.mean / my.mean : kNan;
    return result;
}

CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw StatsError("pearson: length mismatch");
    if (x.size() < 3) throw StatsError("pearson: need at least three pairs");
    Moments mx = moments(x);
    Moments my = moments(y);
    if (mx.var == 0.0 || my.var == 0.0)
        throw StatsError("pearson: zero variance in a sample");
    double cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        cov += (x[i] - mx.mean) * (y[i] - my.mean);
    double denom = std::sqrt(mx.var * my.var) * static_cast<double>(x.size() - 1);
    CorrelationResult result;
    result.r = std::clamp(cov / denom, -1.0, 1.0);
    result.n = x.size();
    return result;
}

// ---------------------------------------------------------------------------
// Bootstrap

std::vector<double> apply_transform(const std::vector<double>& values,
                                    Transform transform) {
    if (transform == Transform::Identity) return values;
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        if (v <= -1.0) throw StatsError("log1p transform requires values > -1");
        out.push_back(std::log1p(v));
    }
    return out;
}

BootstrapResult bootstrap_null(const std::vector<double>& pool,
                               const std::vector<double>& observed, int B,
                               Transform transform, std::uint64_t seed) {
    if (B < 100) throw StatsError("bootstrap_null: B must be at least 100");
    if (observed.size() < 2)
        throw StatsError("bootstrap_null: observed sample needs at least two values");
    if (observed.size() >= pool.size())
        throw StatsError("bootstrap_null: sample size must be smaller than the pool");

    std::vector<double> tpool = apply_transform(pool, transform);
    std::vector<double> tobs = apply_transform(observed, transform);
    Moments pool_m = moments(tpool);
    if (pool_m.var == 0.0)
        throw StatsError("bootstrap_null: pool is degenerate (zero variance)");

    BootstrapResult result;
    result.B = B;
    result.transform = transform;
    result.seed = seed;
    result.observed_t = welch_t_only(moments(tobs), pool_m);

    std::size_t n_sample = observed.size();
    std::vector<std::size_t> indices(tpool.size());
    std::vector<double> draw(n_sample);
    result.null_t.reserve(static_cast<std::size_t>(B));

    for (int b = 0; b < B; ++b) {
        DetRng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 100)
                throw StatsError("bootstrap_null: 100 degenerate draws in a row");
            // Partial Fisher–Yates: the first n_sample slots become the draw.
            for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
            for (std::size_t i = 0; i < n_sample; ++i) {
                std::size_t j = i + static_cast<std::size_t>(
                                        rng.bounded(indices.size() - i));
                std::swap(indices[i], indices[j]);
                draw[i] = tpool[indices[i]];
            }
            Moments dm = moments(draw);
            if (dm.var > 0.0) {
                result.null_t.push_back(welch_t_only(dm, pool_m));
                break;
            }
        }
    }

    std::size_t less = 0;
    std::size_t equal = 0;
    for (double t : result.null_t) {
        if (t < result.observed_t) ++less;
        if (t == result.observed_t) ++equal;
    }
    result.percentile_of_observed =
        (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) /
        static_cast<double>(B);
    return result;
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

double sigmoid(double eta) {
    if (eta >= 0.0) {
        double e = std::exp(-eta);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(eta);
    return e / (1.0 + e);
}

/// Solves a (small, symmetric) linear system in place by Gaussian
/// elimination with partial pivoting.  Throws RankDeficientError when a
/// pivot is negligible relative to the largest initial entry.
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> rhs) {
    std::size_t n = rhs.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) throw RankDeficientError("normal equations are all zero");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::fabs(a[row][col]) > std::fabs(a[pivot][col])) pivot = row;
        if (std::fabs(a[pivot][col]) <= 1e-10 * scale)
            throw RankDeficientError("design matrix is rank deficient");
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            double factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
            rhs[row] -= factor * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double sum = rhs[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= a[i][k] * x[k];
        x[i] = sum / a[i][i];
    }
    return x;
}

double model_deviance(const std::vector<double>& eta, const std::vector<bool>& y) {
    double ll = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        double mu = std::clamp(sigmoid(eta[i]), 1e-15, 1.0 - 1e-15);
        ll += y[i] ? std::log(mu) : std::log1p(-mu);
    }
    return -2.0 * ll;
}

}  // namespace

LogisticModel logistic_fit(const std::vector<std::vector<double>>& design,
                           const std::vector<bool>& y) {
    if (design.empty() || design.size() != y.size())
        throw StatsError("logistic_fit: design and response sizes disagree");
    std::size_t p = design[0].size();
    if (p < 2) throw StatsError("logistic_fit: need at least one predictor column");
    for (const auto& row : design) {
        if (row.size() != p) throw StatsError("logistic_fit: ragged design matrix");
        if (row[0] != 1.0)
            throw StatsError("logistic_fit: first design column must be all ones");
    }
    bool has_true = false;
    bool has_false = false;
    for (bool v : y) (v ? has_true : has_false) = true;
    if (!has_true || !has_false)
        throw StatsError("logistic_fit: response contains a single class");

    constexpr double kTol = 1e-8;
    constexpr int kMaxIterations = 50;
    constexpr double kMinWeight = 1e-10;

    std::size_t n = design.size();
    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n, 0.0);
    LogisticModel model;

    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        // Weighted normal equations X'WX delta-system on the working response.
        std::vector<std::vector<double>> xtwx(p, std::vector<double>(p, 0.0));
        std::vector<double> xtwz(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double mu = sigmoid(eta[i]);
            double w = std::max(mu * (1.0 - mu), kMinWeight);
            double z = eta[i] + ((y[i] ? 1.0 : 0.0) - mu) / w;
            for (std::size_t j = 0; j < p; ++j) {
                xtwz[j] += w * design[i][j] * z;
                for (std::size_t k = j; k < p; ++k)
                    xtwx[j][k] += w * design[i][j] * design[i][k];
            }
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < j; ++k) xtwx[j][k] = xtwx[k][j];

        std::vector<double> next = solve_linear(std::move(xtwx), std::move(xtwz));
        model.iterations = iter;

        bool finite = true;
        for (double v : next)
            if (!std::isfinite(v)) finite = false;
        if (!finite) break;  // keep the previous (finite) iterate

        double max_delta = 0.0;
        for (std::size_t j = 0; j < p; ++j)
            max_delta = std::max(max_delta, std::fabs(next[j] - beta[j]));
        beta = std::move(next);
        for (std::size_t i = 0; i < n; ++i) {
            eta[i] = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta[i] += design[i][j] * beta[j];
        }
        if (max_delta < kTol) {
            model.converged = true;
            break;
        }
        double max_abs_beta = 0.0;
        for (double v : beta) max_abs_beta = std::max(max_abs_beta, std::fabs(v));
        if (max_abs_beta > 1e8) break;  // clearly diverging; stop early
    }

    double max_eta = 0.0;
    for (double e : eta) max_eta = std::max(max_eta, std::fabs(e));
    if (max_eta > 30.0) {
        // Fitted probabilities have saturated to numeric 0/1: separation.
        model.diverging = true;
        model.converged = false;
    }
    model.coefficients = beta;
    model.deviance = model_deviance(eta, y);
    return model;
}

double percent_change(double or_uni, double or_adj) {
    return 100.0 * (or_uni - or_adj) / or_uni;
}

ConfoundReport confound_analysis(const std::vector<double>& metric,
                                 const std::vector<double>& control,
                                 const std::vector<bool>& y) {
    if (metric.size() != control.size() || metric.size() != y.size())
        throw StatsError("confound_analysis: input lengths disagree");

    std::size_t n = metric.size();
    std::vector<std::vector<double>> uni(n), adj(n), ctl(n);
    for (std::size_t i = 0; i < n; ++i) {
        uni[i] = {1.0, metric[i]};
        adj[i] = {1.0, metric[i], control[i]};
        ctl[i] = {1.0, control[i]};
    }

    ConfoundReport report;
    report.sd_metric = summarize(metric).sd;

    LogisticModel uni_model = logistic_fit(uni, y);
    report.beta_uni = uni_model.coefficients[1];
    report.or_per_sd_uni = std::exp(report.beta_uni * report.sd_metric);

    try {
        LogisticModel adj_model = logistic_fit(adj, y);
        LogisticModel ctl_model = logistic_fit(ctl, y);
        report.beta_adj = adj_model.coefficients[1];
        report.or_per_sd_adj = std::exp(report.beta_adj * report.sd_metric);
        report.pct_change = percent_change(report.or_per_sd_uni, report.or_per_sd_adj);
        report.deviance_chi2 = std::max(0.0, ctl_model.deviance - adj_model.deviance);
        report.p_deviance = 1.0 - chisq_cdf(report.deviance_chi2,
                                            static_cast<double>(report.chi2_df));
    } catch (const RankDeficientError&) {
        report.rank_deficient = true;
        report.beta_adj = kNan;
        report.or_per_sd_adj = kNan;
        report.pct_change = kNan;
        report.deviance_chi2 = kNan;
        report.p_deviance = kNan;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Group comparison

GroupComparison group_compare(const std::vector<double>& values,
                              const std::vector<bool>& vulnerable,
                              const GroupCompareOptions& options) {
    if (values.size() != vulnerable.size())
        throw StatsError("group_compare: input lengths disagree");
    std::vector<double> vuln, rest;
    for (std::size_t i = 0; i < values.size(); ++i)
        (vulnerable[i] ? vuln : rest).push_back(values[i]);
    if (vuln.empty()) throw StatsError("group_compare: vulnerable group is empty");
    if (rest.empty()) throw StatsError("group_compare: non-vulnerable group is empty");

    GroupComparison comparison;
    comparison.vulnerable = summarize(vuln);
    comparison.non_vulnerable = summarize(rest);
    comparison.test = welch_t_test(vuln, rest);
    if (options.with_bootstrap)
        comparison.bootstrap = bootstrap_null(rest, vuln, options.bootstrap_b,
                                              options.transform, options.seed);
    return comparison;
}

}  // namespace varcg
