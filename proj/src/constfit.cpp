#include "rsl/constfit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsl/rng.hpp"

namespace rsl {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// residuals r_i = y_i - f_i(c); false when any prediction is non-finite
struct Problem {
    const Expression* structure;
    const Library* lib;
    const double* features;
    std::size_t n, d;
    const double* target;  // cycle targets or their logs, per stage
    bool exp_transform;    // apply exp() to the model output

    mutable Expression work;

    bool residuals(const std::vector<double>& c, std::vector<double>& r) const {
        work.constants = c;
        auto m = evaluate(work, *lib, std::span<const double>(features, n * d), n, d);
        for (std::size_t i = 0; i < n; ++i) {
            double p = exp_transform ? std::exp(m[i]) : m[i];
            if (!std::isfinite(p)) return false;
            r[i] = target[i] - p;
        }
        return true;
    }
};

double half_ssq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return 0.5 * s;
}

// dense Cholesky solve of (A + lambda*diag(A)) x = b; false if not SPD
bool damped_solve(std::vector<double> A, double lambda, std::vector<double> b,
                  std::vector<double>& x, int n) {
    for (int i = 0; i < n; ++i) {
        double d = A[static_cast<std::size_t>(i) * n + i];
        if (d <= 0.0) d = 1.0;
        A[static_cast<std::size_t>(i) * n + i] = d * (1.0 + lambda);
    }
    // Cholesky A = L L^T
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = A[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= A[static_cast<std::size_t>(i) * n + k] * A[static_cast<std::size_t>(j) * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                A[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
            } else {
                A[static_cast<std::size_t>(i) * n + j] = s / A[static_cast<std::size_t>(j) * n + j];
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= A[static_cast<std::size_t>(i) * n + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = s / A[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= A[static_cast<std::size_t>(k) * n + i] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = s / A[static_cast<std::size_t>(i) * n + i];
    }
    return true;
}

struct LmOutcome {
    std::vector<double> c;
    double cost = kInf;  // 0.5*||r||^2
    bool converged = false;
};

// Levenberg-Marquardt with a numeric Jacobian (central differences,
// h = 1e-6*max(1,|c|); one-sided fallback next to non-finite regions).
LmOutcome levenberg_marquardt(const Problem& prob, std::vector<double> c, int max_iter,
                              double grad_tol) {
    LmOutcome out;
    const int n = static_cast<int>(c.size());
    const std::size_t m = prob.n;
    std::vector<double> r(m), r_try(m), rp(m), rm(m);
    if (!prob.residuals(c, r)) return out;  // non-finite start
    double cost = half_ssq(r);

    std::vector<double> J(m * static_cast<std::size_t>(n));
    std::vector<double> A(static_cast<std::size_t>(n) * n), g(static_cast<std::size_t>(n)),
        delta(static_cast<std::size_t>(n));
    double lambda = 1e-3;
    int stall = 0;

    for (int iter = 0; iter < max_iter; ++iter) {
        // Jacobian of the residuals
        for (int j = 0; j < n; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(c[static_cast<std::size_t>(j)]));
            std::vector<double> cp = c, cm = c;
            cp[static_cast<std::size_t>(j)] += h;
            cm[static_cast<std::size_t>(j)] -= h;
            bool okp = prob.residuals(cp, rp), okm = prob.residuals(cm, rm);
            for (std::size_t i = 0; i < m; ++i) {
                double der = 0.0;
                if (okp && okm)
                    der = (rp[i] - rm[i]) / (2 * h);
                else if (okp)
                    der = (rp[i] - r[i]) / h;
                else if (okm)
                    der = (r[i] - rm[i]) / h;
                J[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = der;
            }
        }
        std::fill(A.begin(), A.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* Ji = &J[i * static_cast<std::size_t>(n)];
            for (int a = 0; a < n; ++a) {
                g[static_cast<std::size_t>(a)] += Ji[a] * r[i];
                for (int b = a; b < n; ++b)
                    A[static_cast<std::size_t>(a) * n + b] += Ji[a] * Ji[b];
            }
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b)
                A[static_cast<std::size_t>(a) * n + b] = A[static_cast<std::size_t>(b) * n + a];

        double gnorm = 0.0;
        for (double v : g) gnorm += v * v;
        gnorm = std::sqrt(gnorm);
        if (gnorm < grad_tol) {
            out.converged = true;
            break;
        }

        bool accepted = false;
        for (int tries = 0; tries < 24; ++tries) {
            if (!damped_solve(A, lambda, g, delta, n)) {
                lambda *= 4.0;
                continue;
            }
            std::vector<double> ct = c;
            for (int j = 0; j < n; ++j) ct[static_cast<std::size_t>(j)] -= delta[static_cast<std::size_t>(j)];
            if (prob.residuals(ct, r_try)) {
                double cost_try = half_ssq(r_try);
                if (cost_try < cost) {
                    double rel = (cost - cost_try) / std::max(cost, 1e-300);
                    c = std::move(ct);
                    r = r_try;
                    cost = cost_try;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    stall = rel < 1e-14 ? stall + 1 : 0;
                    break;
                }
            }
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
        if (!accepted || stall >= 3) {
            out.converged = accepted;
            break;
        }
    }
    out.c = std::move(c);
    out.cost = cost;
    return out;
}

}  // namespace

std::vector<double> predict_cycles(const Expression& expr, const Library& lib,
                                   std::span<const double> features, std::size_t n_samples,
                                   std::size_t n_features, bool log_life) {
    auto m = evaluate(expr, lib, features, n_samples, n_features);
    if (log_life)
        for (double& v : m) {
            v = std::exp(v);
            if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
        }
    return m;
}

double rmse_cycles(std::span<const double> observed, std::span<const double> predicted) {
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double d = observed[i] - predicted[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(observed.size()));
}

double r2_cycles(std::span<const double> observed, std::span<const double> predicted) {
    double mean = 0.0;
    for (double v : observed) mean += v;
    mean /= static_cast<double>(observed.size());
    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        ssr += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
        sst += (observed[i] - mean) * (observed[i] - mean);
    }
    return 1.0 - ssr / sst;
}

FitResult fit_constants(const Expression& structure, const Library& lib,
                        std::span<const double> features, std::size_t n_samples,
                        std::size_t n_features, std::span<const double> target_cycles,
                        const FitConfig& cfg) {
    if (n_samples == 0) throw std::invalid_argument("fit_constants: empty data");
    const int nc = count_constants(structure.sequence, lib);

    // canonical row order makes every accumulation independent of input order
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (target_cycles[a] != target_cycles[b]) return target_cycles[a] < target_cycles[b];
        for (std::size_t j = 0; j < n_features; ++j) {
            double fa = features[a * n_features + j], fb = features[b * n_features + j];
            if (fa != fb) return fa < fb;
        }
        return false;
    });
    std::vector<double> X(n_samples * n_features), y(n_samples), ylog(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        y[i] = target_cycles[order[i]];
        ylog[i] = std::log(y[i]);
        for (std::size_t j = 0; j < n_features; ++j)
            X[i * n_features + j] = features[order[i] * n_features + j];
    }

    FitResult result;
    Expression work = structure;
    work.constants.assign(static_cast<std::size_t>(nc), 1.0);

    if (nc == 0) {
        auto pred = predict_cycles(work, lib, X, n_samples, n_features, cfg.log_life);
        bool finite = true;
        for (double v : pred) finite &= std::isfinite(v);
        if (finite) {
            result.constants.clear();
            result.rmse = rmse_cycles(y, pred);
            result.r2 = r2_cycles(y, pred);
            result.converged = true;
            result.n_restarts_used = 0;
        }
        return result;
    }

    Problem cyc{&structure, &lib, X.data(), n_samples, n_features, y.data(), cfg.log_life, work};
    Problem logp{&structure, &lib, X.data(), n_samples, n_features, ylog.data(), false, work};

    const std::uint64_t shash = fnv1a64(structure_key(structure.sequence, lib));
    const bool has_extra = static_cast<int>(cfg.extra_start.size()) == nc;
    const int total_starts = cfg.restarts + (has_extra ? 1 : 0);
    for (int k = 0; k < total_starts; ++k) {
        std::vector<double> start(static_cast<std::size_t>(nc), 1.0);
        if (k >= cfg.restarts) {
            start = cfg.extra_start;
        } else if (k > 0) {
            Rng rng(derive_seed(cfg.seed, shash, static_cast<std::uint64_t>(k)));
            for (double& v : start) v = rng.uniform(-cfg.restart_range, cfg.restart_range);
        }
        bool used = false;
        // staged: log-life warmup then cycle polish
        if (cfg.log_life) {
            LmOutcome warm = levenberg_marquardt(logp, start, cfg.max_iterations, cfg.grad_tol);
            if (std::isfinite(warm.cost)) {
                LmOutcome fin = levenberg_marquardt(cyc, warm.c, cfg.max_iterations, cfg.grad_tol);
                if (std::isfinite(fin.cost)) {
                    used = true;
                    double rm = std::sqrt(2.0 * fin.cost / static_cast<double>(n_samples));
                    if (rm < result.rmse) {
                        result.rmse = rm;
                        result.constants = fin.c;
                        result.converged = fin.converged;
                    }
                }
            }
        }
        // direct cycle-space path
        LmOutcome direct = levenberg_marquardt(cyc, start, cfg.max_iterations, cfg.grad_tol);
        if (std::isfinite(direct.cost)) {
            used = true;
            double rm = std::sqrt(2.0 * direct.cost / static_cast<double>(n_samples));
            if (rm < result.rmse) {
                result.rmse = rm;
                result.constants = direct.c;
                result.converged = direct.converged;
            }
        }
        if (used) ++result.n_restarts_used;
    }

    if (std::isfinite(result.rmse)) {
        work.constants = result.constants;
        auto pred = predict_cycles(work, lib, X, n_samples, n_features, cfg.log_life);
        result.r2 = r2_cycles(y, pred);
    }
    return result;
}

}  // namespace rsl
