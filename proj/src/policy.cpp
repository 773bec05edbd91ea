#include "rsl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rsl {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y += M x  with M row-major (rows x cols)
inline void matvec_acc(const double* M, const double* x, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* row = M + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

// y += M^T x
inline void matvec_t_acc(const double* M, const double* x, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* row = M + static_cast<std::size_t>(i) * cols;
        const double xi = x[i];
        for (int j = 0; j < cols; ++j) y[j] += row[j] * xi;
    }
}

// M += a b^T
inline void outer_acc(double* M, const double* a, const double* b, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double* row = M + static_cast<std::size_t>(i) * cols;
        const double ai = a[i];
        for (int j = 0; j < cols; ++j) row[j] += ai * b[j];
    }
}

}  // namespace

PolicyParams PolicyParams::init(const Library& lib, int hidden, std::uint64_t seed,
                                double init_range) {
    PolicyParams p;
    p.hidden = hidden;
    p.n_tokens = lib.size();
    p.input_dim = lib.size() + 1 + 3 + 1;
    p.w_in.resize(static_cast<std::size_t>(3 * hidden) * p.input_dim);
    p.w_rec.resize(static_cast<std::size_t>(3 * hidden) * hidden);
    p.b_gate.resize(static_cast<std::size_t>(3 * hidden), 0.0);
    p.w_out.resize(static_cast<std::size_t>(p.n_tokens) * hidden);
    p.b_out.resize(static_cast<std::size_t>(p.n_tokens), 0.0);
    Rng rng(derive_seed(seed, 0x9011c7ULL));
    for (double& v : p.w_in) v = rng.uniform(-init_range, init_range);
    for (double& v : p.w_rec) v = rng.uniform(-init_range, init_range);
    for (double& v : p.w_out) v = rng.uniform(-init_range, init_range);
    return p;
}

std::size_t PolicyParams::parameter_count() const {
    return w_in.size() + w_rec.size() + b_gate.size() + w_out.size() + b_out.size();
}

double& PolicyParams::flat(std::size_t i) {
    if (i < w_in.size()) return w_in[i];
    i -= w_in.size();
    if (i < w_rec.size()) return w_rec[i];
    i -= w_rec.size();
    if (i < b_gate.size()) return b_gate[i];
    i -= b_gate.size();
    if (i < w_out.size()) return w_out[i];
    i -= w_out.size();
    return b_out[i];
}

double PolicyParams::flat(std::size_t i) const { return const_cast<PolicyParams*>(this)->flat(i); }

void PolicyParams::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write policy checkpoint: " + path);
    out << hidden << ' ' << input_dim << ' ' << n_tokens << '\n';
    char buf[40];
    for (std::size_t i = 0; i < parameter_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", flat(i));
        out << buf;
    }
}

PolicyParams PolicyParams::load(const std::string& path, const Library& lib) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read policy checkpoint: " + path);
    int hidden = 0, dim = 0, ntok = 0;
    in >> hidden >> dim >> ntok;
    if (hidden <= 0 || ntok != lib.size())
        throw std::runtime_error("policy checkpoint shape does not match the library");
    PolicyParams p = init(lib, hidden, 0);
    if (dim != p.input_dim) throw std::runtime_error("policy checkpoint input width mismatch");
    for (std::size_t i = 0; i < p.parameter_count(); ++i)
        if (!(in >> p.flat(i))) throw std::runtime_error("policy checkpoint truncated");
    return p;
}

double PolicyGrad::global_norm() const {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

FirstTokenDist FirstTokenDist::uniform(const Library& lib, const ConstraintConfig& cfg) {
    GenContext root;
    auto mask = prior_mask(root, cfg, lib);
    FirstTokenDist d;
    d.p.assign(static_cast<std::size_t>(lib.size()), 0.0);
    int legal = 0;
    for (double m : mask) legal += m == 0.0 ? 1 : 0;
    for (int id = 0; id < lib.size(); ++id)
        if (mask[static_cast<std::size_t>(id)] == 0.0)
            d.p[static_cast<std::size_t>(id)] = 1.0 / legal;
    return d;
}

FirstTokenDist update_first_token_dist(const std::vector<std::vector<int>>& elite_sequences,
                                       const Library& lib, const ConstraintConfig& cfg,
                                       double alpha) {
    if (elite_sequences.empty()) return FirstTokenDist::uniform(lib, cfg);
    GenContext root;
    auto mask = prior_mask(root, cfg, lib);
    std::vector<double> counts(static_cast<std::size_t>(lib.size()), 0.0);
    double n = 0.0;
    int legal = 0;
    for (int id = 0; id < lib.size(); ++id) legal += mask[static_cast<std::size_t>(id)] == 0.0;
    for (const auto& seq : elite_sequences) {
        if (seq.empty()) continue;
        counts[static_cast<std::size_t>(seq.front())] += 1.0;
        n += 1.0;
    }
    FirstTokenDist d;
    d.p.assign(static_cast<std::size_t>(lib.size()), 0.0);
    const double denom = n + alpha * legal;
    for (int id = 0; id < lib.size(); ++id) {
        if (mask[static_cast<std::size_t>(id)] != 0.0) continue;
        d.p[static_cast<std::size_t>(id)] = (counts[static_cast<std::size_t>(id)] + alpha) / denom;
    }
    return d;
}

std::vector<double> encode_step_input(int prev_token, const GenContext& ctx,
                                      const ConstraintConfig& cfg, const Library& lib) {
    std::vector<double> x(static_cast<std::size_t>(lib.size()) + 5, 0.0);
    if (prev_token >= 0 && prev_token < lib.size()) x[static_cast<std::size_t>(prev_token)] = 1.0;
    std::size_t off = static_cast<std::size_t>(lib.size());
    x[off] = cfg.l > 0 ? double(cfg.l - ctx.function_count()) / cfg.l : 0.0;
    int top = ctx.stack_top();
    if (top > 0) x[off + 1 + static_cast<std::size_t>(std::min(top, 3) - 1)] = 1.0;
    x[off + 4] = cfg.n_const > 0 ? double(cfg.n_const - ctx.constant_count()) / cfg.n_const : 0.0;
    return x;
}

namespace {

struct StepCache {
    std::vector<double> x, h_prev, z, r, n, rh, h_out, p;
    int action = -1;
};

// forward one GRU step, optionally filling a cache for BPTT
void gru_forward(const PolicyParams& P, const std::vector<double>& x,
                 const std::vector<double>& h_in, std::vector<double>& h_out,
                 std::vector<double>& logits, StepCache* cache) {
    const int H = P.hidden, D = P.input_dim, L = P.n_tokens;
    std::vector<double> a(static_cast<std::size_t>(3 * H), 0.0);
    // z and r share the plain W x + U h + b preactivation
    for (int i = 0; i < 3 * H; ++i) a[static_cast<std::size_t>(i)] = P.b_gate[static_cast<std::size_t>(i)];
    matvec_acc(P.w_in.data(), x.data(), a.data(), 3 * H, D);
    matvec_acc(P.w_rec.data(), h_in.data(), a.data(), 2 * H, H);  // z, r rows only
    std::vector<double> z(static_cast<std::size_t>(H)), r(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i) {
        z[static_cast<std::size_t>(i)] = sigmoid(a[static_cast<std::size_t>(i)]);
        r[static_cast<std::size_t>(i)] = sigmoid(a[static_cast<std::size_t>(H + i)]);
    }
    std::vector<double> rh(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i)
        rh[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] * h_in[static_cast<std::size_t>(i)];
    // n-gate recurrent term uses r o h
    matvec_acc(P.w_rec.data() + static_cast<std::size_t>(2 * H) * H, rh.data(),
               a.data() + 2 * H, H, H);
    std::vector<double> n(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i) n[static_cast<std::size_t>(i)] = std::tanh(a[static_cast<std::size_t>(2 * H + i)]);
    h_out.assign(static_cast<std::size_t>(H), 0.0);
    for (int i = 0; i < H; ++i)
        h_out[static_cast<std::size_t>(i)] =
            (1.0 - z[static_cast<std::size_t>(i)]) * n[static_cast<std::size_t>(i)] +
            z[static_cast<std::size_t>(i)] * h_in[static_cast<std::size_t>(i)];
    logits.assign(static_cast<std::size_t>(L), 0.0);
    for (int i = 0; i < L; ++i) logits[static_cast<std::size_t>(i)] = P.b_out[static_cast<std::size_t>(i)];
    matvec_acc(P.w_out.data(), h_out.data(), logits.data(), L, H);
    if (cache) {
        cache->x = x;
        cache->h_prev = h_in;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->n = std::move(n);
        cache->rh = std::move(rh);
        cache->h_out = h_out;
    }
}

}  // namespace

void policy_step(const PolicyParams& params, const std::vector<double>& x,
                 const std::vector<double>& h_in, std::vector<double>& h_out,
                 std::vector<double>& logits) {
    gru_forward(params, x, h_in, h_out, logits, nullptr);
}

std::vector<double> masked_softmax(const std::vector<double>& logits,
                                   const std::vector<double>& mask) {
    std::vector<double> p(logits.size(), 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i)
        if (mask[i] == 0.0) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (mask[i] != 0.0) continue;
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

namespace {

int draw_from(const std::vector<double>& p, Rng& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    return last;  // numerical residue lands on the final positive entry
}

}  // namespace

SampledSequence sample_sequence(const PolicyParams& params, const Library& lib,
                                const ConstraintConfig& cfg, const FirstTokenDist& first_dist,
                                Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        SampledSequence out;
        GenContext ctx;
        // first token: elite statistics restricted by the mask
        {
            auto mask = prior_mask(ctx, cfg, lib);
            std::vector<double> p(first_dist.p);
            double sum = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (mask[i] != 0.0) p[i] = 0.0;
                sum += p[i];
            }
            for (double& v : p) v /= sum;
            int a = draw_from(p, rng);
            out.sequence.push_back(a);
            out.per_step_logprob.push_back(std::log(p[static_cast<std::size_t>(a)]));
            out.log_prob += out.per_step_logprob.back();
            ctx.push_token(lib.token(a));
        }
        std::vector<double> h(static_cast<std::size_t>(params.hidden), 0.0), h_next, logits;
        while (!ctx.complete() && ctx.tokens_emitted() < cfg.max_tokens) {
            auto x = encode_step_input(out.sequence.back(), ctx, cfg, lib);
            policy_step(params, x, h, h_next, logits);
            h = h_next;
            auto mask = prior_mask(ctx, cfg, lib);
            auto p = masked_softmax(logits, mask);
            int a = draw_from(p, rng);
            out.sequence.push_back(a);
            out.per_step_logprob.push_back(std::log(p[static_cast<std::size_t>(a)]));
            out.log_prob += out.per_step_logprob.back();
            ctx.push_token(lib.token(a));
        }
        if (ctx.complete() && check_sequence(out.sequence, cfg, lib).empty()) return out;
    }
    throw ResampleExhausted();
}

double sequence_logprob_and_grad(const PolicyParams& params, const std::vector<int>& sequence,
                                 const Library& lib, const ConstraintConfig& cfg,
                                 PolicyGrad& grad, double advantage, double entropy_coeff) {
    const int H = params.hidden, D = params.input_dim, L = params.n_tokens;
    if (sequence.size() < 2) return 0.0;  // first token carries no parameter gradient

    // forward with caches
    GenContext ctx;
    ctx.push_token(lib.token(sequence.front()));
    std::vector<StepCache> steps;
    steps.reserve(sequence.size() - 1);
    std::vector<double> h(static_cast<std::size_t>(H), 0.0), h_next, logits;
    std::vector<std::vector<double>> masks;
    double logprob = 0.0;
    for (std::size_t t = 1; t < sequence.size(); ++t) {
        StepCache cache;
        auto x = encode_step_input(sequence[t - 1], ctx, cfg, lib);
        gru_forward(params, x, h, h_next, logits, &cache);
        auto mask = prior_mask(ctx, cfg, lib);
        cache.p = masked_softmax(logits, mask);
        cache.action = sequence[t];
        logprob += std::log(cache.p[static_cast<std::size_t>(cache.action)]);
        h = h_next;
        steps.push_back(std::move(cache));
        masks.push_back(std::move(mask));
        ctx.push_token(lib.token(sequence[t]));
    }

    // flat-gradient views in PolicyParams order
    double* g_w_in = grad.g.data();
    double* g_w_rec = g_w_in + params.w_in.size();
    double* g_b = g_w_rec + params.w_rec.size();
    double* g_w_out = g_b + params.b_gate.size();
    double* g_b_out = g_w_out + params.w_out.size();

    std::vector<double> dh(static_cast<std::size_t>(H), 0.0);
    std::vector<double> dlogits(static_cast<std::size_t>(L));
    std::vector<double> dz(static_cast<std::size_t>(H)), dr(static_cast<std::size_t>(H)),
        dn(static_cast<std::size_t>(H)), da(static_cast<std::size_t>(H)),
        drh(static_cast<std::size_t>(H)), dh_prev(static_cast<std::size_t>(H));

    for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
        const StepCache& s = steps[static_cast<std::size_t>(t)];
        // d log p(a) / d logit_j = 1{j=a} - p_j on allowed tokens, 0 on masked
        double ent = 0.0;
        if (entropy_coeff != 0.0)
            for (double pv : s.p)
                if (pv > 0.0) ent -= pv * std::log(pv);
        for (int j = 0; j < L; ++j) {
            const double pj = s.p[static_cast<std::size_t>(j)];
            double d = 0.0;
            if (masks[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] == 0.0) {
                d = advantage * ((j == s.action ? 1.0 : 0.0) - pj);
                if (entropy_coeff != 0.0 && pj > 0.0)
                    d += entropy_coeff * (-pj * (std::log(pj) + ent));
            }
            dlogits[static_cast<std::size_t>(j)] = d;
        }
        // output layer
        outer_acc(g_w_out, dlogits.data(), s.h_out.data(), L, H);
        for (int j = 0; j < L; ++j) g_b_out[j] += dlogits[static_cast<std::size_t>(j)];
        std::vector<double> dh_out(dh);
        matvec_t_acc(params.w_out.data(), dlogits.data(), dh_out.data(), L, H);

        // GRU backward: h' = (1-z) o n + z o h_prev
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (int i = 0; i < H; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            dz[k] = dh_out[k] * (s.h_prev[k] - s.n[k]);
            dn[k] = dh_out[k] * (1.0 - s.z[k]);
            dh_prev[k] = dh_out[k] * s.z[k];
        }
        // n gate (tanh), recurrent input r o h_prev
        for (int i = 0; i < H; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            da[k] = dn[k] * (1.0 - s.n[k] * s.n[k]);
        }
        outer_acc(g_w_in + static_cast<std::size_t>(2 * H) * D, da.data(), s.x.data(), H, D);
        outer_acc(g_w_rec + static_cast<std::size_t>(2 * H) * H, da.data(), s.rh.data(), H, H);
        for (int i = 0; i < H; ++i) g_b[2 * H + i] += da[static_cast<std::size_t>(i)];
        std::fill(drh.begin(), drh.end(), 0.0);
        matvec_t_acc(params.w_rec.data() + static_cast<std::size_t>(2 * H) * H, da.data(),
                     drh.data(), H, H);
        for (int i = 0; i < H; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            dr[k] = drh[k] * s.h_prev[k];
            dh_prev[k] += drh[k] * s.r[k];
        }
        // z gate (sigmoid)
        for (int i = 0; i < H; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            da[k] = dz[k] * s.z[k] * (1.0 - s.z[k]);
        }
        outer_acc(g_w_in, da.data(), s.x.data(), H, D);
        outer_acc(g_w_rec, da.data(), s.h_prev.data(), H, H);
        for (int i = 0; i < H; ++i) g_b[i] += da[static_cast<std::size_t>(i)];
        matvec_t_acc(params.w_rec.data(), da.data(), dh_prev.data(), H, H);
        // r gate (sigmoid)
        for (int i = 0; i < H; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            da[k] = dr[k] * s.r[k] * (1.0 - s.r[k]);
        }
        outer_acc(g_w_in + static_cast<std::size_t>(H) * D, da.data(), s.x.data(), H, D);
        outer_acc(g_w_rec + static_cast<std::size_t>(H) * H, da.data(), s.h_prev.data(), H, H);
        for (int i = 0; i < H; ++i) g_b[H + i] += da[static_cast<std::size_t>(i)];
        matvec_t_acc(params.w_rec.data() + static_cast<std::size_t>(H) * H, da.data(),
                     dh_prev.data(), H, H);

        dh = dh_prev;
    }
    return logprob;
}

double sequence_logprob(const PolicyParams& params, const std::vector<int>& sequence,
                        const Library& lib, const ConstraintConfig& cfg,
                        const FirstTokenDist& first_dist) {
    if (sequence.empty()) return 0.0;
    GenContext ctx;
    double lp = 0.0;
    {
        auto mask = prior_mask(ctx, cfg, lib);
        std::vector<double> p(first_dist.p);
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (mask[i] != 0.0) p[i] = 0.0;
            sum += p[i];
        }
        lp += std::log(p[static_cast<std::size_t>(sequence.front())] / sum);
        ctx.push_token(lib.token(sequence.front()));
    }
    std::vector<double> h(static_cast<std::size_t>(params.hidden), 0.0), h_next, logits;
    for (std::size_t t = 1; t < sequence.size(); ++t) {
        auto x = encode_step_input(sequence[t - 1], ctx, cfg, lib);
        policy_step(params, x, h, h_next, logits);
        h = h_next;
        auto mask = prior_mask(ctx, cfg, lib);
        auto p = masked_softmax(logits, mask);
        lp += std::log(p[static_cast<std::size_t>(sequence[t])]);
        ctx.push_token(lib.token(sequence[t]));
    }
    return lp;
}

}  // namespace rsl
