#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsl/policy.hpp"

using namespace rsl;

namespace {

// a fixed valid sequence of the requested length, built from binary ops
std::vector<int> chain_sequence(const Library& lib, int length) {
    // k binary functions followed by k+1 terminals gives 2k+1 tokens
    REQUIRE(length % 2 == 1);
    int k = (length - 1) / 2;
    std::vector<int> seq;
    for (int i = 0; i < k; ++i) seq.push_back(lib.find(i % 2 ? "mul" : "add"));
    const char* terms[] = {"eps_a", "gamma_a", "sigma_over_E", "tau_over_G"};
    for (int i = 0; i <= k; ++i) seq.push_back(lib.find(terms[i % 4]));
    return seq;
}

ConstraintConfig cfg_for(const Library& lib, const std::vector<int>& seq) {
    ConstraintConfig cfg;
    cfg.l = count_functions(seq, lib);
    if (cfg.l < 1) cfg.l = 1;
    cfg.max_tokens = 4 * cfg.l + 1;
    return cfg;
}

}  // namespace

TEST_CASE("zero-initialized params give uniform masked softmax") {
    Library lib = Library::standard();
    PolicyParams p = PolicyParams::init(lib, 8, 1, 0.0);  // zero weights
    std::vector<double> h(8, 0.0), h2, logits;
    GenContext ctx;
    ctx.push_token(lib.token(lib.find("add")));
    auto x = encode_step_input(lib.find("add"), ctx, ConstraintConfig{}, lib);
    policy_step(p, x, h, h2, logits);
    for (double v : logits) CHECK(v == 0.0);
    std::vector<double> mask(static_cast<std::size_t>(lib.size()), 0.0);
    auto prob = masked_softmax(logits, mask);
    double sum = 0.0;
    for (double v : prob) {
        CHECK(v == doctest::Approx(1.0 / lib.size()));
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step determinism") {
    Library lib = Library::standard();
    PolicyParams p = PolicyParams::init(lib, 16, 99);
    std::vector<double> h(16, 0.25), a1, a2, l1, l2;
    GenContext ctx;
    ctx.push_token(lib.token(lib.find("div")));
    auto x = encode_step_input(lib.find("div"), ctx, ConstraintConfig{}, lib);
    policy_step(p, x, h, a1, l1);
    policy_step(p, x, h, a2, l2);
    CHECK(a1 == a2);
    CHECK(l1 == l2);
    for (double v : l1) CHECK(std::isfinite(v));
}

TEST_CASE("masked softmax zeroes forbidden tokens exactly") {
    Library lib = Library::standard();
    std::vector<double> logits(static_cast<std::size_t>(lib.size()), 0.3);
    std::vector<double> mask(static_cast<std::size_t>(lib.size()), 0.0);
    mask[0] = mask[3] = kMasked;
    auto p = masked_softmax(logits, mask);
    CHECK(p[0] == 0.0);
    CHECK(p[3] == 0.0);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled sequences always pass check_sequence and replay to the same log-prob") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    PolicyParams p = PolicyParams::init(lib, 24, 7);
    FirstTokenDist first = FirstTokenDist::uniform(lib, cfg);
    Rng rng(2211);
    for (int i = 0; i < 300; ++i) {
        auto s = sample_sequence(p, lib, cfg, first, rng);
        CHECK(check_sequence(s.sequence, cfg, lib).empty());
        double lp = sequence_logprob(p, s.sequence, lib, cfg, first);
        CHECK(lp == doctest::Approx(s.log_prob).epsilon(1e-10));
        // exp(log_prob) equals the product of the per-step probabilities
        double prod = 0.0;
        for (double v : s.per_step_logprob) prod += v;
        CHECK(prod == doctest::Approx(s.log_prob).epsilon(1e-12));
    }
}

TEST_CASE("identical seeds reproduce identical sequences") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    PolicyParams p = PolicyParams::init(lib, 16, 5);
    FirstTokenDist first = FirstTokenDist::uniform(lib, cfg);
    Rng a(314159), b(314159);
    for (int i = 0; i < 50; ++i) {
        auto sa = sample_sequence(p, lib, cfg, first, a);
        auto sb = sample_sequence(p, lib, cfg, first, b);
        CHECK(sa.sequence == sb.sequence);
        CHECK(sa.log_prob == sb.log_prob);
    }
}

TEST_CASE("uniform policy log-prob factorizes over allowed counts") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    PolicyParams p = PolicyParams::init(lib, 8, 1, 0.0);  // uniform logits
    FirstTokenDist first = FirstTokenDist::uniform(lib, cfg);
    Rng rng(8);
    auto s = sample_sequence(p, lib, cfg, first, rng);
    // recompute -sum(ln k_t) by replaying the masks
    GenContext ctx;
    double expect = 0.0;
    for (std::size_t t = 0; t < s.sequence.size(); ++t) {
        auto mask = prior_mask(ctx, cfg, lib);
        int k = 0;
        for (double m : mask) k += m == 0.0 ? 1 : 0;
        expect -= std::log(static_cast<double>(k));
        ctx.push_token(lib.token(s.sequence[t]));
    }
    CHECK(s.log_prob == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("gradient of a length-1 sequence is zero") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    PolicyParams p = PolicyParams::init(lib, 8, 3);
    PolicyGrad g(p);
    std::vector<int> seq{lib.find("eps_a")};
    double lp = sequence_logprob_and_grad(p, seq, lib, cfg, g);
    CHECK(lp == 0.0);
    CHECK(g.global_norm() == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Library lib = Library::standard();
    for (int hidden : {4, 64}) {
        for (int length : {3, 15}) {
            auto seq = chain_sequence(lib, length);
            ConstraintConfig cfg = cfg_for(lib, seq);
            REQUIRE(check_sequence(seq, cfg, lib).empty());
            PolicyParams p = PolicyParams::init(lib, hidden, 1000 + hidden + length);
            PolicyGrad g(p);
            sequence_logprob_and_grad(p, seq, lib, cfg, g);

            // central differences at h=1e-5 resolve about 1e-10 absolute, so
            // only coordinates with gradients above that noise floor can be
            // compared at 1e-4 relative
            Rng pick(derive_seed(42, hidden, length));
            const double h = 1e-5;
            int tested = 0;
            while (tested < 20) {
                std::size_t i = pick.index(p.parameter_count());
                PolicyParams pp = p, pm = p;
                pp.flat(i) += h;
                pm.flat(i) -= h;
                PolicyGrad dummy_p(pp), dummy_m(pm);
                double fp = sequence_logprob_and_grad(pp, seq, lib, cfg, dummy_p);
                double fm = sequence_logprob_and_grad(pm, seq, lib, cfg, dummy_m);
                double fd = (fp - fm) / (2 * h);
                double an = g.g[i];
                if (std::max(std::abs(fd), std::abs(an)) < 1e-5) continue;
                double rel = std::abs(fd - an) / std::max(std::abs(fd), std::abs(an));
                CHECK(rel < 1e-4);
                ++tested;
            }
        }
    }
}

TEST_CASE("perturbing masked-token logit rows leaves log-prob unchanged") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    // sequence starting with ln: unary tokens are masked at step 2
    std::vector<int> seq{lib.find("ln"), lib.find("add"), lib.find("eps_a"), lib.find("gamma_a")};
    cfg.l = 2;
    REQUIRE(check_sequence(seq, cfg, lib).empty());
    PolicyParams p = PolicyParams::init(lib, 8, 21);
    FirstTokenDist first = FirstTokenDist::uniform(lib, cfg);
    double lp0 = sequence_logprob(p, seq, lib, cfg, first);
    // bump the output bias of a token masked at every post-first step (exp)
    PolicyParams p2 = p;
    p2.b_out[static_cast<std::size_t>(lib.find("exp"))] += 3.0;
    // exp is masked by INSS at step 2 (inside ln) but legal later; instead use
    // the gradient statement: masked positions contribute zero gradient
    PolicyGrad g(p);
    sequence_logprob_and_grad(p, seq, lib, cfg, g);
    // locate b_out gradient block
    std::size_t off = p.w_in.size() + p.w_rec.size() + p.b_gate.size() + p.w_out.size();
    // at step 2 (after ln) unaries are masked; the only b_out gradients for
    // unary tokens can come from later steps where they are allowed but there
    // the function budget (l=2) is exhausted, so they are masked there too
    CHECK(g.g[off + static_cast<std::size_t>(lib.find("exp"))] == 0.0);
    CHECK(g.g[off + static_cast<std::size_t>(lib.find("sqrt"))] == 0.0);
    (void)lp0;
}

TEST_CASE("first-token distribution from elites with smoothing") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    std::vector<std::vector<int>> elites;
    for (int i = 0; i < 400; ++i) elites.push_back({lib.find("add")});
    for (int i = 0; i < 23; ++i) elites.push_back({lib.find("div")});
    auto d = update_first_token_dist(elites, lib, cfg);
    const double denom = 423.0 + 0.5 * lib.size();
    CHECK(d.p[static_cast<std::size_t>(lib.find("add"))] ==
          doctest::Approx((400 + 0.5) / denom).epsilon(1e-12));
    CHECK(d.p[static_cast<std::size_t>(lib.find("div"))] ==
          doctest::Approx((23 + 0.5) / denom).epsilon(1e-12));
    CHECK(d.p[static_cast<std::size_t>(lib.find("ln"))] ==
          doctest::Approx(0.5 / denom).epsilon(1e-12));
    double sum = 0.0;
    for (double v : d.p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    auto u = update_first_token_dist({}, lib, cfg);
    for (double v : u.p) CHECK(v == doctest::Approx(1.0 / lib.size()));
}

TEST_CASE("near-deterministic policy reproduces a target sequence") {
    Library lib = Library::standard();
    ConstraintConfig cfg;
    cfg.l = 1;
    cfg.max_tokens = 4;
    // force first token 'add' via a delta first_dist, then drive outputs hard
    FirstTokenDist first;
    first.p.assign(static_cast<std::size_t>(lib.size()), 0.0);
    first.p[static_cast<std::size_t>(lib.find("add"))] = 1.0;
    PolicyParams p = PolicyParams::init(lib, 8, 2, 0.0);
    p.b_out[static_cast<std::size_t>(lib.find("eps_a"))] = 25.0;  // softmax ~ delta
    Rng rng(5150);
    for (int i = 0; i < 20; ++i) {
        auto s = sample_sequence(p, lib, cfg, first, rng);
        REQUIRE(s.sequence.size() == 3);
        CHECK(s.sequence[0] == lib.find("add"));
        CHECK(s.sequence[1] == lib.find("eps_a"));
        CHECK(s.sequence[2] == lib.find("eps_a"));
    }
}

TEST_CASE("policy checkpoint round trip") {
    Library lib = Library::standard();
    PolicyParams p = PolicyParams::init(lib, 12, 77);
    p.save("/tmp/rsl_policy_test.txt");
    PolicyParams q = PolicyParams::load("/tmp/rsl_policy_test.txt", lib);
    REQUIRE(q.parameter_count() == p.parameter_count());
    for (std::size_t i = 0; i < p.parameter_count(); ++i) CHECK(q.flat(i) == p.flat(i));
}
