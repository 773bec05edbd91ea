#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsl/constfit.hpp"
#include "rsl/rng.hpp"

using namespace rsl;

namespace {

struct Synth {
    std::vector<double> X;  // n x 4
    std::vector<double> y;
    std::size_t n = 0;
};

Synth grid_data(const std::function<double(double)>& lnf_of_eps, std::size_t n = 12) {
    Synth s;
    s.n = n;
    for (std::size_t i = 0; i < n; ++i) {
        double eps = 0.1 + 0.08 * static_cast<double>(i);
        s.X.insert(s.X.end(), {eps, 0.5, 0.3, 0.2});
        s.y.push_back(std::exp(lnf_of_eps(eps)));
    }
    return s;
}

}  // namespace

TEST_CASE("lone constant fits the log-mean exactly") {
    Library lib = Library::standard();
    Expression c;
    c.sequence = {lib.find("C")};
    Synth s = grid_data([](double) { return std::log(1000.0); });
    FitConfig cfg;
    auto fit = fit_constants(c, lib, s.X, s.n, 4, s.y, cfg);
    REQUIRE(fit.constants.size() == 1);
    CHECK(fit.constants[0] == doctest::Approx(std::log(1000.0)).epsilon(1e-9));
    CHECK(fit.rmse == doctest::Approx(0.0).scale(1).epsilon(1e-6));
    CHECK(fit.converged);
}

TEST_CASE("generate-and-recover: add (mul C eps_a) C") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=add mul C eps_a C; constants=1,1", lib);
    Synth s = grid_data([](double eps) { return 2.0 * eps + 5.0; });
    FitConfig cfg;
    auto fit = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    REQUIRE(fit.constants.size() == 2);
    CHECK(fit.constants[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.constants[1] == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero-constant structure is a plain evaluation") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=add eps_a gamma_a; constants=", lib);
    Synth s = grid_data([](double eps) { return eps + 0.5; });
    FitConfig cfg;
    auto fit = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    CHECK(fit.constants.empty());
    CHECK(fit.rmse == doctest::Approx(0.0).scale(1).epsilon(1e-9));
    CHECK(fit.n_restarts_used == 0);
}

TEST_CASE("returned RMSE beats every start point") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=add mul C eps_a mul C gamma_a; constants=1,1", lib);
    Rng noise(4);
    Synth s = grid_data([&](double eps) { return 1.5 * eps + noise.uniform(4.4, 4.6); });
    FitConfig cfg;
    auto fit = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    // objective at each protocol start point
    Expression work = st;
    for (int k = 0; k < cfg.restarts; ++k) {
        work.constants = {1.0, 1.0};
        if (k > 0) {
            // not reproducing the internal seeds here; all-ones and a spread
            // of deterministic points stand in for the start set
            work.constants = {-10.0 + 2.5 * k, 10.0 - 2.5 * k};
        }
        auto pred = predict_cycles(work, lib, s.X, s.n, 4, true);
        bool finite = true;
        for (double v : pred) finite &= std::isfinite(v);
        if (!finite) continue;
        CHECK(fit.rmse <= rmse_cycles(s.y, pred) + 1e-12);
    }
}

TEST_CASE("fixed point: refitting from the optimum does not improve") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=add mul C eps_a C; constants=1,1", lib);
    Rng noise(9);
    Synth s = grid_data([&](double eps) { return 2.0 * eps + 5.0 + noise.uniform(-0.05, 0.05); });
    FitConfig cfg;
    auto fit = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    FitConfig warm = cfg;
    warm.extra_start = fit.constants;
    auto refit = fit_constants(st, lib, s.X, s.n, 4, s.y, warm);
    CHECK(refit.rmse >= fit.rmse - 1e-9 * std::abs(fit.rmse));
}

TEST_CASE("row-order permutation gives bit-identical results") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=add mul C eps_a C; constants=1,1", lib);
    Rng noise(11);
    Synth s = grid_data([&](double eps) { return 1.2 * eps + 4.0 + noise.uniform(-0.1, 0.1); });
    FitConfig cfg;
    auto a = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    // rotate rows
    std::vector<double> X2, y2;
    for (std::size_t i = 0; i < s.n; ++i) {
        std::size_t j = (i + 5) % s.n;
        X2.insert(X2.end(), s.X.begin() + static_cast<long>(4 * j),
                  s.X.begin() + static_cast<long>(4 * j + 4));
        y2.push_back(s.y[j]);
    }
    auto b = fit_constants(st, lib, X2, s.n, 4, y2, cfg);
    CHECK(a.rmse == b.rmse);
    REQUIRE(a.constants.size() == b.constants.size());
    for (std::size_t i = 0; i < a.constants.size(); ++i) CHECK(a.constants[i] == b.constants[i]);
}

TEST_CASE("all-non-finite starts leave rmse infinite") {
    Library lib = Library::standard();
    // raw transform: ln(eps - eps) = ln(0) at every sample and start
    Expression st = parse_serialized("tokens=mul C ln sub eps_a eps_a; constants=1", lib);
    Synth s = grid_data([](double eps) { return eps; });
    FitConfig cfg;
    cfg.log_life = false;
    auto fit = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    CHECK(!std::isfinite(fit.rmse));
    CHECK(!fit.converged);
    CHECK(fit.n_restarts_used == 0);
}

TEST_CASE("empty data throws") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=C; constants=1", lib);
    FitConfig cfg;
    CHECK_THROWS_AS(fit_constants(st, lib, {}, 0, 4, {}, cfg), std::invalid_argument);
}

TEST_CASE("deterministic across repeated calls") {
    Library lib = Library::standard();
    Expression st = parse_serialized("tokens=div C add eps_a gamma_a; constants=1", lib);
    Synth s = grid_data([](double eps) { return 3.0 / (eps + 0.5) + 2.0; });
    FitConfig cfg;
    auto a = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    auto b = fit_constants(st, lib, s.X, s.n, 4, s.y, cfg);
    CHECK(a.rmse == b.rmse);
    CHECK(a.constants == b.constants);
}
