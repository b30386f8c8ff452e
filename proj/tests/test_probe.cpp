#include <cmath>
#include <random>

#include "doctest.h"
#include "ultrascale/probe.hpp"

using namespace us;

namespace {

constexpr double kPi = 3.14159265358979323846;

using Coeffs = std::map<MultiIndex, cplx>;

// Termwise oracle: D^alpha e^{i xi x} = xi^alpha e^{i xi x}, so ||P^k u||^2 = sum |p(xi)|^{2k} |c_xi|^2.
std::vector<double> termwise_log_norms(const std::vector<std::pair<MultiIndex, cplx>>& modes, const Coeffs& P, int K) {
    std::vector<double> out;
    for (int k = 0; k <= K; ++k) {
        long double acc = 0;
        for (const auto& [xi, c] : modes) {
            std::complex<long double> p = 0;
            for (const auto& [a, v] : P)
                p += std::complex<long double>(v.real(), v.imag()) * std::pow(static_cast<long double>(xi[0]), a[0]) *
                     std::pow(static_cast<long double>(xi[1]), a[1]);
            acc += std::pow(std::norm(p), static_cast<long double>(k)) * std::norm(std::complex<long double>(c.real(), c.imag()));
        }
        out.push_back(static_cast<double>(0.5L * std::log(acc)));
    }
    return out;
}

}  // namespace

TEST_SUITE("probe") {

TEST_CASE("operator builder and ellipticity") {
    BuiltOperator lap = build_operator({{{2, 0}, 1.0}, {{0, 2}, 1.0}}, 2);
    CHECK(lap.op.order_d == 2);
    CHECK(lap.ellipticity.elliptic);
    CHECK(lap.op.symbol(3, 4) == cplx(25, 0));
    BuiltOperator d1 = build_operator({{{1, 0}, 1.0}}, 2);
    CHECK_FALSE(d1.ellipticity.elliptic);
    CHECK(std::abs(d1.ellipticity.min_direction[0]) < 1e-12);
    CHECK(std::abs(std::abs(d1.ellipticity.min_direction[1]) - 1) < 1e-12);
    BuiltOperator mixed = build_operator({{{1, 0}, cplx(0, 1)}, {{0, 0}, 3.0}}, 1);
    CHECK(mixed.op.principal(2) == cplx(0, 2));
    CHECK(mixed.op.symbol(2) == cplx(3, 2));
    CHECK_THROWS_AS(build_operator({{{0, 0}, 1.0}}, 1), Error);
    CHECK_THROWS_AS(build_operator({{{1, 1}, 1.0}}, 1), Error);
    CHECK_THROWS_AS(build_operator({{{1, 0}, 1.0}}, 3), Error);
}

TEST_CASE("grid fields: modes, samples and Parseval") {
    GridField u = GridField::from_modes(1, 16, {{{3, 0}, cplx(2, 0)}, {{-2, 0}, cplx(0, 1)}});
    CHECK(u.spectral_norm() == doctest::Approx(std::sqrt(5.0)));
    CHECK(u.parseval_error() < 1e-14);
    // u(x) = 2 e^{3ix} + i e^{-2ix} at x = 0
    CHECK(std::abs(u.samples()[0] - cplx(2, 1)) < 1e-13);
    GridField v = GridField::from_samples(1, 16, u.samples());
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(v.spectrum()[i] - u.spectrum()[i]) < 1e-14);
    CHECK(u.freq(15) == -1);
    CHECK_THROWS_AS(GridField::from_modes(1, 12, {}), Error);
    CHECK_THROWS_AS(GridField::from_modes(1, 16, {{{8, 0}, 1.0}}), Error);
    CHECK_THROWS_AS(GridField::from_samples(1, 16, std::vector<cplx>(15)), Error);
}

TEST_CASE("apply multiplies by the symbol") {
    BuiltOperator P = build_operator({{{2, 0}, 1.0}, {{0, 0}, 1.0}}, 1);
    GridField u = GridField::from_modes(1, 32, {{{5, 0}, 1.0}});
    GridField w = u.apply(P.op);
    CHECK(w.spectral_norm() == doctest::Approx(26.0));
    GridField u2 = GridField::from_modes(2, 16, {{{1, 1}, 1.0}});
    CHECK_THROWS_AS(u2.apply(P.op), Error);
}

TEST_CASE("iterate norms match repeated application and the termwise oracle") {
    BuiltOperator P = build_operator({{{1, 0}, 1.0}, {{0, 2}, cplx(0, -1)}, {{0, 0}, 0.5}}, 2);
    std::vector<std::pair<MultiIndex, cplx>> modes{{{1, 2}, cplx(1, 1)}, {{-3, 0}, 0.25}, {{0, -5}, cplx(0, 2)}};
    GridField u = GridField::from_modes(2, 16, modes);
    std::vector<double> ln = iterate_norms(u, P.op, 12);
    std::vector<double> oracle = termwise_log_norms(modes, P.op.coeffs, 12);
    GridField w = u;
    for (int k = 0; k <= 12; ++k) {
        CHECK(ln[k] == doctest::Approx(oracle[k]).epsilon(1e-12));
        CHECK(ln[k] == doctest::Approx(std::log(w.spectral_norm())).epsilon(1e-10));
        w = w.apply(P.op);
    }
    CHECK(iterate_norms(u, P.op, 12, ExecPolicy::Serial) == ln);
    GridField zero = GridField::from_samples(1, 8, std::vector<cplx>(8));
    CHECK_THROWS_AS(iterate_norms(zero, build_operator({{{1, 0}, 1.0}}, 1).op, 3), Error);
}

TEST_CASE("growth fit recovers a planted Gevrey profile") {
    const int d = 2;
    std::vector<double> ln;
    for (int k = 0; k <= 30; ++k) ln.push_back(std::log(5.0) + k * d * std::log(3.0) + 2 * std::lgamma(d * k + 1.0));
    FitReport r = fit_growth(ln, d, {FitHypothesis{}});
    REQUIRE(!r.ranking.empty());
    CHECK(r.ranking[0].s == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(r.ranking[0].h == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(r.ranking[0].C == doctest::Approx(5.0).epsilon(1e-2));
    CHECK_FALSE(r.geometric);
}

TEST_CASE("growth fit: geometric data, fixed hypotheses and errors") {
    std::vector<double> geo;
    for (int k = 0; k <= 20; ++k) geo.push_back(k * std::log(7.0));
    CHECK(fit_growth(geo, 1, {FitHypothesis{}}).geometric);

    std::vector<double> nqr;
    LogWeightSeq N = build_sequence(NQR{2, 2}, 40);
    for (int k = 0; k <= 20; ++k) nqr.push_back(N.log_M(k));
    FitHypothesis fixed;
    fixed.kind = HypKind::Fixed;
    fixed.family = NQR{2, 2};
    fixed.label = "nqr";
    FitReport r = fit_growth(nqr, 1, {FitHypothesis{}, fixed});
    CHECK(r.ranking[0].label == "nqr");
    CHECK(r.ranking[0].residual < 1e-9);

    CHECK_THROWS_AS(fit_growth(std::vector<double>(5, 1.0), 1, {FitHypothesis{}}), Error);
    CHECK_THROWS_AS(fit_growth(std::vector<double>(12, -INFINITY), 1, {FitHypothesis{}}), Error);
}

TEST_CASE("Gaussian moments against the closed form") {
    // int_R exp(m s - s^2/(4 l)) / sqrt(4 pi l) ds = exp(l m^2)
    for (double l : {0.5, 1.0, 2.0})
        for (double m : {0.0, 1.0, 3.0}) {
            CHECK(log_gaussian_moment(l, m, -INFINITY, INFINITY) == doctest::Approx(l * m * m).epsilon(1e-12).scale(1));
            // half line: exp(l m^2) erfc(-m sqrt(l)) / 2
            const double half = l * m * m + std::log(0.5 * std::erfc(-m * std::sqrt(l)));
            CHECK(log_gaussian_moment(l, m, 0.0, INFINITY) == doctest::Approx(half).epsilon(1e-12).scale(1));
        }
    QuadSpec narrow;
    narrow.window = 2;
    CHECK_THROWS_AS(log_gaussian_moment(1, 1, -INFINITY, INFINITY, narrow), Error);
    CHECK_THROWS_AS(log_gaussian_moment(1, 1, 2, 1), Error);
}

TEST_CASE("Gaussian-Mellin identity") {
    for (double l : {0.5, 1.0, 2.0}) {
        MellinCheck m = gaussian_mellin_check(l, 15);
        CHECK(m.max_rel_error < 1e-10);
        CHECK(m.rel_error.size() == 15);
    }
    QuadSpec fixed;
    fixed.adaptive = false;
    fixed.panels = 4;
    CHECK(gaussian_mellin_check(1.0, 15, fixed).max_rel_error < 1e-9);
}

TEST_CASE("epsilon bound and bump") {
    CHECK(metivier_epsilon_bound(1, 1, 0.5) == doctest::Approx(0.414214).epsilon(1e-6));
    // d = 1 reduces to r / (r + sqrt(lambda)) with r = sqrt(lambda - lambda0)
    CHECK(metivier_epsilon_bound(1, 3, 1) == doctest::Approx(std::sqrt(2.0) / (std::sqrt(2.0) + std::sqrt(3.0))));
    CHECK_THROWS_AS(metivier_epsilon_bound(1, 0.5, 1), Error);
    BumpSpec b{0.5};
    CHECK(bump(0.3, b) == 1.0);
    CHECK(bump(-1.2, b) == 0.0);
    CHECK(bump(0.75, b) == doctest::Approx(0.5));
    double prev = 1;
    for (double y = 0.5; y <= 1.0; y += 0.01) {
        CHECK(bump(y, b) <= prev);
        prev = bump(y, b);
    }
}

TEST_CASE("directional growth ratios against erfc") {
    MetivierParams p;
    DirectionalGrowth g = directional_growth_check(p, 20);
    CHECK(g.monotone);
    CHECK(g.max_identity_error < 1e-12);
    for (const GrowthRow& r : g.rows) {
        // remainder / N = erfc((k+1) sqrt(l')) / 2
        const double oracle = 1 - 0.5 * std::erfc((r.k + 1) * std::sqrt(p.lambda_prime));
        CHECK(r.ratio == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(std::abs(g.rows.back().ratio - 1) < 1e-6);
    MetivierParams bad = p;
    bad.epsilon = 0.5;
    CHECK_THROWS_AS(directional_growth_check(bad, 5), Error);
}

TEST_CASE("Metivier vector at x0 and on a periodic grid") {
    MetivierParams p;
    p.x0 = kPi;
    std::vector<double> xs;
    for (int i = 0; i < 64; ++i) xs.push_back(2 * kPi * i / 64);
    MetivierVector mv = construct_metivier_vector(p, xs);
    // bump = 1 at x0, so u(x0) = e^{l'} erfc(-sqrt(l')) / 2
    const double at_x0 = std::exp(p.lambda_prime) * 0.5 * std::erfc(-std::sqrt(p.lambda_prime));
    CHECK(std::abs(mv.u[32] - at_x0) < 1e-10);
    CHECK(mv.tail_bound < 1e-10);
    CHECK(mv.epsilon_bound == doctest::Approx(0.414214).epsilon(1e-6));
    // far from x0 the bump cuts everything off
    CHECK(std::abs(mv.u[0]) == 0.0);
    GridField f = mv.to_field();
    CHECK(f.parseval_error() < 1e-12);
    MetivierVector ser = construct_metivier_vector(p, xs, ExecPolicy::Serial);
    CHECK(ser.u == mv.u);
    CHECK_THROWS_AS(construct_metivier_vector(p, {0.0, 1.0, 2.0}).to_field(), Error);
}

}
