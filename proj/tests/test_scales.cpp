#include <cmath>
#include <memory>

#include "doctest.h"
#include "ultrascale/scales.hpp"

using namespace us;

namespace {

GenFn gen(GenKind kind, std::vector<double> grid, double r = 2.0) {
    GenFnSpec s;
    s.kind = kind;
    s.r = r;
    return make_genfn(s, std::move(grid));
}

}  // namespace

TEST_SUITE("scales") {

TEST_CASE("zeta of the parametric families") {
    GenFn g = gen(GenKind::GevreyGen, {1, 2, 4});
    CHECK(g.zeta(2, std::exp(1.0)) == doctest::Approx(2 * std::exp(1.0)));
    CHECK(g.zeta(2, 0.5) == 0.0);
    GenFn p = gen(GenKind::PowerGen, {1, 2}, 3.0);
    CHECK(p.zeta(2, 3) == doctest::Approx(54.0));
    CHECK(p.next_param(2, +1) == 4.0);
    CHECK(p.next_param(2, -1) == 1.0);
}

TEST_CASE("scale_to_matrix builds k! e^{zeta} or e^{zeta}") {
    GenFn p = gen(GenKind::PowerGen, {1, 2}, 2.0);
    WeightMatrix s = scale_to_matrix(p, 20, Flavor::Strong);
    WeightMatrix w = scale_to_matrix(p, 20, Flavor::Weak);
    CHECK(s.seq_at(2).log_M(5) == doctest::Approx(std::lgamma(6.0) + 50));
    CHECK(w.seq_at(2).log_M(5) == doctest::Approx(50.0));
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(gen(GenKind::GevreyGen, {}), Error);
    CHECK_THROWS_AS(gen(GenKind::GevreyGen, {2, 1}), Error);
    GenFnSpec s;
    s.kind = GenKind::FromOmega;
    CHECK_THROWS_AS(make_genfn(s, {1, 2}), Error);
    s.kind = GenKind::Custom;
    // decreasing in t violates the axioms
    s.custom = [](double l, double t) { return -l * t; };
    CHECK_THROWS_AS(make_genfn(s, {1, 2}), Error);
    CHECK_THROWS_AS(parse_scale_cond("Hexagon"), Error);
}

TEST_CASE("PseudoHom witnesses") {
    GenFn g = gen(GenKind::GevreyGen, {1, 2, 4});
    Verdict vg = check_scale_condition(g, ScaleCond::PseudoHom);
    REQUIRE(vg.status == Status::Holds);
    for (double l : {1.0, 2.0, 4.0})
        for (double a : {1.5, 2.0}) {
            const std::string key = "[" + fmt_double(l) + ",alpha=" + fmt_double(a) + "]";
            INFO(key);
            CHECK(vg.witnesses.at("partner" + key) == doctest::Approx(a * l));
            CHECK(vg.witnesses.at("q" + key) == 1.0);
            // lambda alpha t log(alpha t) = alpha lambda t log t + lambda alpha log(alpha) t
            CHECK(vg.witnesses.at("gamma" + key) >= l * a * std::log(a) * 0.99);
        }

    for (double r : {2.0, 3.0}) {
        GenFn p = gen(GenKind::PowerGen, {1, 2, 4}, r);
        Verdict v = check_scale_condition(p, ScaleCond::PseudoHom);
        REQUIRE(v.status == Status::Holds);
        for (double l : {1.0, 2.0, 4.0})
            for (double a : {1.5, 2.0}) {
                const std::string key = "[" + fmt_double(l) + ",alpha=" + fmt_double(a) + "]";
                CHECK(v.witnesses.at("partner" + key) == doctest::Approx(std::pow(a, r) * l));
                CHECK(v.witnesses.at("gamma" + key) == 0.0);
            }
    }
}

TEST_CASE("Square holds for PowerGen{r} iff r <= 2") {
    for (auto grid : {std::vector<double>{1, 2, 4}, std::vector<double>{0.5, 1, 8}}) {
        CHECK(check_scale_condition(gen(GenKind::PowerGen, grid, 1.5), ScaleCond::Square).status == Status::Holds);
        CHECK(check_scale_condition(gen(GenKind::PowerGen, grid, 2.0), ScaleCond::Square).status == Status::Holds);
        CHECK(check_scale_condition(gen(GenKind::PowerGen, grid, 3.0), ScaleCond::Square).status == Status::Fails);
    }
}

TEST_CASE("FromOmega(omega_2) passes both triangle conditions") {
    GenFnSpec s;
    s.kind = GenKind::FromOmega;
    s.omega = std::make_shared<const WeightFn>(make_weight_fn(OmegaS{2.0}));
    GenFn z = make_genfn(s, {1, 2, 4});
    // phi*(t) = t^2/4, so zeta_lambda(t) = lambda t^2 / 4
    CHECK(z.zeta(2, 10) == doctest::Approx(50.0).epsilon(1e-6));
    CHECK(check_scale_condition(z, ScaleCond::TriRight).status == Status::Holds);
    CHECK(check_scale_condition(z, ScaleCond::TriLeft).status == Status::Holds);
}

TEST_CASE("scale report on GevreyGen") {
    ScaleReport r = scale_report(gen(GenKind::GevreyGen, {1, 2, 4}));
    CHECK(r.verdicts.size() == 6);
    CHECK(r.fitting);
    CHECK(r.verdicts.at(ScaleCond::Square).status == Status::Holds);
}

TEST_CASE("classification of scale pairs") {
    GenFn g = gen(GenKind::GevreyGen, {1, 2, 4});
    PairClassification self = classify_scale_pair(g, g, 1.0);
    REQUIRE(self.comparable);
    CHECK(*self.comparable);
    CHECK(self.rou_preceq);
    CHECK(self.beu_preceq);
    CHECK_FALSE(self.rou_lhd_beu);

    GenFn g2 = gen(GenKind::GevreyGen, {1, 2});
    CHECK_THROWS_AS(classify_scale_pair(g, g2, 2.0), Error);
    PairClassification mixed = classify_scale_pair(g, g2, 2.0, false);
    CHECK_FALSE(mixed.comparable);
    CHECK(mixed.mixed_roumieu.status == Status::Holds);
    // the dilated member needs a partner at least alpha lambda
    for (double l : {1.0, 2.0, 4.0}) CHECK(mixed.mixed_roumieu.witnesses.at("partner[" + fmt_double(l) + "]") >= 2 * l);
}

TEST_CASE("shape-indexed PowerGen: mixed Roumieu partners move up the shape ladder") {
    GenFnSpec s;
    s.kind = GenKind::PowerGen;
    s.shape_indexed = true;
    GenFn z = make_genfn(s, {1.5, 2, 3});
    CHECK(z.zeta(3, 2) == doctest::Approx(8.0));
    CHECK(check_scale_condition(z, ScaleCond::PseudoHom).status == Status::Inconclusive);
    PairClassification c = classify_scale_pair(z, z, 2.0);
    REQUIRE(c.mixed_roumieu.status == Status::Holds);
    CHECK(c.mixed_roumieu.witnesses.at("partner[1.5]") == 2.0);
    CHECK(c.mixed_roumieu.witnesses.at("partner[2]") == 3.0);
    CHECK(c.mixed_roumieu.witnesses.at("partner[3]") == 6.0);
    CHECK(c.mixed_roumieu.witnesses.at("partner_off_grid") == 1.0);
}

TEST_CASE("LogIterGen sits strictly below GevreyGen") {
    GenFnSpec s;
    s.kind = GenKind::LogIterGen;
    s.j = 2;
    GenFn z = make_genfn(s, {1, 2, 4});
    // lambda t log log log(t + e^e)
    CHECK(z.zeta(2, 10) == doctest::Approx(20 * std::log(std::log(std::log(10 + std::exp(std::exp(1.0)))))));
    GenFn g = gen(GenKind::GevreyGen, {1, 2, 4});
    PairClassification c = classify_scale_pair(z, g, 1.0);
    CHECK(c.rou_lhd_beu);
}

}
