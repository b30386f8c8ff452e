#include <cmath>
#include <memory>

#include "doctest.h"
#include "ultrascale/conjugate.hpp"

using namespace us;

TEST_SUITE("conjugate") {

TEST_CASE("weight function evaluation") {
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    CHECK(w2(0.5) == 0.0);
    CHECK(w2(std::exp(3.0)) == doctest::Approx(9.0));
    CHECK(w2.phi(4.0) == doctest::Approx(16.0));
    WeightFn g = make_weight_fn(GevreyPower{2.0}, false);
    CHECK(g(16.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(make_weight_fn(OmegaS{0.0}), Error);
    CHECK_THROWS_AS(make_weight_fn(GevreyPower{0.5}), Error);
    CHECK(w2(std::exp(1.0)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_weight_fn(CustomTable{{1, 2, 3}, {0, 2, 1}}), Error);
}

TEST_CASE("Young conjugate of omega_2 is t^2/4") {
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    YoungConjugate c = young_conjugate(w2, linspace(0, 100, 201));
    for (std::size_t i = 0; i < c.grid().size(); ++i) {
        const double t = c.grid()[i], exact = t * t / 4;
        CHECK(c.values()[i] == doctest::Approx(exact).epsilon(1e-6).scale(1e-12));
        // argmax of s t - s^2 sits at s = t/2
        CHECK(c.argmax()[i] == doctest::Approx(t / 2).epsilon(1e-3).scale(1e-2));
    }
    CHECK(c.eval(13.7) == doctest::Approx(13.7 * 13.7 / 4).epsilon(1e-8));
}

TEST_CASE("Young conjugate agrees with the brute-force sup") {
    for (const WeightKind& k : {WeightKind{OmegaS{1.5}}, WeightKind{OmegaS{3.0}}, WeightKind{GevreyPower{2.0}}}) {
        WeightFn w = make_weight_fn(k);
        std::vector<double> ts = linspace(0, 40, 81);
        YoungConjugate c = young_conjugate(w, ts, 60.0);
        std::vector<double> bf = conjugate_bruteforce(w, ts, c.s_max(), 600001, ExecPolicy::Serial);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            INFO(w.label(), " t = ", ts[i]);
            // brute force is a lower bound accurate to O(ds^2)
            CHECK(c.values()[i] >= bf[i] - 1e-9);
            CHECK(c.values()[i] - bf[i] <= 1e-5 * std::max(1.0, std::abs(bf[i])));
        }
    }
}

TEST_CASE("associated matrix of omega_2") {
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    WeightMatrix W = associated_matrix(w2, {1, 2, 4}, 30);
    for (double lam : {1.0, 2.0, 4.0})
        for (long k = 0; k <= 30; ++k)
            CHECK(std::abs(W.seq_at(lam).log_M(k) - lam * k * k / 4) < 1e-6);
}

TEST_CASE("round trip M -> omega_M -> M") {
    for (const SeqFamily& f : {SeqFamily{Gevrey{2.0}}, SeqFamily{NQR{2, 2}}}) {
        LogWeightSeq M = build_sequence(f, 60);
        WeightFn w = associated_weight_fn(M);
        LogWeightSeq back = recover_sequence(w, 15);
        for (long k = 0; k <= 15; ++k) CHECK(std::abs(back.log_M(k) - M.log_M(k)) < 1e-4);
    }
}

TEST_CASE("omega_M against its definition") {
    LogWeightSeq M = build_sequence(Gevrey{1.0}, 80);
    WeightFn w = associated_weight_fn(M, linspace(0, 30, 61));
    for (double t : {0.5, 1.0, 3.0, 10.0, 25.0}) {
        double best = 0;
        for (long k = 0; k <= 80; ++k) best = std::max(best, k * std::log(t) - M.log_M(k));
        CHECK(w(t) == doctest::Approx(best).epsilon(1e-9).scale(1e-12));
    }
}

TEST_CASE("weight properties") {
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    WeightFn g2 = make_weight_fn(GevreyPower{2.0});
    Verdict xi = check_weight_property(w2, {WeightProp::Xi});
    CHECK(xi.status == Status::Holds);
    CHECK(xi.witnesses.count("H"));
    CHECK(check_weight_property(g2, {WeightProp::Xi}).status == Status::Fails);
    CHECK(check_weight_property(g2, {WeightProp::Alpha}).status == Status::Holds);
    CHECK(check_weight_property(g2, {WeightProp::NonQuasianalytic}).status == Status::Holds);
    CHECK(check_weight_property(w2, {WeightProp::NonQuasianalytic}).status == Status::Holds);
    CHECK(check_weight_property(g2, {WeightProp::GammaConvex}).status == Status::Holds);
    CHECK_THROWS_AS(parse_weight_prop("Zeta"), Error);
}

TEST_CASE("comparison of weight functions") {
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    WeightFn w3 = make_weight_fn(OmegaS{3.0});
    CHECK(compare_weight_fns(w3, w2).relation == Relation::Lhd);
    CHECK(compare_weight_fns(w2, w2).preceq());
    CHECK(compare_weight_fns(make_weight_fn(GevreyPower{2.0}), w2).relation == Relation::Lhd);
}

TEST_CASE("conjugate lemmas on omega_2") {
    auto w2 = std::make_shared<const WeightFn>(make_weight_fn(OmegaS{2.0}));
    ConjLemmaArgs a;
    a.omega = w2;
    Verdict shift = verify_conjugate_lemma(ConjLemma::Shift53, a);
    CHECK(shift.status == Status::Holds);
    CHECK(shift.witnesses.at("max_violation") <= 0.0);
    Verdict rho = verify_conjugate_lemma(ConjLemma::RhoBound612, a);
    CHECK(rho.status == Status::Holds);
    CHECK(rho.witnesses.at("rho") == a.rho);
    CHECK(verify_conjugate_lemma(ConjLemma::HatEquiv52, a).status == Status::Holds);
    a.sigma = w2;
    Verdict mixed = verify_conjugate_lemma(ConjLemma::Mixed55, a);
    CHECK(mixed.status == Status::Holds);
    CHECK(mixed.diag.notes.at("forms_agree") == "true");
    CHECK(mixed.diag.notes.at("form1") == mixed.diag.notes.at("form2"));
}

TEST_CASE("lemma preconditions") {
    ConjLemmaArgs a;
    CHECK_THROWS_AS(verify_conjugate_lemma(ConjLemma::Shift53, a), Error);
    a.omega = std::make_shared<const WeightFn>(make_weight_fn(OmegaS{2.0}));
    CHECK_THROWS_AS(verify_conjugate_lemma(ConjLemma::Mixed55, a), Error);
}

}
