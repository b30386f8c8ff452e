#include <cmath>

#include "doctest.h"
#include "ultrascale/seqcore.hpp"

using namespace us;

namespace {

// log of prod_{i<=k} i computed by summation, independent of lgamma
long double log_fact(long k) {
    long double s = 0;
    for (long i = 2; i <= k; ++i) s += std::log(static_cast<long double>(i));
    return s;
}

}  // namespace

TEST_SUITE("seqcore") {

TEST_CASE("family log terms against summed factorials") {
    auto G = build_sequence(Gevrey{2.0}, 200);
    auto L = build_sequence(LQR{2.0, 1.5}, 200);
    auto N = build_sequence(NQR{3.0, 2.0}, 200);
    for (long k : {0L, 1L, 7L, 50L, 200L}) {
        CHECK(G.log_M(k) == doctest::Approx(static_cast<double>(2 * log_fact(k))).epsilon(1e-13));
        CHECK(L.log_M(k) == doctest::Approx(static_cast<double>(log_fact(k) + std::pow(k, 1.5L) * std::log(2.0L))).epsilon(1e-13));
        CHECK(N.log_M(k) == doctest::Approx(static_cast<double>(k * k * std::log(3.0L))).epsilon(1e-13));
    }
    CHECK(G.log_M(0) == 0.0);
}

TEST_CASE("BJ with j >= 4 collapses to k!") {
    auto B = build_sequence(BJSigma{4, 1.0}, 60);
    for (long k = 0; k <= 60; ++k) CHECK(B.log_M(k) == doctest::Approx(static_cast<double>(log_fact(k))).epsilon(1e-13));
    CHECK(iterated_exp(0) == 1.0);
    CHECK(iterated_exp(1) == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("derived quantities") {
    auto G = build_sequence(Gevrey{1.5}, 40);
    CHECK(G.log_m(10) == doctest::Approx(0.5 * std::lgamma(11.0)));
    CHECK(G.log_mu(10) == doctest::Approx(1.5 * std::log(10.0)));
    auto csv = build_sequence(Gevrey{1.0}, 3).to_csv();
    CHECK(csv.rfind("k,log_M_k\n", 0) == 0);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(build_sequence(Gevrey{0.0}, 10), Error);
    CHECK_THROWS_AS(build_sequence(LQR{0.5, 2.0}, 10), Error);
    try {
        check_property(build_sequence(DoubleExp{}, 20), PropSpec{Prop::Om7Seq, 1, 16, 8});
        FAIL("expected TruncationTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TruncationTooSmall);
    }
    CHECK_THROWS_AS(parse_prop("Nope"), Error);
}

TEST_CASE("log-convexity is exact on built-ins and catches a dent") {
    for (const SeqFamily& f : {SeqFamily{Gevrey{1.2}}, SeqFamily{LQR{2, 2}}, SeqFamily{NQR{2, 1.5}},
                              SeqFamily{BJSigma{2, 1.0}}, SeqFamily{DoubleExp{}}})
        CHECK(check_property(build_sequence(f, 120), Prop::LogConvex).status == Status::Holds);
    std::vector<double> lt{0, 1, 3, 4, 7, 11, 16, 22};
    CustomSeq c{[lt](long k) { return lt.at(static_cast<std::size_t>(k)); }, "dent"};
    Verdict v = check_property(build_sequence(c, 7), Prop::LogConvex);
    CHECK(v.status == Status::Fails);
    REQUIRE(v.counterexample);
    CHECK((*v.counterexample)[1] == 2);
}

TEST_CASE("semiregularity of L^{q,r} iff r <= 2") {
    for (double r : {1.5, 2.0}) CHECK(check_property(build_sequence(LQR{2, r}, 200), Prop::DerivClosed).status == Status::Holds);
    CHECK(check_property(build_sequence(LQR{2, 3}, 200), Prop::DerivClosed).status == Status::Fails);
}

TEST_CASE("quasianalyticity of B^sigma iff sigma <= 1") {
    for (double s : {0.5, 1.0}) CHECK(check_property(build_sequence(BJSigma{1, s}, 200), Prop::Quasianalytic).status == Status::Holds);
    CHECK(check_property(build_sequence(BJSigma{1, 2.0}, 200), Prop::Quasianalytic).status == Status::Fails);
}

TEST_CASE("Om7Seq: DoubleExp at p = 8 and the NQR minimum against brute force") {
    Verdict d = check_property(build_sequence(DoubleExp{}, 200), PropSpec{Prop::Om7Seq, 1, 16, 8});
    CHECK(d.status == Status::Holds);
    auto N = build_sequence(NQR{2, 2}, 200);
    Verdict v = check_property(N, Prop::Om7Seq);
    REQUIRE(v.status == Status::Holds);
    // brute force: smallest p with max_k (2p log M_k - log M_{pk}) / k <= log B for B = 1
    int pmin = 0;
    for (int p = 2; p <= 16 && !pmin; ++p) {
        double worst = -1e300;
        for (long k = 1; p * k <= 200; ++k) worst = std::max(worst, (2 * p * N.log_M(k) - N.log_M(p * k)) / k);
        if (worst <= 1e-9) pmin = p;
    }
    CHECK(pmin == 2);
    CHECK(v.witnesses["p"] == pmin);
    CHECK(v.witnesses["A"] == 1.0);
    CHECK(v.witnesses["B"] == doctest::Approx(1.0));
}

TEST_CASE("Om7Seq and ModerateGrowth never both hold on built-ins") {
    const std::vector<SeqFamily> fams{Gevrey{1.0}, Gevrey{2.0}, Gevrey{5.0}, LQR{2, 1.5}, LQR{2, 2}, LQR{3, 3},
                                      NQR{2, 2}, NQR{2, 1.5}, BJSigma{1, 1.0}, BJSigma{2, 2.0}, DoubleExp{}};
    for (const auto& f : fams) {
        auto M = build_sequence(f, 200);
        const bool om7 = check_property(M, Prop::Om7Seq).status == Status::Holds;
        const bool mg = check_property(M, Prop::ModerateGrowth).status == Status::Holds;
        INFO(family_label(f));
        CHECK_FALSE((om7 && mg));
    }
}

TEST_CASE("Gevrey ordering: G^s lhd G^t iff s < t") {
    for (double s : {1.0, 1.5, 2.0, 3.0})
        for (double t : {1.0, 1.5, 2.0, 3.0}) {
            RelationReport r = compare_sequences(build_sequence(Gevrey{s}, 200), build_sequence(Gevrey{t}, 200));
            if (s < t) CHECK(r.relation == Relation::Lhd);
            else if (s == t) CHECK(r.relation == Relation::Approx);
            else CHECK(r.relation == Relation::Rhd);
        }
}

TEST_CASE("Gevrey sits strictly below every L^{q,r}") {
    for (double s : {1.0, 2.0, 5.0})
        for (double r : {1.5, 2.0}) {
            RelationReport rep = compare_sequences(build_sequence(Gevrey{s}, 200), build_sequence(LQR{2, r}, 200));
            CHECK(rep.relation == Relation::Lhd);
        }
    // within the L family the larger exponent dominates
    CHECK(compare_sequences(build_sequence(LQR{2, 1.5}, 200), build_sequence(LQR{2, 2}, 200)).relation == Relation::Lhd);
    CHECK(compare_sequences(build_sequence(LQR{2, 2}, 200), build_sequence(LQR{3, 2}, 200)).relation == Relation::Lhd);
}

TEST_CASE("relation report agrees with its numeric reading on Gevrey pairs") {
    RelationReport r = compare_sequences(build_sequence(Gevrey{1.0}, 200), build_sequence(Gevrey{2.0}, 200));
    CHECK(r.numeric_relation == r.relation);
    CHECK(r.le);
    CHECK(r.ratio_roots.size() == 200);
}

TEST_CASE("interpolation between Gevrey pairs") {
    for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 3.0}, std::pair{2.0, 4.0}}) {
        auto L = build_sequence(Gevrey{a}, 200), M = build_sequence(Gevrey{b}, 200);
        LogWeightSeq N = interpolate_sequence(L, M);
        CHECK(check_property(N, Prop::LogConvex).status == Status::Holds);
        for (long k = 0; k <= 200; ++k) CHECK(N.log_M(k) >= L.log_M(k) - 1e-12);
        CHECK(compare_sequences(N, M).relation == Relation::Lhd);
    }
}

}
