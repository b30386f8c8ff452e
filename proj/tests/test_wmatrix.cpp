#include <cmath>

#include "doctest.h"
#include "ultrascale/wmatrix.hpp"

using namespace us;

namespace {

WeightMatrix mat(MatrixKind kind, std::vector<double> grid, double extra = 0) {
    MatrixSpec s;
    s.kind = kind;
    if (kind == MatrixKind::Rmatrix) s.q = extra;
    if (kind == MatrixKind::Qr) s.r = extra;
    if (kind == MatrixKind::Jsigma) s.sigma = extra;
    return build_matrix(s, grid, 200);
}

}  // namespace

TEST_SUITE("wmatrix") {

TEST_CASE("members follow the parametric families") {
    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2, 3});
    REQUIRE(G.size() == 3);
    for (long k : {5L, 100L}) CHECK(G.seq_at(2).log_M(k) == doctest::Approx(2 * std::lgamma(k + 1.0)));
    CHECK(G.K() == 200);
    WeightMatrix Q = mat(MatrixKind::Qr, {1.5, 2, 3}, 2.0);
    // q-Gevrey member: k! q^{k^2}
    CHECK(Q.seq_at(3).log_M(10) == doctest::Approx(std::lgamma(11.0) + 100 * std::log(3.0)));
    CHECK(G.build_member(1.5).log_M(10) == doctest::Approx(1.5 * std::lgamma(11.0)));
}

TEST_CASE("grid and parameter errors") {
    MatrixSpec s;
    CHECK_THROWS_AS(build_matrix(s, {}, 50), Error);
    CHECK_THROWS_AS(build_matrix(s, {2, 1}, 50), Error);
    s.kind = MatrixKind::Rmatrix;
    s.q = 2;
    CHECK_THROWS_AS(build_matrix(s, {1, 2}, 50), Error);  // L^{q,r} needs r > 1
    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2});
    CHECK_THROWS_AS(G.seq_at(7), Error);
    CHECK_THROWS_AS(parse_matrix_prop("Bogus"), Error);
}

TEST_CASE("relation table between the standard matrices") {
    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2, 3});
    WeightMatrix R = mat(MatrixKind::Rmatrix, {1.5, 2, 3}, 2.0);
    WeightMatrix Q = mat(MatrixKind::Qr, {1.5, 2, 3}, 2.0);
    WeightMatrix J1 = mat(MatrixKind::Jsigma, {1, 2, 3}, 1.0);
    WeightMatrix J2 = mat(MatrixKind::Jsigma, {1, 2, 3}, 2.0);

    MatrixRelation gr = matrix_relate(G, R);
    CHECK(gr.has(MatrixRel::RouLhdBeu));
    CHECK(gr.has(MatrixRel::RouPreceq));
    CHECK(gr.has(MatrixRel::BeuPreceq));
    CHECK_FALSE(matrix_relate(R, G).has(MatrixRel::RouPreceq));

    CHECK(matrix_relate(R, Q).has(MatrixRel::BeuPreceq));
    CHECK(matrix_relate(Q, R).has(MatrixRel::RouPreceq));

    // Beurling equivalence: (<=) in both directions
    CHECK(matrix_relate(J1, J2).has(MatrixRel::BeuPreceq));
    CHECK(matrix_relate(J2, J1).has(MatrixRel::BeuPreceq));
    CHECK(matrix_relate(J1, J2).has(MatrixRel::RouPreceq));
}

TEST_CASE("serial and parallel relation tables agree") {
    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2, 3});
    WeightMatrix R = mat(MatrixKind::Rmatrix, {1.5, 2, 3}, 2.0);
    MatrixRelation a = matrix_relate(G, R, ExecPolicy::Serial);
    MatrixRelation b = matrix_relate(G, R, ExecPolicy::Parallel);
    CHECK(a.holds == b.holds);
    CHECK(a.pair_table == b.pair_table);
}

TEST_CASE("matrix properties on the Gevrey matrix") {
    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2, 3});
    // the s = 1 member has m_k = 1, which is not strictly above analytic growth
    CHECK(check_matrix_property(G, MatrixProp::MatrixAnal).status == Status::Fails);
    CHECK(check_matrix_property(mat(MatrixKind::Gevrey, {1.5, 2, 3}), MatrixProp::MatrixAnal).status == Status::Holds);
    CHECK(check_matrix_property(G, MatrixProp::RSemiregular).status == Status::Holds);
    CHECK(check_matrix_property(G, MatrixProp::Rmg).status == Status::Holds);
}

}
