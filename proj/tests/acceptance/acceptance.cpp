// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>

#include "ultrascale/iterates.hpp"
#include "ultrascale/probe.hpp"

using namespace us;

namespace {

// pinned tolerances and budgets
constexpr double kConjRelTol = 1e-6;
constexpr double kConjBudget = 1.0;  // seconds
constexpr double kAssocAbsTol = 1e-6;
constexpr double kMellinRelTol = 1e-6;
constexpr double kMellinBudget = 1.0;
constexpr double kProbeRelTol = 1e-9;
constexpr double kProbeBudget = 5.0;
constexpr double kMetivierTol = 1e-6;
constexpr double kEpsRef = 0.414214;
constexpr double kEpsTol = 5e-7;  // six printed decimals
constexpr double kRoundTripTol = 1e-4;
constexpr double kFitTol = 0.05;
constexpr int kPlants = 50;

int failures = 0;

struct Line {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void report(int id, const char* name, const std::function<Line()>& body) {
    Line l;
    try {
        l = body();
    } catch (const std::exception& e) {
        l.ok = false;
        l.detail = std::string("threw: ") + e.what();
    }
    if (!l.ok) ++failures;
    std::printf("%s %2d %-28s %s\n", l.ok ? "PASS" : "FAIL", id, name, l.detail.c_str());
    std::fflush(stdout);
}

LogWeightSeq seq(const SeqFamily& fam) { return build_sequence(fam, 200); }

WeightMatrix mat(MatrixKind k, std::vector<double> grid, double extra = 0) {
    MatrixSpec s;
    s.kind = k;
    if (k == MatrixKind::Rmatrix) s.q = extra;
    if (k == MatrixKind::Qr) s.r = extra;
    if (k == MatrixKind::Jsigma) s.sigma = extra;
    return build_matrix(s, grid, 200);
}

std::string key(double l, double a) { return "[" + fmt_double(l) + ",alpha=" + fmt_double(a) + "]"; }

Line young_conjugate_exactness() {
    Line l;
    WeightFn w2 = make_weight_fn(OmegaS{2.0});
    auto t0 = std::chrono::steady_clock::now();
    YoungConjugate c = young_conjugate(w2, linspace(0, 100, 1001));
    const double dt = seconds_since(t0);
    double worst = 0;
    for (std::size_t i = 0; i < c.grid().size(); ++i) {
        const double t = c.grid()[i], exact = t * t / 4;
        const double err = exact == 0 ? std::abs(c.values()[i]) : std::abs(c.values()[i] - exact) / exact;
        worst = std::max(worst, err);
    }
    if (worst >= kConjRelTol) l.fail("relative error too large");
    if (dt >= kConjBudget) l.fail("over time budget");
    l.detail += (l.ok ? "" : "; ") + f("max_rel_err=%.2e", worst) + f(" tol=%.0e", kConjRelTol) + f(" time=%.3fs", dt);
    return l;
}

Line associated_matrix_exactness() {
    Line l;
    WeightMatrix W = associated_matrix(make_weight_fn(OmegaS{2.0}), {1, 2, 4}, 30);
    double worst = 0;
    for (double lam : {1.0, 2.0, 4.0})
        for (long k = 0; k <= 30; ++k) worst = std::max(worst, std::abs(W.seq_at(lam).log_M(k) - lam * k * k / 4));
    if (worst >= kAssocAbsTol) l.fail("absolute error too large");
    l.detail += f("max_abs_err=%.2e", worst) + f(" tol=%.0e", kAssocAbsTol);
    return l;
}

Line gaussian_mellin() {
    Line l;
    double worst = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (double lam : {0.5, 1.0, 2.0}) {
        MellinCheck m = gaussian_mellin_check(lam, 15);
        // compare the log integral with lambda k^2 directly
        for (int k = 1; k <= 15; ++k) {
            const double exact = lam * k * k;
            worst = std::max(worst, std::abs(m.log_integral[static_cast<std::size_t>(k - 1)] - exact) / exact);
        }
    }
    const double dt = seconds_since(t0);
    if (worst >= kMellinRelTol) l.fail("relative log error too large");
    if (dt >= kMellinBudget) l.fail("over time budget");
    l.detail += f("max_rel_log_err=%.2e", worst) + f(" tol=%.0e", kMellinRelTol) + f(" time=%.3fs", dt);
    return l;
}

Line relation_tables() {
    Line l;
    int checks = 0, mismatches = 0;
    auto expect = [&](bool got, const std::string& what) {
        ++checks;
        if (!got) {
            ++mismatches;
            l.fail("mismatch: " + what);
        }
    };
    const std::vector<double> ss{1.0, 1.5, 2.0, 3.0};
    for (double s : ss)
        for (double t : ss) {
            const bool lhd = compare_sequences(seq(Gevrey{s}), seq(Gevrey{t})).relation == Relation::Lhd;
            expect(lhd == (s < t), "G^" + fmt_double(s) + " vs G^" + fmt_double(t));
        }
    for (double s : {1.0, 2.0, 5.0})
        for (auto [q, r] : {std::pair{2.0, 1.5}, std::pair{2.0, 2.0}, std::pair{3.0, 3.0}})
            expect(compare_sequences(seq(Gevrey{s}), seq(LQR{q, r})).lhd(), "G below L");
    expect(compare_sequences(seq(LQR{2, 1.5}), seq(LQR{2, 2})).lhd(), "L^{2,1.5} lhd L^{2,2}");
    expect(compare_sequences(seq(LQR{2, 2}), seq(LQR{3, 2})).lhd(), "L^{2,2} lhd L^{3,2}");

    WeightMatrix G = mat(MatrixKind::Gevrey, {1, 2, 3});
    WeightMatrix R = mat(MatrixKind::Rmatrix, {1.5, 2, 3}, 2.0);
    WeightMatrix Q = mat(MatrixKind::Qr, {1.5, 2, 3}, 2.0);
    WeightMatrix J1 = mat(MatrixKind::Jsigma, {1, 2, 3}, 1.0);
    WeightMatrix J2 = mat(MatrixKind::Jsigma, {1, 2, 3}, 2.0);
    expect(matrix_relate(G, R).has(MatrixRel::RouLhdBeu), "G {lhd) R");
    expect(matrix_relate(R, Q).has(MatrixRel::BeuPreceq), "R (<=) Q");
    expect(matrix_relate(Q, R).has(MatrixRel::RouPreceq), "Q {<=} R");
    expect(matrix_relate(J1, J2).has(MatrixRel::BeuPreceq) && matrix_relate(J2, J1).has(MatrixRel::BeuPreceq),
           "J^1 (~) J^2");
    l.detail = (l.ok ? "" : l.detail + "; ") + "checks=" + std::to_string(checks) + " mismatches=" + std::to_string(mismatches);
    return l;
}

Line condition_tables() {
    Line l;
    int checks = 0, mismatches = 0;
    auto expect = [&](bool got, const std::string& what) {
        ++checks;
        if (!got) {
            ++mismatches;
            l.fail("mismatch: " + what);
        }
    };
    for (double q : {2.0, 3.0})
        for (double r : {1.5, 2.0, 3.0}) {
            const bool holds = check_property(seq(LQR{q, r}), Prop::DerivClosed).status == Status::Holds;
            expect(holds == (r <= 2), "semiregularity of L^{q,r}");
        }
    for (double s : {0.5, 1.0, 2.0}) {
        const bool holds = check_property(seq(BJSigma{1, s}), Prop::Quasianalytic).status == Status::Holds;
        expect(holds == (s <= 1), "quasianalyticity of B^sigma");
    }
    expect(check_property(seq(DoubleExp{}), PropSpec{Prop::Om7Seq, 1, 16, 8}).status == Status::Holds, "DoubleExp p=8");
    for (double q : {2.0, 3.0})
        for (double r : {1.5, 2.0}) {
            Verdict v = check_property(seq(NQR{q, r}), Prop::Om7Seq);
            expect(v.status == Status::Holds, "NQR holds");
            if (r != 2.0 || v.status != Status::Holds) continue;
            // brute force the smallest p with sup_k (2p log M_k - log M_{pk}) / k <= 0
            LogWeightSeq N = seq(NQR{q, r});
            int pmin = 0;
            for (int p = 2; p <= 16 && !pmin; ++p) {
                double worst = -1e300;
                for (long k = 1; p * k <= 200; ++k) worst = std::max(worst, (2 * p * N.log_M(k) - N.log_M(p * k)) / k);
                if (worst <= 1e-9) pmin = p;
            }
            expect(pmin == 2 && v.witnesses.at("p") == pmin, "smallest p for NQR{q,2}");
        }
    l.detail = (l.ok ? "" : l.detail + "; ") + "checks=" + std::to_string(checks) + " mismatches=" + std::to_string(mismatches);
    return l;
}

Line exclusion() {
    Line l;
    const std::vector<SeqFamily> fams{Gevrey{1.0}, Gevrey{2.0}, Gevrey{5.0}, LQR{2, 1.5}, LQR{2, 2}, LQR{3, 3},
                                      NQR{2, 2}, NQR{3, 1.5}, BJSigma{1, 1.0}, BJSigma{2, 2.0}, BJSigma{3, 0.5}, DoubleExp{}};
    int both = 0;
    for (const auto& fam : fams) {
        LogWeightSeq M = seq(fam);
        if (check_property(M, Prop::Om7Seq).status == Status::Holds &&
            check_property(M, Prop::ModerateGrowth).status == Status::Holds) {
            ++both;
            l.fail("both hold for " + family_label(fam));
        }
    }
    l.detail = (l.ok ? "" : l.detail + "; ") + "families=" + std::to_string(fams.size()) + " flagged_both=" + std::to_string(both);
    return l;
}

Line interpolation() {
    Line l;
    for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 3.0}, std::pair{2.0, 4.0}}) {
        LogWeightSeq L = seq(Gevrey{a}), M = seq(Gevrey{b});
        LogWeightSeq N = interpolate_sequence(L, M);
        // exact log-convexity: no negative second difference at all
        for (long k = 1; k < N.K(); ++k)
            if (N.log_M(k - 1) - 2 * N.log_M(k) + N.log_M(k + 1) < 0) l.fail("N not log-convex");
        for (long k = 0; k <= N.K(); ++k)
            if (N.log_M(k) < L.log_M(k)) l.fail("N below L'");
        if (compare_sequences(N, M).relation != Relation::Lhd) l.fail("N not strictly below M");
    }
    l.detail = (l.ok ? "" : l.detail + "; ") + "pairs=(G1,G2),(G1,G3),(G2,G4)";
    return l;
}

Line loss_maps() {
    Line l;
    const OperatorSpec op{2, CharType::PrincipalHypoelliptic, 2};
    LossResult g = loss_map(GevreyClass{2}, op);
    if (!g.exact_value || !(*g.exact_value == Rational(5, 2))) l.fail("s' != 5/2");
    LossResult q = loss_map(QGevreyClass{2, 2}, op);
    if (!q.log_factor || !(*q.log_factor == Rational(9, 4))) l.fail("log q'/log 2 != 9/4");
    LossResult b = loss_map(BJClass{1, 1}, op);
    if (!b.exact_value || !(*b.exact_value == Rational(3, 2))) l.fail("lambda' != 3/2");
    if (!(subellipticity_delta(op).delta == Rational(2, 3))) l.fail("delta != 2/3");
    l.detail = (l.ok ? "" : l.detail + "; ") + "s'=" + (g.exact_value ? g.exact_value->str() : "?") +
               " q'=2^" + (q.log_factor ? q.log_factor->str() : "?") + " lambda'=" +
               (b.exact_value ? b.exact_value->str() : "?") + " delta=" + subellipticity_delta(op).delta.str();
    return l;
}

Line scale_conditions() {
    Line l;
    auto gen = [](GenKind k, double r) {
        GenFnSpec s;
        s.kind = k;
        s.r = r;
        return make_genfn(s, {1, 2, 4});
    };
    const ScaleCheckOptions opt;
    Verdict vg = check_scale_condition(gen(GenKind::GevreyGen, 2), ScaleCond::PseudoHom);
    if (vg.status != Status::Holds) l.fail("GevreyGen PseudoHom");
    else
        for (double lam : {1.0, 2.0, 4.0})
            for (double a : opt.alpha_grid)
                if (std::abs(vg.witnesses.at("partner" + key(lam, a)) - a * lam) > 1e-12) l.fail("GevreyGen partner");
    for (double r : {2.0, 3.0}) {
        Verdict v = check_scale_condition(gen(GenKind::PowerGen, r), ScaleCond::PseudoHom);
        if (v.status != Status::Holds) {
            l.fail("PowerGen PseudoHom");
            continue;
        }
        for (double lam : {1.0, 2.0, 4.0})
            for (double a : opt.alpha_grid) {
                if (std::abs(v.witnesses.at("partner" + key(lam, a)) - std::pow(a, r) * lam) > 1e-12) l.fail("PowerGen partner");
                if (v.witnesses.at("gamma" + key(lam, a)) != 0.0) l.fail("PowerGen gamma != 0");
            }
    }
    if (check_scale_condition(gen(GenKind::PowerGen, 2), ScaleCond::Square).status != Status::Holds) l.fail("Square r=2");
    if (check_scale_condition(gen(GenKind::PowerGen, 3), ScaleCond::Square).status != Status::Fails) l.fail("Square r=3");
    GenFnSpec fo;
    fo.kind = GenKind::FromOmega;
    fo.omega = std::make_shared<const WeightFn>(make_weight_fn(OmegaS{2.0}));
    GenFn z = make_genfn(fo, {1, 2, 4});
    if (check_scale_condition(z, ScaleCond::TriRight).status != Status::Holds) l.fail("FromOmega TriRight");
    if (check_scale_condition(z, ScaleCond::TriLeft).status != Status::Holds) l.fail("FromOmega TriLeft");
    if (l.ok) l.detail = "PseudoHom partners exact, Square r=2 holds / r=3 fails, FromOmega triangles hold";
    return l;
}

Line conjugate_lemmas() {
    Line l;
    ConjLemmaArgs a;
    a.omega = std::make_shared<const WeightFn>(make_weight_fn(OmegaS{2.0}));
    Verdict s = verify_conjugate_lemma(ConjLemma::Shift53, a);
    if (s.status != Status::Holds || s.witnesses.at("max_violation") > 0) l.fail("Shift53");
    Verdict r = verify_conjugate_lemma(ConjLemma::RhoBound612, a);
    if (r.status != Status::Holds) l.fail("RhoBound612");
    Verdict h = verify_conjugate_lemma(ConjLemma::HatEquiv52, a);
    if (h.status != Status::Holds) l.fail("HatEquiv52");
    a.sigma = a.omega;
    a.alpha = 2;
    Verdict m = verify_conjugate_lemma(ConjLemma::Mixed55, a);
    if (m.diag.notes.at("forms_agree") != "true") l.fail("Mixed55 forms disagree");
    l.detail = (l.ok ? "" : l.detail + "; ") + f("shift_max_violation=%.1e", s.witnesses.at("max_violation")) +
               " rho=" + status_name(r.status) + " hat=" + status_name(h.status) + " mixed=" + status_name(m.status);
    return l;
}

// ||P^k u||^2 = sum |p(xi)|^{2k} |c_xi|^2, with p evaluated term by term in long double.
double termwise_log_norm(const std::vector<std::pair<MultiIndex, cplx>>& modes, const std::map<MultiIndex, cplx>& P, int k) {
    long double acc = 0;
    for (const auto& [xi, c] : modes) {
        std::complex<long double> p = 0;
        for (const auto& [a, v] : P)
            p += std::complex<long double>(v.real(), v.imag()) * std::pow(static_cast<long double>(xi[0]), a[0]) *
                 std::pow(static_cast<long double>(xi[1]), a[1]);
        acc += std::pow(std::norm(p), static_cast<long double>(k)) * std::norm(std::complex<long double>(c.real(), c.imag()));
    }
    return static_cast<double>(0.5L * std::log(acc));
}

Line probe_oracle() {
    Line l;
    std::mt19937_64 g(2024);
    auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); };
    auto I = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(g); };
    double worst = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (int it = 0; it < 20; ++it) {
        const int dim = I(1, 2);
        std::map<MultiIndex, cplx> distinct;
        for (int m = 0, n = I(1, 8); m < n; ++m)
            distinct[MultiIndex{I(-15, 15), dim == 2 ? I(-15, 15) : 0}] = cplx(U(-1, 1), U(-1, 1));
        const std::vector<std::pair<MultiIndex, cplx>> modes(distinct.begin(), distinct.end());
        std::map<MultiIndex, cplx> coeffs;
        for (int a0 = 0; a0 <= 2; ++a0)
            for (int a1 = 0; a1 <= (dim == 2 ? 2 - a0 : 0); ++a1)
                if (I(0, 1) || a0 + a1 == 2) coeffs[{a0, a1}] = cplx(U(-2, 2), U(-2, 2));
        BuiltOperator P = build_operator(coeffs, dim);
        GridField u = GridField::from_modes(dim, 32, modes);
        std::vector<double> ln = iterate_norms(u, P.op, 20);
        for (int k = 0; k <= 20; ++k) {
            const double o = termwise_log_norm(modes, coeffs, k);
            worst = std::max(worst, std::abs(ln[static_cast<std::size_t>(k)] - o) / std::max(1.0, std::abs(o)));
        }
    }
    const double dt = seconds_since(t0);
    if (worst >= kProbeRelTol) l.fail("relative log error too large");
    if (dt >= kProbeBudget) l.fail("over time budget");
    l.detail += (l.ok ? "" : "; ") + f("max_rel_log_err=%.2e", worst) + f(" tol=%.0e", kProbeRelTol) + f(" time=%.3fs", dt);
    return l;
}

Line metivier() {
    Line l;
    MetivierParams p;
    p.lambda_prime = 1.0;
    DirectionalGrowth g = directional_growth_check(p, 20);
    if (!g.monotone) l.fail("ratios not monotone");
    const double last = std::abs(g.rows.back().ratio - 1);
    if (last >= kMetivierTol) l.fail("|r_20 - 1| too large");
    const double eps = metivier_epsilon_bound(1, 1, 0.5);
    if (std::abs(eps - kEpsRef) > kEpsTol) l.fail("epsilon bound");
    l.detail += (l.ok ? "" : "; ") + f("r_0=%.6f", g.rows.front().ratio) + f(" |r_20-1|=%.1e", last) + f(" eps=%.6f", eps);
    return l;
}

Line round_trip() {
    Line l;
    double worst = 0;
    for (const SeqFamily& fam : {SeqFamily{Gevrey{2.0}}, SeqFamily{NQR{2, 2}}}) {
        LogWeightSeq M = build_sequence(fam, 60);
        LogWeightSeq back = recover_sequence(associated_weight_fn(M), 15);
        for (long k = 0; k <= 15; ++k) worst = std::max(worst, std::abs(back.log_M(k) - M.log_M(k)));
    }
    if (worst >= kRoundTripTol) l.fail("log error too large");
    l.detail += f("max_log_err=%.2e", worst) + f(" tol=%.0e", kRoundTripTol);
    return l;
}

Line growth_fit() {
    Line l;
    std::mt19937_64 g(77);
    auto U = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); };
    const double ss[] = {1.5, 2.0, 3.0};
    double worst = 0;
    for (int it = 0; it < kPlants; ++it) {
        const double s = ss[it % 3], h = U(0.5, 5.0), C = U(0.1, 10.0);
        const int d = 1 + static_cast<int>(U(0, 2));
        std::vector<double> ln;
        // 1% multiplicative noise on each norm
        for (int k = 0; k <= 30; ++k) ln.push_back(std::log(C) + k * d * std::log(h) + s * std::lgamma(d * k + 1.0) + U(-0.01, 0.01));
        FitReport r = fit_growth(ln, d, {FitHypothesis{}});
        worst = std::max(worst, std::abs(r.ranking.front().s - s));
    }
    if (worst > kFitTol) l.fail("s outside tolerance");
    l.detail += (l.ok ? "" : "; ") + std::string("plants=") + std::to_string(kPlants) + f(" max_abs_s_err=%.2e", worst) +
                f(" tol=%.2f", kFitTol);
    return l;
}

}  // namespace

int main() {
    report(1, "young_conjugate_exactness", young_conjugate_exactness);
    report(2, "associated_matrix", associated_matrix_exactness);
    report(3, "gaussian_mellin_identity", gaussian_mellin);
    report(4, "relation_tables", relation_tables);
    report(5, "condition_tables", condition_tables);
    report(6, "om7_moderate_exclusion", exclusion);
    report(7, "interpolation_construction", interpolation);
    report(8, "loss_maps", loss_maps);
    report(9, "scale_conditions", scale_conditions);
    report(10, "conjugate_lemmas", conjugate_lemmas);
    report(11, "probe_oracle_equivalence", probe_oracle);
    report(12, "metivier_construction", metivier);
    report(13, "round_trip_sequence_weight", round_trip);
    report(14, "growth_fit_recovery", growth_fit);
    std::printf("%d/14 criteria passed\n", 14 - failures);
    return failures == 0 ? 0 : 1;
}
