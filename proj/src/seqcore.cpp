#include "ultrascale/seqcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace us {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// log(log^{(j)}(k + e^{(j)})), stable for j <= 3 via log(k + E) = log E + log1p(k / E).
// For j >= 4 the value is below 1e-300 for every representable k and rounds to 0.
double log_iter_log(int j, double k) {
    if (j >= 4) return 0.0;
    double E = iterated_exp(j);
    double v = iterated_exp(j - 1) + std::log1p(k / E);
    for (int i = 1; i < j; ++i) v = std::log(v);
    return std::log(v);
}

}  // namespace

double iterated_exp(int j) {
    double v = 1.0;
    for (int i = 0; i < j; ++i) v = std::exp(v);
    return v;
}

std::string family_label(const SeqFamily& f) {
    return std::visit(overloaded{
        [](const Gevrey& g) { return "G^" + num(g.s); },
        [](const LQR& l) { return "L^{" + num(l.q) + "," + num(l.r) + "}"; },
        [](const NQR& n) { return "N^{" + num(n.q) + "," + num(n.r) + "}"; },
        [](const BJSigma& b) { return "B^{" + std::to_string(b.j) + "," + num(b.sigma) + "}"; },
        [](const DoubleExp&) { return std::string("E2"); },
        [](const CustomSeq& c) { return c.name; },
    }, f);
}

bool is_builtin(const SeqFamily& f) { return !std::holds_alternative<CustomSeq>(f); }

void validate_family(const SeqFamily& f) {
    std::visit(overloaded{
        [](const Gevrey& g) {
            if (!(g.s > 0)) throw Error(Errc::OutOfRangeParam, "Gevrey needs s > 0");
        },
        [](const LQR& l) {
            if (!(l.q > 1) || !(l.r > 1)) throw Error(Errc::OutOfRangeParam, "LQR needs q > 1 and r > 1");
        },
        [](const NQR& n) {
            if (!(n.q > 1) || !(n.r > 1)) throw Error(Errc::OutOfRangeParam, "NQR needs q > 1 and r > 1");
        },
        [](const BJSigma& b) {
            if (b.j < 1) throw Error(Errc::OutOfRangeParam, "BJSigma needs j >= 1");
            if (!(b.sigma > 0)) throw Error(Errc::OutOfRangeParam, "BJSigma needs sigma > 0");
        },
        [](const DoubleExp&) {},
        [](const CustomSeq& c) {
            if (!c.log_term_fn) throw Error(Errc::OutOfRangeParam, "custom family without log_term_fn");
        },
    }, f);
}

double family_log_term(const SeqFamily& f, long k) {
    const double kk = static_cast<double>(k);
    return std::visit(overloaded{
        [&](const Gevrey& g) { return g.s * std::lgamma(kk + 1); },
        [&](const LQR& l) { return std::lgamma(kk + 1) + std::pow(kk, l.r) * std::log(l.q); },
        [&](const NQR& n) { return std::pow(kk, n.r) * std::log(n.q); },
        [&](const BJSigma& b) {
            return std::lgamma(kk + 1) + b.sigma * kk * log_iter_log(b.j, kk);
        },
        [&](const DoubleExp&) { return k == 0 ? 0.0 : std::exp(kk); },
        [&](const CustomSeq& c) { return c.log_term_fn(k); },
    }, f);
}

LogWeightSeq::LogWeightSeq(std::vector<double> log_terms, SeqFamily family, std::string label)
    : log_terms_(std::move(log_terms)), family_(std::move(family)), label_(std::move(label)) {
    if (log_terms_.size() < 3)
        throw Error(Errc::TruncationTooSmall, "a sequence needs K >= 2");
    for (std::size_t k = 0; k < log_terms_.size(); ++k)
        if (!std::isfinite(log_terms_[k]))
            throw Error(Errc::OutOfRangeParam, "non-finite log term at k=" + std::to_string(k));
    if (label_.empty()) label_ = family_label(family_);
}

double LogWeightSeq::log_m(long k) const { return log_M(k) - std::lgamma(static_cast<double>(k) + 1); }

double LogWeightSeq::log_mu(long k) const {
    if (k < 1) throw Error(Errc::IndexOutOfRange, "mu_k needs k >= 1");
    return log_M(k) - log_M(k - 1);
}

std::string LogWeightSeq::to_csv() const {
    std::string out = "k,log_M_k\n";
    for (std::size_t k = 0; k < log_terms_.size(); ++k)
        out += std::to_string(k) + "," + fmt_double(log_terms_[k]) + "\n";
    return out;
}

LogWeightSeq build_sequence(const SeqFamily& family, long K) {
    if (K < 2) throw Error(Errc::TruncationTooSmall, "K must be at least 2");
    validate_family(family);
    if (std::holds_alternative<DoubleExp>(family) && K > 700)
        throw Error(Errc::OutOfRangeParam, "DoubleExp overflows beyond K = 700");
    std::vector<double> v(static_cast<std::size_t>(K) + 1);
    for (long k = 0; k <= K; ++k) v[static_cast<std::size_t>(k)] = family_log_term(family, k);
    return LogWeightSeq(std::move(v), family);
}

const char* prop_name(Prop p) {
    switch (p) {
    case Prop::LogConvex: return "LogConvex";
    case Prop::SubmultDual: return "SubmultDual";
    case Prop::AnalyticIncl: return "AnalyticIncl";
    case Prop::DerivClosed: return "DerivClosed";
    case Prop::AltDerivClosed: return "AltDerivClosed";
    case Prop::ModerateGrowth: return "ModerateGrowth";
    case Prop::Quasianalytic: return "Quasianalytic";
    case Prop::Om7Seq: return "Om7Seq";
    }
    return "?";
}

Prop parse_prop(const std::string& name) {
    for (Prop p : {Prop::LogConvex, Prop::SubmultDual, Prop::AnalyticIncl, Prop::DerivClosed,
                   Prop::AltDerivClosed, Prop::ModerateGrowth, Prop::Quasianalytic, Prop::Om7Seq})
        if (name == prop_name(p)) return p;
    throw Error(Errc::OutOfRangeParam, "unknown sequence property '" + name + "'");
}

std::optional<Status> analytic_status(const SeqFamily& f, const PropSpec& spec) {
    const Status H = Status::Holds, F = Status::Fails;
    auto pick = [](bool b) { return b ? Status::Holds : Status::Fails; };
    switch (spec.prop) {
    case Prop::LogConvex:
    case Prop::SubmultDual:
        if (is_builtin(f)) return H;
        return std::nullopt;
    default: break;
    }
    return std::visit(overloaded{
        [&](const Gevrey& g) -> std::optional<Status> {
            switch (spec.prop) {
            case Prop::AnalyticIncl: return pick(g.s > 1);
            case Prop::DerivClosed:
            case Prop::AltDerivClosed:
            case Prop::ModerateGrowth: return H;
            case Prop::Quasianalytic: return pick(g.s <= 1);
            case Prop::Om7Seq: return F;
            default: return std::nullopt;
            }
        },
        [&](const LQR& l) -> std::optional<Status> {
            switch (spec.prop) {
            case Prop::AnalyticIncl: return H;
            case Prop::DerivClosed:
            case Prop::AltDerivClosed: return pick(l.r <= 2);
            case Prop::ModerateGrowth:
            case Prop::Quasianalytic: return F;
            case Prop::Om7Seq: return H;
            default: return std::nullopt;
            }
        },
        [&](const NQR& n) -> std::optional<Status> {
            switch (spec.prop) {
            case Prop::AnalyticIncl: return H;
            case Prop::DerivClosed:
            case Prop::AltDerivClosed: return pick(n.r <= 2);
            case Prop::ModerateGrowth:
            case Prop::Quasianalytic: return F;
            case Prop::Om7Seq: return H;
            default: return std::nullopt;
            }
        },
        [&](const BJSigma& b) -> std::optional<Status> {
            switch (spec.prop) {
            case Prop::AnalyticIncl:
            case Prop::DerivClosed:
            case Prop::AltDerivClosed:
            case Prop::ModerateGrowth: return H;
            case Prop::Quasianalytic: return pick((b.j == 1 && b.sigma <= 1) || b.j >= 2);
            case Prop::Om7Seq: return F;
            default: return std::nullopt;
            }
        },
        [&](const DoubleExp&) -> std::optional<Status> {
            switch (spec.prop) {
            case Prop::AnalyticIncl: return H;
            case Prop::DerivClosed:
            case Prop::AltDerivClosed:
            case Prop::ModerateGrowth:
            case Prop::Quasianalytic: return F;
            case Prop::Om7Seq: return H;
            default: return std::nullopt;
            }
        },
        [&](const CustomSeq&) -> std::optional<Status> { return std::nullopt; },
    }, f);
}

namespace {

enum class Kind { Bounded, Divergent };

// Three-valued decision from a tail trend. Bounded-type conditions hold when the
// tracked quantity decreases, divergent-type when it increases.
Status trend_status(const Trend& t, Kind kind) {
    if (t.slope > kTrendTol) return kind == Kind::Bounded ? Status::Fails : Status::Holds;
    if (t.slope < -kTrendTol) return kind == Kind::Bounded ? Status::Holds : Status::Fails;
    return Status::Inconclusive;
}

void fill_trend(Verdict& v, const Trend& t, long k0) {
    v.diag.trend_slope = t.slope;
    v.diag.k_range = {k0 + static_cast<long>(t.lo), k0 + static_cast<long>(t.hi) - 1};
}

// Analytic answers override numerics; the numeric call is kept in the notes.
void finish(Verdict& v, Status numeric, const LogWeightSeq& M, const PropSpec& spec) {
    v.diag.notes["numeric_status"] = status_name(numeric);
    auto a = analytic_status(M.family(), spec);
    if (a) {
        v.status = *a;
        v.diag.notes["basis"] = "analytic";
    } else {
        v.status = numeric;
        v.diag.notes["basis"] = "numeric";
    }
    if (v.status == Status::Fails && !v.counterexample)
        v.counterexample = std::vector<long>{v.diag.k_range.first, v.diag.k_range.second};
}

Verdict check_log_convex(const LogWeightSeq& M) {
    Verdict v;
    double worst = std::numeric_limits<double>::infinity();
    long at = 1;
    for (long k = 1; k < M.K(); ++k) {
        double d = M.log_M(k + 1) - 2 * M.log_M(k) + M.log_M(k - 1);
        if (d < worst) {
            worst = d;
            at = k;
        }
    }
    v.witnesses["min_second_difference"] = worst;
    v.diag.k_range = {0, M.K()};
    v.diag.notes["basis"] = "exact";
    if (worst >= -1e-9) {
        v.status = Status::Holds;
    } else {
        v.status = Status::Fails;
        v.counterexample = std::vector<long>{at - 1, at, at + 1};
    }
    return v;
}

Verdict check_submult(const LogWeightSeq& M, ExecPolicy policy) {
    Verdict v;
    const long K = M.K();
    double worst = -std::numeric_limits<double>::infinity();
    long wj = 0, wk = 0;
#pragma omp parallel if (policy == ExecPolicy::Parallel)
    {
        double lw = -std::numeric_limits<double>::infinity();
        long lj = 0, lk = 0;
#pragma omp for schedule(static)
        for (long j = 0; j <= K; ++j)
            for (long k = j; j + k <= K; ++k) {
                double viol = M.log_M(j) + M.log_M(k) - M.log_M(j + k);
                double scaled_viol = viol / std::max(1.0, std::abs(M.log_M(j + k)));
                if (scaled_viol > lw || (scaled_viol == lw && (j < lj || (j == lj && k < lk)))) {
                    lw = scaled_viol;
                    lj = j;
                    lk = k;
                }
            }
#pragma omp critical
        if (lw > worst || (lw == worst && (lj < wj || (lj == wj && lk < wk)))) {
            worst = lw;
            wj = lj;
            wk = lk;
        }
    }
    v.witnesses["max_relative_violation"] = worst;
    v.diag.k_range = {0, K};
    v.diag.notes["basis"] = "exact";
    if (worst <= 1e-9) {
        v.status = Status::Holds;
    } else {
        v.status = Status::Fails;
        v.counterexample = std::vector<long>{wj, wk};
    }
    return v;
}

Verdict check_analytic_incl(const LogWeightSeq& M, const PropSpec& spec) {
    Verdict v;
    std::vector<double> x;
    for (long k = 1; k <= M.K(); ++k) x.push_back(M.log_m(k) / static_cast<double>(k));
    Trend t = tail_trend(x);
    fill_trend(v, t, 1);
    v.diag.estimated_limit = x.back();
    v.witnesses["root_m_K"] = std::exp(x.back());
    finish(v, trend_status(t, Kind::Divergent), M, spec);
    return v;
}

Verdict check_deriv_closed(const LogWeightSeq& M, const PropSpec& spec) {
    Verdict v;
    std::vector<double> x;
    for (long k = 0; k < M.K(); ++k)
        x.push_back((M.log_M(k + 1) - M.log_M(k)) / static_cast<double>(k + 1));
    Trend t = tail_trend(x);
    fill_trend(v, t, 0);
    double mx = *std::max_element(x.begin(), x.end());
    v.witnesses["C"] = std::exp(std::max(0.0, mx));
    v.diag.estimated_limit = x.back();
    finish(v, trend_status(t, Kind::Bounded), M, spec);
    return v;
}

Verdict check_alt_deriv_closed(const LogWeightSeq& M, const PropSpec& spec) {
    if (spec.ell < 1) throw Error(Errc::OutOfRangeParam, "AltDerivClosed needs ell >= 1");
    Verdict v;
    std::vector<double> x;
    for (long k = 1; k <= M.K(); ++k)
        x.push_back(spec.ell * M.log_M(k) / (static_cast<double>(k) * static_cast<double>(k)));
    Trend t = tail_trend(x);
    fill_trend(v, t, 1);
    double mx = *std::max_element(x.begin(), x.end());
    v.witnesses["C"] = 1.0;
    v.witnesses["h"] = std::exp(std::max(0.0, mx));
    v.witnesses["ell"] = spec.ell;
    finish(v, trend_status(t, Kind::Bounded), M, spec);
    return v;
}

Verdict check_moderate_growth(const LogWeightSeq& M, const PropSpec& spec, ExecPolicy policy) {
    Verdict v;
    const long K = M.K();
    std::vector<double> x(static_cast<std::size_t>(K));
#pragma omp parallel for schedule(dynamic, 8) if (policy == ExecPolicy::Parallel)
    for (long n = 1; n <= K; ++n) {
        double best = 0.0;
        for (long j = 0; j <= n / 2; ++j)
            best = std::max(best, M.log_M(n) - M.log_M(j) - M.log_M(n - j));
        x[static_cast<std::size_t>(n - 1)] = best / static_cast<double>(n);
    }
    Trend t = tail_trend(x);
    fill_trend(v, t, 1);
    v.witnesses["gamma"] = std::exp(*std::max_element(x.begin(), x.end()));
    v.diag.estimated_limit = x.back();
    finish(v, trend_status(t, Kind::Bounded), M, spec);
    return v;
}

Verdict check_quasianalytic(const LogWeightSeq& M, const PropSpec& spec) {
    Verdict v;
    const long K = M.K();
    std::vector<double> logt, logk;
    double S = 0;
    for (long k = 0; k < K; ++k) {
        double lt = M.log_M(k) - M.log_M(k + 1);
        S += std::exp(lt);
        logt.push_back(lt);
        logk.push_back(std::log(static_cast<double>(k + 1)));
    }
    Trend t = tail_trend(logk, logt);
    fill_trend(v, t, 0);
    v.witnesses["partial_sum"] = S;
    v.witnesses["decay_exponent"] = t.slope;
    v.diag.estimated_limit = S;
    // Power-law fit of the terms: exponent below -1 means a convergent tail.
    Status numeric = Status::Inconclusive;
    if (t.slope < -1.1) numeric = Status::Fails;
    else if (t.slope > -0.9) numeric = Status::Holds;
    finish(v, numeric, M, spec);
    return v;
}

struct Om7Probe {
    int p;
    double slope;
    double logB;
};

Om7Probe om7_probe(const LogWeightSeq& M, int p) {
    const long kmax = M.K() / p;
    std::vector<double> g;
    double mx = 0;
    for (long k = 1; k <= kmax; ++k) {
        double gk = (2.0 * p * M.log_M(k) - M.log_M(p * k)) / static_cast<double>(k);
        g.push_back(gk);
        mx = std::max(mx, gk);
    }
    Trend t = tail_trend(g);
    return {p, t.slope, mx};
}

Verdict check_om7(const LogWeightSeq& M, const PropSpec& spec) {
    Verdict v;
    const int need = spec.p_fixed ? *spec.p_fixed : spec.p_max;
    if (spec.p_fixed && *spec.p_fixed < 1) throw Error(Errc::OutOfRangeParam, "Om7Seq needs p >= 1");
    if (M.K() < 6L * need)
        throw Error(Errc::TruncationTooSmall,
                    "Om7Seq needs K >= 6 p (K=" + std::to_string(M.K()) + ", p=" + std::to_string(need) + ")");
    std::optional<Om7Probe> found;
    double last_slope = 0;
    if (spec.p_fixed) {
        Om7Probe pr = om7_probe(M, *spec.p_fixed);
        last_slope = pr.slope;
        if (pr.slope <= kTrendTol) found = pr;
    } else {
        for (int p = 2; p <= spec.p_max; ++p) {
            Om7Probe pr = om7_probe(M, p);
            last_slope = pr.slope;
            if (pr.slope <= kTrendTol) {
                found = pr;
                break;
            }
        }
    }
    Status numeric;
    if (found) {
        numeric = Status::Holds;
        v.witnesses["p"] = found->p;
        v.witnesses["A"] = 1.0;
        v.witnesses["B"] = std::exp(found->logB);
        v.diag.trend_slope = found->slope;
        v.diag.k_range = {1, M.K() / found->p};
    } else {
        numeric = Status::Fails;
        v.diag.trend_slope = last_slope;
        long kmax = M.K() / need;
        v.diag.k_range = {kmax - std::max(3L, kmax / 3) + 1, kmax};
        v.counterexample = std::vector<long>{need, v.diag.k_range.first, v.diag.k_range.second};
    }
    v.diag.notes["bounded_rule"] = "tail slope of g_p(k)/k <= 1e-3 counts as bounded";
    finish(v, numeric, M, spec);
    return v;
}

}  // namespace

Verdict check_property(const LogWeightSeq& M, const PropSpec& spec, ExecPolicy policy) {
    if (M.log_M(0) != 0.0) throw Error(Errc::NonNormalized, "log_terms[0] must be 0");
    if (M.K() < 6 && spec.prop != Prop::LogConvex && spec.prop != Prop::SubmultDual)
        throw Error(Errc::TruncationTooSmall, "asymptotic checks need K >= 6");
    switch (spec.prop) {
    case Prop::LogConvex: return check_log_convex(M);
    case Prop::SubmultDual: return check_submult(M, policy);
    case Prop::AnalyticIncl: return check_analytic_incl(M, spec);
    case Prop::DerivClosed: return check_deriv_closed(M, spec);
    case Prop::AltDerivClosed: return check_alt_deriv_closed(M, spec);
    case Prop::ModerateGrowth: return check_moderate_growth(M, spec, policy);
    case Prop::Quasianalytic: return check_quasianalytic(M, spec);
    case Prop::Om7Seq: return check_om7(M, spec);
    }
    throw Error(Errc::OutOfRangeParam, "unknown property");
}

const char* relation_name(Relation r) {
    switch (r) {
    case Relation::Preceq: return "preceq";
    case Relation::Lhd: return "lhd";
    case Relation::Approx: return "approx";
    case Relation::Incomparable: return "incomparable";
    case Relation::Succeq: return "succeq";
    case Relation::Rhd: return "rhd";
    }
    return "?";
}

namespace {

Relation flip(Relation r) {
    switch (r) {
    case Relation::Preceq: return Relation::Succeq;
    case Relation::Succeq: return Relation::Preceq;
    case Relation::Lhd: return Relation::Rhd;
    case Relation::Rhd: return Relation::Lhd;
    default: return r;
    }
}

Relation by_order(double a, double b) {
    if (a < b) return Relation::Lhd;
    if (a > b) return Relation::Rhd;
    return Relation::Approx;
}

// Tabulated relation M ? N for an ordered pair; nullopt when the pair is not listed in this orientation.
std::optional<Relation> table(const SeqFamily& a, const SeqFamily& b) {
    const bool b_quad = std::holds_alternative<LQR>(b) || std::holds_alternative<NQR>(b);
    if (auto g = std::get_if<Gevrey>(&a)) {
        if (auto h = std::get_if<Gevrey>(&b)) return by_order(g->s, h->s);
        if (b_quad || std::holds_alternative<DoubleExp>(b)) return Relation::Lhd;
        if (std::holds_alternative<BJSigma>(b)) return g->s > 1 ? Relation::Rhd : Relation::Lhd;
        return std::nullopt;
    }
    if (std::holds_alternative<LQR>(a) || std::holds_alternative<NQR>(a)) {
        if (std::holds_alternative<DoubleExp>(b)) return Relation::Lhd;
        if (!b_quad) return std::nullopt;
        auto qr = [](const SeqFamily& f) {
            if (auto l = std::get_if<LQR>(&f)) return std::pair{l->q, l->r};
            auto n = std::get<NQR>(f);
            return std::pair{n.q, n.r};
        };
        auto [q0, r0] = qr(a);
        auto [q1, r1] = qr(b);
        if (r0 != r1) return by_order(r0, r1);
        if (q0 != q1) return by_order(q0, q1);
        const bool a_n = std::holds_alternative<NQR>(a), b_n = std::holds_alternative<NQR>(b);
        if (a_n == b_n) return Relation::Approx;
        return a_n ? Relation::Lhd : Relation::Rhd;
    }
    if (auto bj = std::get_if<BJSigma>(&a)) {
        if (b_quad || std::holds_alternative<DoubleExp>(b)) return Relation::Lhd;
        if (auto bk = std::get_if<BJSigma>(&b)) {
            if (bj->j < bk->j) return Relation::Rhd;
            if (bj->j > bk->j) return Relation::Lhd;
            return by_order(bj->sigma, bk->sigma);
        }
        return std::nullopt;
    }
    if (std::holds_alternative<DoubleExp>(a) && std::holds_alternative<DoubleExp>(b)) return Relation::Approx;
    return std::nullopt;
}

}  // namespace

std::optional<Relation> analytic_relation(const SeqFamily& a, const SeqFamily& b) {
    if (!is_builtin(a) || !is_builtin(b)) return std::nullopt;
    if (auto r = table(a, b)) return r;
    if (auto r = table(b, a)) return flip(*r);
    return std::nullopt;
}

RelationReport compare_sequences(const LogWeightSeq& M, const LogWeightSeq& N) {
    if (M.K() != N.K()) throw Error(Errc::LengthMismatch, "sequences have different truncation");
    if (M.K() < 16) throw Error(Errc::TruncationTooSmall, "relations need K >= 16");
    RelationReport rep;
    rep.le = true;
    for (long k = 0; k <= M.K(); ++k) {
        if (M.log_M(k) > N.log_M(k) + 1e-12 * std::max(1.0, std::abs(N.log_M(k)))) rep.le = false;
        if (k >= 1) rep.ratio_roots.push_back((M.log_M(k) - N.log_M(k)) / static_cast<double>(k));
    }
    Trend t = tail_trend(rep.ratio_roots);
    rep.trend_slope = t.slope;
    rep.limsup_estimate = t.tail_max;
    rep.liminf_estimate = t.tail_min;
    if (t.slope < -kTrendTol) rep.numeric_relation = Relation::Lhd;
    else if (t.slope > kTrendTol) rep.numeric_relation = Relation::Rhd;
    else rep.numeric_relation = Relation::Approx;
    if (auto a = analytic_relation(M.family(), N.family())) {
        rep.relation = *a;
        rep.confidence = Confidence::Analytic;
    } else {
        rep.relation = rep.numeric_relation;
        rep.confidence = Confidence::Numeric;
    }
    return rep;
}

LogWeightSeq interpolate_sequence(const LogWeightSeq& Lp, const LogWeightSeq& M,
                                  const InterpolationOptions& opt) {
    if (Lp.log_M(0) != 0.0 || M.log_M(0) != 0.0)
        throw Error(Errc::NonNormalized, "interpolation needs L'_0 = M_0 = 1");
    if (Lp.K() != M.K()) throw Error(Errc::LengthMismatch, "L' and M differ in truncation");
    const long K = M.K();
    LogWeightSeq G1 = build_sequence(Gevrey{1.0}, K);
    if (!compare_sequences(G1, Lp).preceq())
        throw Error(Errc::PreconditionViolated, "G^1 is not below L'");
    if (!compare_sequences(Lp, M).lhd())
        throw Error(Errc::PreconditionViolated, "L' is not strictly below M");
    if (check_property(M, Prop::LogConvex).status != Status::Holds)
        throw Error(Errc::PreconditionViolated, "M is not log-convex");

    std::vector<double> d(static_cast<std::size_t>(K) + 1);
    for (long k = 0; k <= K; ++k) d[static_cast<std::size_t>(k)] = Lp.log_M(k) - M.log_M(k);

    // log C_h at x = log h, together with the index attaining the sup.
    auto logC = [&](double x, long* arg) {
        double best = -std::numeric_limits<double>::infinity();
        for (long k = 0; k <= K; ++k) {
            double v = d[static_cast<std::size_t>(k)] - static_cast<double>(k) * x;
            if (v > best) {
                best = v;
                if (arg) *arg = k;
            }
        }
        return best;
    };

    std::vector<double> xs = linspace(std::log(opt.h_lo), std::log(opt.h_hi), opt.h_points);
    std::vector<double> cs(xs.size());
    std::vector<long> args(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) cs[i] = logC(xs[i], &args[i]);

    std::vector<double> logL(static_cast<std::size_t>(K) + 1);
    for (long k = 0; k <= K; ++k) {
        std::size_t bi = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double v = cs[i] + static_cast<double>(k) * xs[i];
            if (v < best) {
                best = v;
                bi = i;
            }
        }
        if ((bi == 0 || bi + 1 == xs.size()) && args[bi] != k)
            throw Error(Errc::HGridInsufficient, "inf over h not attained inside the grid at k=" + std::to_string(k));
        if (bi > 0 && bi + 1 < xs.size()) {
            const double a = xs[bi - 1], b = xs[bi + 1];
            const int n = 64;
            for (int i = 0; i <= n; ++i) {
                double x = a + (b - a) * i / n;
                best = std::min(best, logC(x, nullptr) + static_cast<double>(k) * x);
            }
        }
        logL[static_cast<std::size_t>(k)] = best + M.log_M(k);
    }

    std::vector<double> logN(static_cast<std::size_t>(K) + 1, 0.0);
    double run_lambda = -std::numeric_limits<double>::infinity();
    double prev_nu = -std::numeric_limits<double>::infinity();
    for (long k = 1; k <= K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        run_lambda = std::max(run_lambda, logL[i] - logL[i - 1]);
        double nu = std::max(0.5 * M.log_mu(k), run_lambda);
        nu = std::max(nu, prev_nu);  // guards against rounding in mu_k
        prev_nu = nu;
        logN[i] = logN[i - 1] + nu;
    }
    CustomSeq fam{nullptr, "N(" + Lp.label() + "," + M.label() + ")"};
    auto table = std::make_shared<std::vector<double>>(logN);
    fam.log_term_fn = [table](long k) { return table->at(static_cast<std::size_t>(k)); };
    LogWeightSeq N(std::move(logN), fam, fam.name);

    for (long k = 0; k <= K; ++k)
        if (Lp.log_M(k) > N.log_M(k) + 1e-9 * std::max(1.0, std::abs(N.log_M(k))))
            throw Error(Errc::HGridInsufficient, "L' <= N violated at k=" + std::to_string(k));
    return N;
}

bool verify_split_inequality(const LogWeightSeq& M, long j, long k, long ell, double rho, double R) {
    if (j < 0 || k < 0 || ell < 0 || j + k + ell > M.K())
        throw Error(Errc::IndexOutOfRange, "need 0 <= j,k,l and j+k+l <= K");
    if (!(rho >= 1) || !(R >= 1)) throw Error(Errc::OutOfRangeParam, "need rho, R >= 1");
    const double lr = std::log(rho), lR = std::log(R);
    const double lhs = j * lr + M.log_M(k + ell) + ell * lR;
    const double rhs = logaddexp((j + ell) * lr + M.log_M(k), M.log_M(j + k + ell) + (j + ell) * lR);
    return lhs <= rhs + 1e-10 * std::max(1.0, std::abs(lhs));
}

}
