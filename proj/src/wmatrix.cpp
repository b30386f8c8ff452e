#include "ultrascale/wmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ultrascale/conjugate.hpp"

namespace us {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string kind_label(const MatrixSpec& s) {
    switch (s.kind) {
    case MatrixKind::Gevrey: return "G";
    case MatrixKind::Qr: return "Q^" + num(s.r);
    case MatrixKind::Rmatrix: return std::string(s.weak ? "Rn" : "R") + "[q=" + num(s.q) + "]";
    case MatrixKind::Bj: return "B^" + std::to_string(s.j);
    case MatrixKind::Jsigma: return "J^" + num(s.sigma);
    case MatrixKind::FromWeightFn: return "W";
    case MatrixKind::Custom: return "custom";
    }
    return "?";
}

}  // namespace

const LogWeightSeq& WeightMatrix::seq_at(double lambda) const {
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i] == lambda) return members[i];
    throw Error(Errc::IndexOutOfRange, "parameter " + num(lambda) + " is not on the grid");
}

LogWeightSeq WeightMatrix::build_member(double p) const {
    const long K = members.empty() ? 0 : this->K();
    switch (spec.kind) {
    case MatrixKind::Gevrey: return build_sequence(Gevrey{p}, K);
    case MatrixKind::Qr: return build_sequence(LQR{p, spec.r}, K);
    case MatrixKind::Rmatrix:
        return spec.weak ? build_sequence(NQR{spec.q, p}, K) : build_sequence(LQR{spec.q, p}, K);
    case MatrixKind::Bj: return build_sequence(BJSigma{spec.j, p}, K);
    case MatrixKind::Jsigma: {
        if (p < 1 || p != std::floor(p)) throw Error(Errc::OutOfRangeParam, "J^sigma needs integer j >= 1");
        return build_sequence(BJSigma{static_cast<int>(p), spec.sigma}, K);
    }
    case MatrixKind::FromWeightFn: {
        if (!spec.omega) throw Error(Errc::MissingSupportObject, "FromWeightFn matrix without omega");
        YoungConjugate c = young_conjugate(*spec.omega, {0.0, p * static_cast<double>(K)});
        auto lt = associated_log_terms(c, p, K);
        auto table = std::make_shared<std::vector<double>>(lt);
        std::string name = "W^" + num(p) + "[" + spec.omega->label() + "]";
        CustomSeq fam{[table](long k) { return table->at(static_cast<std::size_t>(k)); }, name};
        return LogWeightSeq(std::move(lt), fam, name);
    }
    case MatrixKind::Custom: break;
    }
    throw Error(Errc::OutOfRangeParam, "custom matrices have no members off the grid");
}

std::optional<double> WeightMatrix::next_param(double p, int dir) const {
    const bool up = dir > 0;
    switch (spec.kind) {
    case MatrixKind::Gevrey:
    case MatrixKind::Qr:
    case MatrixKind::Rmatrix:
        if (up) return 2 * p;
        return p > 1 ? 1 + (p - 1) / 2 : p / 2;
    case MatrixKind::Bj:
    case MatrixKind::FromWeightFn: return up ? 2 * p : p / 2;
    case MatrixKind::Jsigma:
        // larger sequences sit at smaller j
        if (up) return p > 1 ? std::optional<double>(p - 1) : std::nullopt;
        return p < 16 ? std::optional<double>(p + 1) : std::nullopt;
    case MatrixKind::Custom: return std::nullopt;
    }
    return std::nullopt;
}

WeightMatrix build_matrix(const MatrixSpec& spec, const std::vector<double>& grid, long K) {
    if (grid.empty()) throw Error(Errc::OutOfRangeParam, "empty parameter grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(Errc::OrderViolation, "parameter grid must be strictly increasing");
    WeightMatrix m;
    m.spec = spec;
    m.params = grid;
    m.label = spec.label.empty() ? kind_label(spec) : spec.label;
    m.order_reversed = spec.kind == MatrixKind::Jsigma || (spec.kind == MatrixKind::Custom && spec.order_reversed);
    if (spec.kind == MatrixKind::Custom) {
        if (spec.members.size() != grid.size())
            throw Error(Errc::LengthMismatch, "custom matrix needs one member per parameter");
        m.members = spec.members;
        for (const auto& s : m.members)
            if (s.K() != m.members.front().K()) throw Error(Errc::LengthMismatch, "members differ in truncation");
    } else {
        if (K < 2) throw Error(Errc::TruncationTooSmall, "K must be at least 2");
        m.members.reserve(grid.size());
        // build_member reads K from the first member
        WeightMatrix seed = m;
        seed.members.push_back(build_sequence(Gevrey{1.0}, K));
        for (double p : grid) m.members.push_back(seed.build_member(p));
    }
    m.spec.members.clear();
    for (std::size_t i = 0; i + 1 < m.members.size(); ++i) {
        const LogWeightSeq& a = m.order_reversed ? m.members[i + 1] : m.members[i];
        const LogWeightSeq& b = m.order_reversed ? m.members[i] : m.members[i + 1];
        for (long k = 1; k <= a.K(); ++k)
            if (a.log_M(k) > b.log_M(k) + 1e-9 * std::max(1.0, std::abs(b.log_M(k))))
                throw Error(Errc::OrderViolation, "members at " + num(m.params[i]) + " and " + num(m.params[i + 1]) +
                                                      " are out of order at k=" + std::to_string(k));
    }
    for (const auto& s : m.members)
        if (check_property(s, Prop::LogConvex).status != Status::Holds)
            throw Error(Errc::PreconditionViolated, "member " + s.label() + " is not log-convex");
    return m;
}

const char* matrix_rel_name(MatrixRel r) {
    switch (r) {
    case MatrixRel::RouPreceq: return "RouPreceq";
    case MatrixRel::BeuPreceq: return "BeuPreceq";
    case MatrixRel::RouLhdBeu: return "RouLhdBeu";
    case MatrixRel::ApproxBoth: return "ApproxBoth";
    }
    return "?";
}

bool MatrixRelation::has(MatrixRel r) const { return std::find(holds.begin(), holds.end(), r) != holds.end(); }

namespace {

// Member indices from smallest to largest sequence.
std::vector<std::size_t> size_order(const WeightMatrix& m) {
    std::vector<std::size_t> idx(m.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = m.order_reversed ? idx.size() - 1 - i : i;
    return idx;
}

struct Found {
    bool ok = false;
    double param = 0;
    bool off_grid = false;
    double log_const = 0;
};

// Search candidates on the grid in the given order, then walk the extension ladder in direction dir.
template <class OnGrid, class OffGrid>
Found search_partner(const WeightMatrix& P, const std::vector<std::size_t>& order, int dir, bool allow_ext,
                     int steps, OnGrid on_grid, OffGrid off_grid) {
    for (std::size_t i : order) {
        double c = 0;
        if (on_grid(i, c)) return {true, P.params[i], false, c};
    }
    if (!allow_ext || !P.parametric()) return {};
    auto so = size_order(P);
    double p = dir > 0 ? P.params[so.back()] : P.params[so.front()];
    for (int s = 0; s < steps; ++s) {
        auto np = P.next_param(p, dir);
        if (!np) break;
        p = *np;
        double c = 0;
        LogWeightSeq m = P.build_member(p);
        if (off_grid(m, c)) return {true, p, true, c};
    }
    return {};
}

}  // namespace

MatrixRelation matrix_relate(const WeightMatrix& A, const WeightMatrix& B, ExecPolicy policy) {
    if (A.K() != B.K()) throw Error(Errc::LengthMismatch, "matrices differ in truncation");
    MatrixRelation out;
    const std::size_t na = A.size(), nb = B.size();
    out.pair_table.assign(na, std::vector<Relation>(nb, Relation::Incomparable));
    const long total = static_cast<long>(na * nb);
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long p = 0; p < total; ++p) {
        const std::size_t i = static_cast<std::size_t>(p) / nb, j = static_cast<std::size_t>(p) % nb;
        out.pair_table[i][j] = compare_sequences(A.members[i], B.members[j]).relation;
    }
    auto preceq = [](Relation r) { return r == Relation::Preceq || r == Relation::Lhd || r == Relation::Approx; };
    auto succeq = [](Relation r) { return r == Relation::Succeq || r == Relation::Rhd || r == Relation::Approx; };

    auto asc = [](const WeightMatrix& m) { return size_order(m); };
    auto desc = [](const WeightMatrix& m) {
        auto o = size_order(m);
        std::reverse(o.begin(), o.end());
        return o;
    };

    // X{<=}Y: every X member lies below some Y member (search Y upward).
    auto roumieu = [&](bool a_first, const std::string& key) {
        const WeightMatrix& X = a_first ? A : B;
        const WeightMatrix& Y = a_first ? B : A;
        bool all = true;
        for (std::size_t i = 0; i < X.size(); ++i) {
            Found f = search_partner(
                Y, asc(Y), +1, true, 8,
                [&](std::size_t j, double&) {
                    Relation r = a_first ? out.pair_table[i][j] : out.pair_table[j][i];
                    return a_first ? preceq(r) : succeq(r);
                },
                [&](const LogWeightSeq& m, double&) { return compare_sequences(X.members[i], m).preceq(); });
            if (!f.ok) {
                all = false;
                break;
            }
            out.pairings[key].push_back({X.params[i], f.param, f.off_grid});
        }
        if (!all) out.pairings.erase(key);
        return all;
    };
    // X(<=)Y: every Y member lies above some X member (search X downward).
    auto beurling = [&](bool a_first, const std::string& key) {
        const WeightMatrix& X = a_first ? A : B;
        const WeightMatrix& Y = a_first ? B : A;
        bool all = true;
        for (std::size_t j = 0; j < Y.size(); ++j) {
            Found f = search_partner(
                X, desc(X), -1, true, 8,
                [&](std::size_t i, double&) {
                    Relation r = a_first ? out.pair_table[i][j] : out.pair_table[j][i];
                    return a_first ? preceq(r) : succeq(r);
                },
                [&](const LogWeightSeq& m, double&) { return compare_sequences(m, Y.members[j]).preceq(); });
            if (!f.ok) {
                all = false;
                break;
            }
            out.pairings[key].push_back({Y.params[j], f.param, f.off_grid});
        }
        if (!all) out.pairings.erase(key);
        return all;
    };

    const bool rou_ab = roumieu(true, "RouPreceq");
    const bool beu_ab = beurling(true, "BeuPreceq");
    const bool rou_ba = roumieu(false, "RouPreceq_reverse");
    const bool beu_ba = beurling(false, "BeuPreceq_reverse");
    bool lhd_all = true;
    for (auto& row : out.pair_table)
        for (Relation r : row) lhd_all = lhd_all && r == Relation::Lhd;

    if (rou_ab) out.holds.push_back(MatrixRel::RouPreceq);
    if (beu_ab) out.holds.push_back(MatrixRel::BeuPreceq);
    if (lhd_all) out.holds.push_back(MatrixRel::RouLhdBeu);
    if (rou_ab && beu_ab && rou_ba && beu_ba) out.holds.push_back(MatrixRel::ApproxBoth);
    out.notes["reverse_RouPreceq"] = rou_ba ? "true" : "false";
    out.notes["reverse_BeuPreceq"] = beu_ba ? "true" : "false";
    out.notes["caveat"] = "quantifiers range over the sampled parameter grids";
    bool any_off = false;
    for (auto& [k, v] : out.pairings)
        for (auto& p : v) any_off = any_off || p.off_grid;
    if (any_off) out.notes["off_grid"] = "some partners were built from the family beyond the sampled grid";
    return out;
}

const char* matrix_prop_name(MatrixProp p) {
    switch (p) {
    case MatrixProp::MatrixAnal: return "MatrixAnal";
    case MatrixProp::RSemiregular: return "RSemiregular";
    case MatrixProp::BSemiregular: return "BSemiregular";
    case MatrixProp::Rmg: return "Rmg";
    case MatrixProp::Bmg: return "Bmg";
    case MatrixProp::RL: return "RL";
    case MatrixProp::BL: return "BL";
    }
    return "?";
}

MatrixProp parse_matrix_prop(const std::string& s) {
    for (MatrixProp p : {MatrixProp::MatrixAnal, MatrixProp::RSemiregular, MatrixProp::BSemiregular, MatrixProp::Rmg,
                         MatrixProp::Bmg, MatrixProp::RL, MatrixProp::BL})
        if (s == matrix_prop_name(p)) return p;
    throw Error(Errc::OutOfRangeParam, "unknown matrix property '" + s + "'");
}

namespace {

PairBound bounded(const std::vector<double>& x) {
    Trend t = tail_trend(x);
    double mx = *std::max_element(x.begin(), x.end());
    return {t.slope <= kTrendTol, std::max(0.0, mx), t.slope};
}

// M_{k+1} <= C^{k+1} N_k
PairBound semireg_bound(const LogWeightSeq& M, const LogWeightSeq& N) {
    std::vector<double> x;
    for (long k = 0; k < M.K(); ++k) x.push_back((M.log_M(k + 1) - N.log_M(k)) / static_cast<double>(k + 1));
    return bounded(x);
}

// M_{j+k} <= C^{j+k} N_j N_k
PairBound mg_bound(const LogWeightSeq& M, const LogWeightSeq& N) {
    std::vector<double> x;
    for (long n = 1; n <= M.K(); ++n) {
        double best = -std::numeric_limits<double>::infinity();
        for (long j = 0; j <= n; ++j) best = std::max(best, M.log_M(n) - N.log_M(j) - N.log_M(n - j));
        x.push_back(best / static_cast<double>(n));
    }
    return bounded(x);
}

// h^k M_k <= D N_k
PairBound l_bound(const LogWeightSeq& M, const LogWeightSeq& N, double h) {
    std::vector<double> x;
    const double lh = std::log(h);
    for (long k = 0; k <= M.K(); ++k) x.push_back(static_cast<double>(k) * lh + M.log_M(k) - N.log_M(k));
    return bounded(x);
}

}  // namespace

Verdict check_matrix_property(const WeightMatrix& A, MatrixProp prop, const MatrixCheckOptions& opt) {
    Verdict v;
    v.diag.k_range = {0, A.K()};
    v.diag.notes["caveat"] = "quantifiers range over the sampled parameter grid";
    if (prop == MatrixProp::MatrixAnal) {
        bool all = true, any_fail = false;
        for (std::size_t i = 0; i < A.size(); ++i) {
            Verdict m = check_property(A.members[i], Prop::AnalyticIncl);
            v.witnesses["root_m_K[" + num(A.params[i]) + "]"] = m.witnesses["root_m_K"];
            all = all && m.status == Status::Holds;
            if (m.status == Status::Fails) {
                any_fail = true;
                v.counterexample = std::vector<long>{static_cast<long>(i)};
            }
        }
        v.status = all ? Status::Holds : (any_fail ? Status::Fails : Status::Inconclusive);
        return v;
    }

    auto order = size_order(A);
    std::vector<double> hs{1.0};
    if (prop == MatrixProp::RL || prop == MatrixProp::BL) hs = opt.h_grid;
    const bool roumieu = prop == MatrixProp::RSemiregular || prop == MatrixProp::Rmg || prop == MatrixProp::RL;

    auto bound = [&](const LogWeightSeq& small, const LogWeightSeq& big, double h) {
        switch (prop) {
        case MatrixProp::RSemiregular:
        case MatrixProp::BSemiregular: return semireg_bound(small, big);
        case MatrixProp::Rmg:
        case MatrixProp::Bmg: return mg_bound(small, big);
        default: return l_bound(small, big, h);
        }
    };

    v.status = Status::Holds;
    bool off_grid = false;
    for (std::size_t pos = 0; pos < order.size() && v.status == Status::Holds; ++pos) {
        const std::size_t u = order[pos];
        for (double h : hs) {
            // Roumieu forms look upward from the universal member, Beurling forms downward.
            std::vector<std::size_t> cand;
            if (roumieu) cand.assign(order.begin() + static_cast<long>(pos), order.end());
            else
                for (long q = static_cast<long>(pos); q >= 0; --q) cand.push_back(order[static_cast<std::size_t>(q)]);
            const LogWeightSeq& U = A.members[u];
            Found f = search_partner(
                A, cand, roumieu ? +1 : -1, opt.allow_extension, opt.max_extension_steps,
                [&](std::size_t i, double& c) {
                    PairBound b = roumieu ? bound(U, A.members[i], h) : bound(A.members[i], U, h);
                    c = b.log_const;
                    return b.bounded;
                },
                [&](const LogWeightSeq& m, double& c) {
                    PairBound b = roumieu ? bound(U, m, h) : bound(m, U, h);
                    c = b.log_const;
                    return b.bounded;
                });
            std::string tag = "[" + num(A.params[u]);
            if (prop == MatrixProp::RL || prop == MatrixProp::BL) tag += ",h=" + num(h);
            tag += "]";
            if (!f.ok) {
                v.status = Status::Inconclusive;
                v.diag.notes["missing_partner"] = tag;
                v.diag.notes["direction"] = roumieu ? "above" : "below";
                if (A.parametric() && opt.allow_extension)
                    v.diag.notes["ladder"] = "extension ladder exhausted";
                break;
            }
            v.witnesses["partner" + tag] = f.param;
            v.witnesses[(prop == MatrixProp::RL || prop == MatrixProp::BL ? "D" : "C") + tag] = std::exp(f.log_const);
            off_grid = off_grid || f.off_grid;
        }
    }
    if (off_grid) {
        v.witnesses["partner_off_grid"] = 1.0;
        v.diag.notes["off_grid"] = "some partners were built from the family beyond the sampled grid";
    }
    return v;
}

}
