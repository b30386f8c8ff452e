#include "ultrascale/scales.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace us {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// log^{(j+1)}(t + e^{(j)}); see the matching helper in seqcore.
double iter_log(int j, double t) {
    if (j >= 4) return 0.0;
    double v = iterated_exp(j - 1) + std::log1p(t / iterated_exp(j));
    for (int i = 1; i < j; ++i) v = std::log(v);
    return std::log(v);
}

const char* kind_name(GenKind k) {
    switch (k) {
    case GenKind::GevreyGen: return "GevreyGen";
    case GenKind::PowerGen: return "PowerGen";
    case GenKind::LogIterGen: return "LogIterGen";
    case GenKind::FromOmega: return "FromOmega";
    case GenKind::Custom: return "Custom";
    }
    return "?";
}

std::vector<double> t_samples(double t_max, std::size_t n) { return logspace(1.0, t_max, scaled(n)); }

std::vector<double> p_samples(double p_max) {
    std::vector<double> ps;
    for (double p : logspace(1.0, p_max, scaled(256))) {
        double r = std::round(p);
        if (ps.empty() || r > ps.back()) ps.push_back(r);
    }
    ps.insert(ps.begin(), 0.0);
    return ps;
}

}  // namespace

bool GenFn::admissible(double p) const {
    if (!std::isfinite(p) || !(p > 0)) return false;
    if (spec_.shape_indexed) {
        if (spec_.kind == GenKind::PowerGen) return p > 1;
        if (spec_.kind == GenKind::LogIterGen) return p == std::floor(p) && p >= 1 && p <= 3;
    }
    return true;
}

double GenFn::zeta(double p, double t) const {
    if (!(t > 0)) return 0.0;
    switch (spec_.kind) {
    case GenKind::GevreyGen: return t > 1 ? p * t * std::log(t) : 0.0;
    case GenKind::PowerGen:
        return spec_.shape_indexed ? spec_.lambda_fixed * std::pow(t, p) : p * std::pow(t, spec_.r);
    case GenKind::LogIterGen:
        return spec_.shape_indexed ? spec_.lambda_fixed * t * iter_log(static_cast<int>(p), t)
                                   : p * t * iter_log(spec_.j, t);
    case GenKind::FromOmega: return conj_->eval(p * t) / p;
    case GenKind::Custom: return spec_.custom(p, t);
    }
    return 0.0;
}

std::optional<double> GenFn::next_param(double p, int dir) const {
    if (!parametric()) return std::nullopt;
    std::optional<double> out;
    if (spec_.shape_indexed && spec_.kind == GenKind::LogIterGen) out = dir > 0 ? p - 1 : p + 1;
    else if (spec_.shape_indexed && spec_.kind == GenKind::PowerGen) out = dir > 0 ? 2 * p : 1 + (p - 1) / 2;
    else out = dir > 0 ? 2 * p : p / 2;
    if (!admissible(*out)) return std::nullopt;
    return out;
}

GenFn make_genfn(const GenFnSpec& spec, std::vector<double> grid, long K_axiom) {
    if (grid.size() < 1) throw Error(Errc::OutOfRangeParam, "empty parameter grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(Errc::OrderViolation, "parameter grid must be strictly increasing");
    GenFn z;
    z.spec_ = spec;
    z.grid_ = std::move(grid);
    z.order_reversed_ = spec.kind == GenKind::Custom ? spec.order_reversed
                                                     : spec.shape_indexed && spec.kind == GenKind::LogIterGen;
    if (spec.kind == GenKind::PowerGen && !spec.shape_indexed && !(spec.r > 1))
        throw Error(Errc::OutOfRangeParam, "PowerGen needs r > 1");
    if (spec.kind == GenKind::LogIterGen && !spec.shape_indexed && spec.j < 1)
        throw Error(Errc::OutOfRangeParam, "LogIterGen needs j >= 1");
    if (spec.kind == GenKind::Custom && !spec.custom) throw Error(Errc::MissingSupportObject, "custom zeta missing");
    if (spec.shape_indexed && !(spec.lambda_fixed > 0)) throw Error(Errc::OutOfRangeParam, "lambda must be positive");
    for (double p : z.grid_)
        if (spec.kind != GenKind::Custom && !z.admissible(p))
            throw Error(Errc::OutOfRangeParam, "parameter " + num(p) + " is outside the index set");
    if (spec.kind == GenKind::FromOmega) {
        if (!spec.omega) throw Error(Errc::MissingSupportObject, "FromOmega without omega");
        // room for the largest grid member, the ladder and dilations up to 4
        const double cap = z.grid_.back() * 16.0 * 4.0 * 1e5;
        z.conj_ = std::make_shared<YoungConjugate>(young_conjugate(*spec.omega, logspace(1e-3, cap, 256)));
    }
    if (spec.label.empty()) {
        z.label_ = kind_name(spec.kind);
        if (spec.kind == GenKind::PowerGen && !spec.shape_indexed) z.label_ += "{" + num(spec.r) + "}";
        if (spec.kind == GenKind::LogIterGen && !spec.shape_indexed) z.label_ += "{" + std::to_string(spec.j) + "}";
        if (spec.kind == GenKind::FromOmega) z.label_ += "(" + spec.omega->label() + ")";
        if (spec.shape_indexed) z.label_ += "[shape,lambda=" + num(spec.lambda_fixed) + "]";
    } else {
        z.label_ = spec.label;
    }

    const bool weak = spec.axioms == AxiomSet::Weak;
    const std::string set = weak ? " (weak axioms)" : " (strong axioms)";
    auto ts = t_samples(1e5, 256);
    for (double p : z.grid_) {
        const std::string at = "lambda=" + num(p);
        if (z.zeta(p, 0.0) != 0.0) throw Error(Errc::AxiomViolation, "zeta(0) != 0 at " + at + set);
        double prev = -std::numeric_limits<double>::infinity();
        for (long k = 1; k <= K_axiom; ++k) {
            const double kk = static_cast<double>(k);
            double inc = z.zeta(p, kk) - z.zeta(p, kk - 1);
            if (!weak) inc += std::log(kk);
            if (inc < prev - 1e-9 * std::max(1.0, std::abs(prev)))
                throw Error(Errc::AxiomViolation, "increment sequence decreases at " + at + ", k=" + std::to_string(k) + set);
            prev = inc;
        }
        // zeta(t)/t (minus log t for the weak set) must grow on the samples
        double first = 0, last = 0, before = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            double g = z.zeta(p, ts[i]) / ts[i] - (weak ? std::log(ts[i]) : 0.0);
            if (g < before - 1e-9 * std::max(1.0, std::abs(before)))
                throw Error(Errc::AxiomViolation, "zeta(t)/t is not increasing at " + at + ", t=" + num(ts[i]) + set);
            before = g;
            if (i == 0) first = g;
            last = g;
        }
        if (!(last > first)) throw Error(Errc::AxiomViolation, "zeta(t)/t does not grow at " + at + set);
    }
    for (std::size_t i = 0; i + 1 < z.grid_.size(); ++i) {
        const double lo = z.order_reversed_ ? z.grid_[i + 1] : z.grid_[i];
        const double hi = z.order_reversed_ ? z.grid_[i] : z.grid_[i + 1];
        for (double t : ts)
            if (z.zeta(lo, t) > z.zeta(hi, t) * (1 + 1e-12) + 1e-12)
                throw Error(Errc::AxiomViolation, "order fails between " + num(lo) + " and " + num(hi) + " at t=" + num(t));
    }
    return z;
}

WeightMatrix scale_to_matrix(const GenFn& z, long K, Flavor flavor) {
    if (K < 2) throw Error(Errc::TruncationTooSmall, "K must be at least 2");
    const bool strong = flavor == Flavor::Strong;
    const GenFnSpec& s = z.spec();
    MatrixSpec ms;
    ms.kind = MatrixKind::Custom;
    ms.order_reversed = z.order_reversed();
    ms.label = (strong ? "M[" : "Mweak[") + z.label() + "]";
    for (double p : z.grid()) {
        std::vector<double> lt(static_cast<std::size_t>(K) + 1);
        for (long k = 0; k <= K; ++k) {
            const double kk = static_cast<double>(k);
            lt[static_cast<std::size_t>(k)] = (strong ? std::lgamma(kk + 1) : 0.0) + z.zeta(p, kk);
        }
        lt[0] = 0.0;
        // tag the built-in families so analytic tables apply downstream
        std::optional<SeqFamily> fam;
        if (s.kind == GenKind::PowerGen) {
            const double q = std::exp(s.shape_indexed ? s.lambda_fixed : p), r = s.shape_indexed ? p : s.r;
            if (strong) fam = LQR{q, r};
            else fam = NQR{q, r};
        } else if (s.kind == GenKind::LogIterGen && strong) {
            fam = s.shape_indexed ? BJSigma{static_cast<int>(p), s.lambda_fixed} : BJSigma{s.j, p};
        }
        if (!fam) {
            auto table = std::make_shared<std::vector<double>>(lt);
            fam = CustomSeq{[table](long k) { return table->at(static_cast<std::size_t>(k)); },
                            ms.label + "^" + num(p)};
        }
        std::string lab = ms.label + "^" + num(p);
        ms.members.emplace_back(std::move(lt), *fam, lab);
    }
    return build_matrix(ms, z.grid(), K);
}

const char* scale_cond_name(ScaleCond c) {
    switch (c) {
    case ScaleCond::Square: return "Square";
    case ScaleCond::Star: return "Star";
    case ScaleCond::Diamond: return "Diamond";
    case ScaleCond::TriRight: return "TriRight";
    case ScaleCond::TriLeft: return "TriLeft";
    case ScaleCond::PseudoHom: return "PseudoHom";
    }
    return "?";
}

ScaleCond parse_scale_cond(const std::string& s) {
    for (ScaleCond c : {ScaleCond::Square, ScaleCond::Star, ScaleCond::Diamond, ScaleCond::TriRight,
                        ScaleCond::TriLeft, ScaleCond::PseudoHom})
        if (s == scale_cond_name(c)) return c;
    throw Error(Errc::OutOfRangeParam, "unknown scale condition '" + s + "'");
}

namespace {

// sup of num(x)/(x+1) over the samples with the tail trend against log x.
template <class Num>
AffineBound sup_bound(const std::vector<double>& xs, Num numer) {
    AffineBound b;
    std::vector<double> lx, y;
    double best = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        double v = numer(x) / (x + 1);
        if (!std::isfinite(v)) return b;
        if (v > best) {
            best = v;
            b.worst_t = x;
        }
        lx.push_back(std::log(std::max(x, 1.0)));
        y.push_back(v);
    }
    // log x repeats at x = 0 and x = 1; drop the leading duplicate
    if (lx.size() > 1 && lx[0] == lx[1]) {
        lx.erase(lx.begin());
        y.erase(y.begin());
    }
    Trend t = tail_trend(lx, y);
    b.slope = t.slope;
    // flatness is judged against the size of the ratio, so lambda-scaled copies agree
    b.bounded = t.slope <= kTrendTol * std::max({1.0, std::abs(t.tail_max), std::abs(t.tail_min)});
    b.gamma = std::max(0.0, best);
    return b;
}

std::string cell(double lambda, std::optional<double> alpha = std::nullopt) {
    std::string s = "[" + num(lambda);
    if (alpha) s += ",alpha=" + num(*alpha);
    return s + "]";
}

// Grid indices ordered from the smallest to the largest member.
std::vector<std::size_t> size_order(const GenFn& z) {
    std::vector<std::size_t> o(z.grid().size());
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = z.order_reversed() ? o.size() - 1 - i : i;
    return o;
}

// Position of p in size order (members at or above it when dir > 0, at or below otherwise).
std::vector<double> candidates_from(const GenFn& z, double p, int dir) {
    auto o = size_order(z);
    std::vector<double> out;
    auto larger_eq = [&](double a, double b) { return z.order_reversed() ? a <= b : a >= b; };
    if (dir > 0) {
        for (std::size_t i : o)
            if (larger_eq(z.grid()[i], p)) out.push_back(z.grid()[i]);
    } else {
        for (auto it = o.rbegin(); it != o.rend(); ++it)
            if (larger_eq(p, z.grid()[*it])) out.push_back(z.grid()[*it]);
    }
    return out;
}

// Walk on-grid candidates, then the ladder beyond the extreme grid member.
template <class Test>
PartnerResult search(const GenFn& w, std::vector<double> cands, int dir, int steps, Test test) {
    PartnerResult r;
    for (double c : cands) {
        AffineBound b = test(c);
        if (b.bounded) return {true, c, false, b};
    }
    auto o = size_order(w);
    double p = dir > 0 ? w.grid()[o.back()] : w.grid()[o.front()];
    for (int s = 0; s < steps; ++s) {
        auto np = w.next_param(p, dir);
        if (!np) break;
        p = *np;
        try {
            AffineBound b = test(p);
            if (b.bounded) return {true, p, true, b};
        } catch (const Error&) {
            break;  // beyond the precomputed range of the generating function
        }
    }
    return r;
}

}  // namespace

AffineBound affine_bound(const GenFn& z, double lambda, double alpha, const GenFn& w, double partner,
                         const std::vector<double>& ts) {
    return sup_bound(ts, [&](double t) { return z.zeta(lambda, alpha * t) - w.zeta(partner, t); });
}

PartnerResult dilation_partner(const GenFn& z, double lambda, double alpha, const GenFn& w, int dir,
                               const ScaleCheckOptions& opt) {
    auto ts = t_samples(opt.t_max, opt.t_points);
    std::vector<double> cands;
    if (&z == &w) {
        cands = candidates_from(w, lambda, dir);
    } else {
        auto o = size_order(w);
        if (dir < 0) std::reverse(o.begin(), o.end());
        for (std::size_t i : o) cands.push_back(w.grid()[i]);
    }
    auto one = [&](double partner) {
        // dir > 0: lambda is universal and the partner sits above; dir < 0: lambda is the upper member
        return dir > 0 ? affine_bound(z, lambda, alpha, w, partner, ts) : affine_bound(z, partner, alpha, w, lambda, ts);
    };
    return search(dir > 0 ? w : z, cands, dir, opt.max_extension_steps, one);
}

Verdict check_scale_condition(const GenFn& z, ScaleCond cond, const ScaleCheckOptions& opt) {
    Verdict v;
    v.diag.notes["axiom_set"] = z.axioms() == AxiomSet::Strong ? "strong" : "weak";
    v.diag.notes["caveat"] = "quantifiers range over the sampled parameter and alpha grids";
    const auto& grid = z.grid();
    const bool dilation = cond == ScaleCond::TriRight || cond == ScaleCond::TriLeft || cond == ScaleCond::PseudoHom;
    if (dilation)
        for (double a : opt.alpha_grid)
            if (!(a > 1)) throw Error(Errc::OutOfRangeParam, "alpha grid must lie in (1, inf)");
    if (cond == ScaleCond::PseudoHom && z.spec().shape_indexed) {
        v.status = Status::Inconclusive;
        v.diag.notes["reason"] = "the index set is not a cone, so c alpha^q lambda is undefined";
        return v;
    }

    struct Cell {
        double lambda, alpha;
        bool ok = false, off_grid = false;
        double partner = 0, gamma = 0, q = 0;
        std::string missing;
    };
    std::vector<Cell> cells;
    for (double l : grid) {
        if (dilation)
            for (double a : opt.alpha_grid) cells.push_back({l, a});
        else
            cells.push_back({l, 0});
    }

    const auto ts = t_samples(opt.t_max, opt.t_points);
    const auto dense = t_samples(opt.t_max, opt.t_points * 10);
    const auto ps = p_samples(opt.p_max);
    const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long ci = 0; ci < n; ++ci) {
        Cell& c = cells[static_cast<std::size_t>(ci)];
        const double l = c.lambda, a = c.alpha;
        switch (cond) {
        case ScaleCond::Square: {
            AffineBound b = sup_bound(ps, [&](double p) { return z.zeta(l, p + 1) - z.zeta(l, p); });
            c.ok = b.bounded;
            c.gamma = b.gamma;
            c.partner = l;
            break;
        }
        case ScaleCond::Star:
        case ScaleCond::Diamond: {
            const int dir = cond == ScaleCond::Star ? +1 : -1;
            PartnerResult r = search(z, candidates_from(z, l, dir), dir, opt.max_extension_steps, [&](double s) {
                return sup_bound(ps, [&](double p) {
                    return dir > 0 ? z.zeta(l, p + 1) - z.zeta(s, p) : z.zeta(s, p + 1) - z.zeta(l, p);
                });
            });
            c.ok = r.found;
            c.partner = r.partner;
            c.off_grid = r.off_grid;
            c.gamma = r.bound.gamma;
            break;
        }
        case ScaleCond::TriRight:
        case ScaleCond::TriLeft: {
            const int dir = cond == ScaleCond::TriRight ? +1 : -1;
            PartnerResult r = dilation_partner(z, l, a, z, dir, opt);
            c.ok = r.found;
            c.partner = r.partner;
            c.off_grid = r.off_grid;
            if (r.found) {
                // stress the witness on the denser grid
                AffineBound d = dir > 0 ? affine_bound(z, l, a, z, r.partner, dense)
                                        : affine_bound(z, r.partner, a, z, l, dense);
                c.gamma = std::max(r.bound.gamma, d.gamma);
            }
            break;
        }
        case ScaleCond::PseudoHom: {
            for (double q : opt.q_candidates) {
                const double partner = std::pow(a, q) * l;
                if (!z.admissible(partner)) continue;
                AffineBound b;
                try {
                    b = affine_bound(z, l, a, z, partner, ts);
                } catch (const Error&) {
                    continue;
                }
                if (!b.bounded) continue;
                AffineBound d = affine_bound(z, l, a, z, partner, dense);
                double g = std::max(b.gamma, d.gamma);
                // rounding of the two evaluations relative to the size of zeta itself
                double scale = 0;
                for (double t : ts) scale = std::max(scale, std::abs(z.zeta(partner, t)) / (t + 1));
                if (g <= 1e-13 * std::max(1.0, scale)) g = 0.0;
                c.ok = true;
                c.partner = partner;
                c.q = q;
                c.gamma = g;
                c.off_grid = std::find(grid.begin(), grid.end(), partner) == grid.end();
                break;
            }
            break;
        }
        }
    }

    v.status = Status::Holds;
    bool off = false;
    for (const Cell& c : cells) {
        const std::string key = dilation ? cell(c.lambda, c.alpha) : cell(c.lambda);
        if (!c.ok) {
            v.status = cond == ScaleCond::Square ? Status::Fails : Status::Inconclusive;
            v.diag.notes["first_failure"] = key;
            if (cond == ScaleCond::Square) v.counterexample = std::vector<long>{};
            if (cond != ScaleCond::Square) {
                const bool up = cond == ScaleCond::Star || cond == ScaleCond::TriRight || cond == ScaleCond::PseudoHom;
                v.diag.notes["direction"] = up ? "above" : "below";
                if (z.parametric()) v.diag.notes["ladder"] = "extension ladder exhausted";
            }
            break;
        }
        v.witnesses["gamma" + key] = c.gamma;
        if (cond != ScaleCond::Square) v.witnesses["partner" + key] = c.partner;
        if (cond == ScaleCond::PseudoHom) {
            v.witnesses["q" + key] = c.q;
            v.witnesses["c" + key] = 1.0;
        }
        off = off || c.off_grid;
    }
    if (off) {
        v.witnesses["partner_off_grid"] = 1.0;
        v.diag.notes["off_grid"] = "some partners lie beyond the sampled grid";
    }
    v.diag.k_range = {0, static_cast<long>(dilation ? opt.t_max : opt.p_max)};
    return v;
}

ScaleReport scale_report(const GenFn& z, const ScaleCheckOptions& opt) {
    ScaleReport r;
    for (ScaleCond c : {ScaleCond::Square, ScaleCond::Star, ScaleCond::Diamond, ScaleCond::TriRight,
                        ScaleCond::TriLeft, ScaleCond::PseudoHom})
        r.verdicts[c] = check_scale_condition(z, c, opt);
    auto holds = [&](ScaleCond c) { return r.verdicts[c].status == Status::Holds; };
    r.fitting = holds(ScaleCond::Square) && holds(ScaleCond::TriRight);
    r.apposite = holds(ScaleCond::Square) && holds(ScaleCond::TriLeft);
    r.r_admissible = holds(ScaleCond::Star) && holds(ScaleCond::TriRight);
    r.b_admissible = holds(ScaleCond::Diamond) && holds(ScaleCond::TriLeft);
    return r;
}

PairClassification classify_scale_pair(const GenFn& zeta, const GenFn& eta, double alpha, bool request_comparability,
                                       const ScaleCheckOptions& opt) {
    if (!(alpha >= 1)) throw Error(Errc::OutOfRangeParam, "alpha must be at least 1");
    PairClassification out;
    const auto& A = zeta.grid();
    const auto& B = eta.grid();
    const auto ts = t_samples(opt.t_max, opt.t_points);
    out.phi_limsup.assign(A.size(), std::vector<double>(B.size()));
    out.phi_liminf = out.phi_limsup;
    out.phi_slope = out.phi_limsup;
    std::vector<double> lx;
    for (double t : ts) lx.push_back(std::log(t));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < B.size(); ++j) {
            std::vector<double> y;
            for (double t : ts) y.push_back((zeta.zeta(A[i], t) - eta.zeta(B[j], t)) / t);
            Trend tr = tail_trend(lx, y);
            out.phi_limsup[i][j] = tr.tail_max;
            out.phi_liminf[i][j] = tr.tail_min;
            out.phi_slope[i][j] = tr.slope;
        }
    auto above_bounded = [&](std::size_t i, std::size_t j) { return out.phi_slope[i][j] <= kTrendTol; };
    out.rou_preceq = true;
    for (std::size_t i = 0; i < A.size(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < B.size(); ++j) any = any || above_bounded(i, j);
        out.rou_preceq = out.rou_preceq && any;
    }
    out.beu_preceq = true;
    for (std::size_t j = 0; j < B.size(); ++j) {
        bool any = false;
        for (std::size_t i = 0; i < A.size(); ++i) any = any || above_bounded(i, j);
        out.beu_preceq = out.beu_preceq && any;
    }
    out.rou_lhd_beu = true;
    for (auto& row : out.phi_slope)
        for (double s : row) out.rou_lhd_beu = out.rou_lhd_beu && s < -kTrendTol;

    // mixed conditions; alpha = 1 reduces to the plain comparison
    ScaleCheckOptions o = opt;
    auto mixed = [&](bool roumieu) {
        Verdict v;
        v.status = Status::Holds;
        const auto& U = roumieu ? A : B;
        for (double u : U) {
            PartnerResult r;
            auto bound = [&](double x) {
                return roumieu ? affine_bound(zeta, u, alpha, eta, x, ts) : affine_bound(zeta, x, alpha, eta, u, ts);
            };
            // Roumieu looks for the smallest eta above, Beurling for the largest zeta below
            auto order = size_order(roumieu ? eta : zeta);
            if (!roumieu) std::reverse(order.begin(), order.end());
            std::vector<double> cands;
            for (std::size_t i : order) cands.push_back((roumieu ? B : A)[i]);
            r = search(roumieu ? eta : zeta, cands, roumieu ? +1 : -1, o.max_extension_steps, bound);
            if (!r.found) {
                v.status = Status::Inconclusive;
                v.diag.notes["missing_partner"] = cell(u);
                v.diag.notes["direction"] = roumieu ? "above" : "below";
                break;
            }
            v.witnesses["partner" + cell(u)] = r.partner;
            v.witnesses["gamma" + cell(u)] = r.bound.gamma;
            if (r.off_grid) v.witnesses["partner_off_grid"] = 1.0;
        }
        v.diag.notes["form"] = roumieu ? "for all lambda exists upsilon" : "for all upsilon exists lambda";
        v.diag.notes["alpha"] = num(alpha);
        return v;
    };
    out.mixed_roumieu = mixed(true);
    out.mixed_beurling = mixed(false);

    if (A.size() != B.size()) {
        if (request_comparability)
            throw Error(Errc::GridMismatch, "comparability needs grids of equal length (" + std::to_string(A.size()) +
                                                " vs " + std::to_string(B.size()) + ")");
        out.notes["comparable"] = "not evaluated: grids differ in length";
    } else {
        bool comp = true;
        for (std::size_t i = 0; i < A.size(); ++i) comp = comp && std::abs(out.phi_slope[i][i]) <= kTrendTol;
        out.comparable = comp;
    }
    out.notes["caveat"] = "limits are read off tail trends of Phi against log t on [1, " + num(opt.t_max) + "]";
    return out;
}

}
