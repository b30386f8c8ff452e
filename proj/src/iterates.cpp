#include "ultrascale/iterates.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace us {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

Rational Rational::make(__int128 n, __int128 d) {
    if (d == 0) throw Error(Errc::OutOfRangeParam, "rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    __int128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    const __int128 lim = std::numeric_limits<std::int64_t>::max();
    if (n > lim || -n > lim || d > lim) throw Error(Errc::OutOfRangeParam, "rational overflow");
    return Rational(Raw{}, static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

Rational::Rational(std::int64_t n, std::int64_t d) : n_(0), d_(1) { *this = make(n, d); }

std::string Rational::str() const { return d_ == 1 ? std::to_string(n_) : std::to_string(n_) + "/" + std::to_string(d_); }

Rational operator+(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<__int128>(a.n_) * b.d_ + static_cast<__int128>(b.n_) * a.d_,
                          static_cast<__int128>(a.d_) * b.d_);
}
Rational operator-(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<__int128>(a.n_) * b.d_ - static_cast<__int128>(b.n_) * a.d_,
                          static_cast<__int128>(a.d_) * b.d_);
}
Rational operator*(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<__int128>(a.n_) * b.n_, static_cast<__int128>(a.d_) * b.d_);
}
Rational operator/(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<__int128>(a.n_) * b.d_, static_cast<__int128>(a.d_) * b.n_);
}
bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.n_) * b.d_ < static_cast<__int128>(b.n_) * a.d_;
}

Rational Rational::pow(int e) const {
    Rational r(1), b = *this;
    if (e < 0) {
        b = Rational(1) / b;
        e = -e;
    }
    for (int i = 0; i < e; ++i) r = r * b;
    return r;
}

std::optional<Rational> Rational::from_double(double v) {
    if (!std::isfinite(v) || std::abs(v) > 1e12) return std::nullopt;
    for (std::int64_t d = 1; d <= 10000; ++d) {
        double x = v * static_cast<double>(d);
        if (x == std::floor(x)) return Rational(static_cast<std::int64_t>(x), d);
    }
    return std::nullopt;
}

DeltaEps subellipticity_delta(const OperatorSpec& spec) {
    if (spec.order_d < 1) throw Error(Errc::OutOfRangeParam, "operator order must be positive");
    if (spec.char_type == CharType::Elliptic) return {Rational(0), Rational(spec.order_d)};
    if (spec.vanishing_order <= 0)
        throw Error(Errc::DeltaOutOfRange, "hypoelliptic operators need a positive vanishing order");
    if (spec.vanishing_order % 2 != 0)
        throw Error(Errc::OddVanishingOrder, "vanishing order " + std::to_string(spec.vanishing_order) + " is odd");
    Rational delta(spec.vanishing_order, spec.vanishing_order + 1);
    Rational eps = Rational(spec.order_d) - delta;
    if (!(Rational(0) < eps)) throw Error(Errc::DeltaOutOfRange, "d - delta must be positive");
    return {delta, eps};
}

Rational dilation_alpha(const OperatorSpec& spec) {
    DeltaEps de = subellipticity_delta(spec);
    return Rational(spec.order_d) / de.epsilon;
}

PushforwardResult scale_pushforward_witness(const GenFn& zeta, double lambda, const OperatorSpec& spec) {
    const double alpha = dilation_alpha(spec).to_double();
    PushforwardResult out;
    if (alpha == 1.0) {
        out.found = true;
        out.lambda_star = lambda;
        out.gamma = 0;
        return out;
    }
    ScaleCheckOptions opt;
    auto ts = logspace(1.0, opt.t_max, scaled(opt.t_points));
    auto dense = logspace(1.0, opt.t_max, scaled(opt.t_points * 10));
    auto on_grid = [&](double p) {
        for (double g : zeta.grid())
            if (g == p) return true;
        return false;
    };
    // pseudo-homogeneous partner alpha^q lambda first, when the index set is a cone
    if (!zeta.spec().shape_indexed && zeta.spec().kind != GenKind::Custom) {
        for (double q : opt.q_candidates) {
            const double partner = std::pow(alpha, q) * lambda;
            AffineBound b;
            try {
                b = affine_bound(zeta, lambda, alpha, zeta, partner, ts);
            } catch (const Error&) {
                continue;
            }
            if (!b.bounded) continue;
            AffineBound d = affine_bound(zeta, lambda, alpha, zeta, partner, dense);
            double g = std::max(b.gamma, d.gamma), scale = 0;
            for (double t : ts) scale = std::max(scale, std::abs(zeta.zeta(partner, t)) / (t + 1));
            if (g <= 1e-13 * std::max(1.0, scale)) g = 0.0;
            out.found = true;
            out.lambda_star = partner;
            out.gamma = g;
            out.off_grid = !on_grid(partner);
            return out;
        }
    }
    PartnerResult r = dilation_partner(zeta, lambda, alpha, zeta, +1, opt);
    if (!r.found) {
        out.direction = "above";
        return out;
    }
    out.found = true;
    out.lambda_star = r.partner;
    out.gamma = std::max(r.bound.gamma, affine_bound(zeta, lambda, alpha, zeta, r.partner, dense).gamma);
    out.off_grid = r.off_grid;
    return out;
}

namespace {

// omega(t^alpha) <= C (omega(H t) + 1): smallest H in powers of two with a bounded ratio.
Verdict xi_witness(const WeightFn& w, double alpha) {
    Verdict v;
    // ratios of logarithmic weights settle slowly in log t, so sample far out when the range allows
    const double tmax = std::isfinite(w.t_max()) ? std::pow(w.t_max(), 1.0 / alpha) / 1024.0
                                                 : std::exp(std::min(230.0, 690.0 / alpha));
    if (!(tmax > 10)) throw Error(Errc::TruncationTooSmall, "weight range too short for the witness search");
    auto ts = logspace(1.0, tmax, scaled(512));
    for (double H = 1; H <= 1024; H *= 2) {
        std::vector<double> lx, y;
        double C = 0;
        for (double t : ts) {
            double r = w(std::pow(t, alpha)) / (w(H * t) + 1);
            lx.push_back(std::log(t));
            y.push_back(r);
            C = std::max(C, r);
        }
        if (tail_trend(lx, y).slope <= kTrendTol) {
            v.status = Status::Holds;
            v.witnesses["H"] = H;
            v.witnesses["C"] = C;
            v.diag.notes["inequality"] = "omega(t^alpha) <= C (omega(H t) + 1)";
            return v;
        }
    }
    v.status = Status::Inconclusive;
    v.diag.notes["reason"] = "no H up to 1024 gave a bounded ratio";
    return v;
}

}  // namespace

LossResult loss_map(const ClassDesc& cls, const OperatorSpec& spec) {
    const DeltaEps de = subellipticity_delta(spec);
    const Rational d(spec.order_d);
    LossResult out;
    out.alpha = d / de.epsilon;
    const double alpha = out.alpha.to_double();

    if (auto g = std::get_if<GevreyClass>(&cls)) {
        if (!(g->s >= 1)) throw Error(Errc::OutOfRangeParam, "Gevrey index must be at least 1");
        out.formula = "s' = (d s - delta) / (d - delta)";
        out.citation = "Gevrey loss s' = (ds - delta)/(d - delta)";
        if (auto s = Rational::from_double(g->s)) {
            Rational sp = (d * *s - de.delta) / de.epsilon;
            out.exact = true;
            out.exact_value = sp;
            out.value = sp.to_double();
        } else {
            out.value = (spec.order_d * g->s - de.delta.to_double()) / de.epsilon.to_double();
        }
    } else if (auto q = std::get_if<QGevreyClass>(&cls)) {
        if (!(q->q > 1) || !(q->r > 1)) throw Error(Errc::OutOfRangeParam, "q-Gevrey needs q > 1 and r > 1");
        out.formula = "log q' = (d / (d - delta))^r log q";
        out.citation = "q' = q^{d^r/(d - delta)^r}";
        const double lq = std::log(q->q);
        if (q->r == std::floor(q->r) && q->r <= 64) {
            Rational f = out.alpha.pow(static_cast<int>(q->r));
            out.exact = true;
            out.log_factor = f;
            out.log_value = f.to_double() * lq;
        } else {
            out.log_value = std::pow(alpha, q->r) * lq;
        }
        double qq = std::exp(*out.log_value);
        if (std::isfinite(qq)) out.value = qq;
    } else if (auto b = std::get_if<BJClass>(&cls)) {
        if (b->j < 1 || !(b->lambda > 0)) throw Error(Errc::OutOfRangeParam, "BJ needs j >= 1 and lambda > 0");
        out.formula = "lambda' = d / (d - delta) lambda";
        out.citation = "lambda' = d/(d - delta) lambda";
        if (auto l = Rational::from_double(b->lambda)) {
            Rational lp = out.alpha * *l;
            out.exact = true;
            out.exact_value = lp;
            out.value = lp.to_double();
        } else {
            out.value = alpha * b->lambda;
        }
    } else if (auto s = std::get_if<ScaleClass>(&cls)) {
        if (!s->zeta) throw Error(Errc::MissingSupportObject, "scale loss needs a generating function");
        out.formula = "zeta_lambda(alpha t) <= zeta_lambda*(t) + gamma (t + 1), alpha = d / (d - delta)";
        out.citation = "zeta_lambda(d/(d - delta) t) <= zeta_lambda*(t) + C(t + 1)";
        PushforwardResult p = scale_pushforward_witness(*s->zeta, s->lambda, spec);
        if (p.found) {
            out.value = p.lambda_star;
            out.verdict.status = Status::Holds;
            out.verdict.witnesses["lambda_star"] = p.lambda_star;
            out.verdict.witnesses["gamma"] = p.gamma;
            if (p.off_grid) out.verdict.witnesses["partner_off_grid"] = 1.0;
        } else {
            out.verdict.status = Status::Inconclusive;
            out.verdict.diag.notes["direction"] = p.direction;
        }
    } else if (auto w = std::get_if<WeightFnClass>(&cls)) {
        if (!w->omega) throw Error(Errc::MissingSupportObject, "weight-function loss needs omega");
        out.citation = "omega(t^alpha) = O(sigma(H t)), alpha = d/(d - delta)";
        Verdict xi = check_weight_property(*w->omega, WeightPropSpec{WeightProp::Xi});
        if (alpha == 1.0) {
            out.formula = "sigma = omega (elliptic)";
            out.verdict.status = Status::Holds;
            out.verdict.witnesses["H"] = 1;
            out.verdict.witnesses["C"] = 1;
        } else if (xi.status == Status::Holds) {
            out.formula = "sigma = omega, omega(t^alpha) <= C (omega(H t) + 1)";
            out.verdict = xi_witness(*w->omega, alpha);
        } else {
            out.formula = "sigma must dominate t -> omega(t^alpha)";
            out.verdict.status = Status::Inconclusive;
            out.verdict.diag.notes["required_growth"] = "t -> " + w->omega->label() + "(t^" + num(alpha) + ")";
            out.verdict.diag.notes["xi_status"] = status_name(xi.status);
        }
        out.verdict.witnesses["alpha"] = alpha;
    }
    return out;
}

}
