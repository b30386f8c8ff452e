#include "ultrascale/probe.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "ultrascale/quadrature.hpp"

namespace us {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

bool pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// sign = FFTW_FORWARD or FFTW_BACKWARD, unnormalized
void fft(int dim, std::size_t n, std::vector<cplx>& data, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = dim == 1 ? fftw_plan_dft_1d(static_cast<int>(n), p, p, sign, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), p, p, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
}

int total_degree(const MultiIndex& a) { return a[0] + a[1]; }

cplx monomial(const MultiIndex& a, double x1, double x2) {
    return std::pow(x1, a[0]) * std::pow(x2, a[1]);
}

}  // namespace

cplx SymbolOp::symbol(double x1, double x2) const {
    cplx s = 0;
    for (const auto& [a, c] : coeffs) s += c * monomial(a, x1, x2);
    return s;
}

cplx SymbolOp::principal(double x1, double x2) const {
    cplx s = 0;
    for (const auto& [a, c] : coeffs)
        if (total_degree(a) == order_d) s += c * monomial(a, x1, x2);
    return s;
}

BuiltOperator build_operator(const std::map<MultiIndex, cplx>& coeffs, int dim) {
    if (dim != 1 && dim != 2) throw Error(Errc::OutOfRangeParam, "dim must be 1 or 2");
    BuiltOperator b;
    b.op.dim = dim;
    int d = -1;
    for (const auto& [a, c] : coeffs) {
        if (a[0] < 0 || a[1] < 0) throw Error(Errc::OutOfRangeParam, "negative multi-index");
        if (dim == 1 && a[1] != 0) throw Error(Errc::OutOfRangeParam, "second index must be 0 in dim 1");
        if (c == cplx(0)) continue;
        b.op.coeffs[a] = c;
        d = std::max(d, total_degree(a));
    }
    if (d < 1) throw Error(Errc::ZeroPrincipalPart, "operator has no nonzero coefficient of positive order");
    b.op.order_d = d;

    std::vector<std::array<double, 2>> dirs;
    if (dim == 1) {
        dirs = {{1.0, 0.0}, {-1.0, 0.0}};
    } else {
        const std::size_t m = 720;
        for (std::size_t i = 0; i < m; ++i) {
            double th = 2 * kPi * static_cast<double>(i) / static_cast<double>(m);
            double c = std::cos(th), s = std::sin(th);
            // keep exact zeros on the axes
            if (std::abs(c) < 1e-15) c = 0;
            if (std::abs(s) < 1e-15) s = 0;
            dirs.push_back({c, s});
        }
    }
    EllipticityReport& e = b.ellipticity;
    e.min_abs = kInf;
    for (const auto& dir : dirs) {
        double v = std::abs(b.op.principal(dir[0], dir[1]));
        if (v < e.min_abs) {
            e.min_abs = v;
            e.min_direction = dir;
        }
        e.max_abs = std::max(e.max_abs, v);
    }
    if (!(e.max_abs > 0)) throw Error(Errc::ZeroPrincipalPart, "principal part vanishes on every sampled direction");
    e.directions = dirs.size();
    e.elliptic = e.min_abs > 1e-12 * e.max_abs;
    return b;
}

int GridField::freq(std::size_t i) const {
    return i < n_ / 2 ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n_);
}

MultiIndex GridField::mode_of(std::size_t flat) const {
    if (dim_ == 1) return {freq(flat), 0};
    return {freq(flat / n_), freq(flat % n_)};
}

GridField GridField::from_samples(int dim, std::size_t n, std::vector<cplx> samples) {
    if (dim != 1 && dim != 2) throw Error(Errc::OutOfRangeParam, "dim must be 1 or 2");
    if (!pow2(n)) throw Error(Errc::OutOfRangeParam, "points per axis must be a power of two");
    const std::size_t N = dim == 1 ? n : n * n;
    if (samples.size() != N) throw Error(Errc::LengthMismatch, "sample count does not match the grid");
    GridField g;
    g.dim_ = dim;
    g.n_ = n;
    g.samples_ = std::move(samples);
    g.spectrum_ = g.samples_;
    fft(dim, n, g.spectrum_, FFTW_FORWARD);
    double mx = 0;
    for (auto& c : g.spectrum_) {
        c /= static_cast<double>(N);
        mx = std::max(mx, std::abs(c));
    }
    // transform round-off would otherwise seed every mode and dominate high iterates
    const double floor = 64 * std::numeric_limits<double>::epsilon() * mx;
    for (auto& c : g.spectrum_)
        if (std::abs(c) < floor) c = 0;
    return g;
}

GridField GridField::from_modes(int dim, std::size_t n, const std::vector<std::pair<MultiIndex, cplx>>& modes) {
    if (dim != 1 && dim != 2) throw Error(Errc::OutOfRangeParam, "dim must be 1 or 2");
    if (!pow2(n)) throw Error(Errc::OutOfRangeParam, "points per axis must be a power of two");
    GridField g;
    g.dim_ = dim;
    g.n_ = n;
    const std::size_t N = dim == 1 ? n : n * n;
    g.spectrum_.assign(N, 0);
    const int half = static_cast<int>(n / 2);
    auto idx = [&](int f) { return static_cast<std::size_t>((f + static_cast<int>(n)) % static_cast<int>(n)); };
    for (const auto& [m, c] : modes) {
        if (std::abs(m[0]) >= half || std::abs(m[1]) >= half)
            throw Error(Errc::OutOfRangeParam, "mode at or beyond the Nyquist frequency");
        if (dim == 1 && m[1] != 0) throw Error(Errc::OutOfRangeParam, "second frequency must be 0 in dim 1");
        std::size_t flat = dim == 1 ? idx(m[0]) : idx(m[0]) * n + idx(m[1]);
        g.spectrum_[flat] += c;
    }
    g.samples_ = g.spectrum_;
    fft(dim, n, g.samples_, FFTW_BACKWARD);
    return g;
}

double GridField::grid_norm() const {
    long double s = 0;
    for (const auto& v : samples_) s += std::norm(v);
    return std::sqrt(static_cast<double>(s / static_cast<long double>(samples_.size())));
}

double GridField::spectral_norm() const {
    long double s = 0;
    for (const auto& c : spectrum_) s += std::norm(c);
    return std::sqrt(static_cast<double>(s));
}

double GridField::parseval_error() const {
    const double g = grid_norm(), s = spectral_norm();
    if (g == 0 && s == 0) return 0;
    return std::abs(g - s) / std::max(g, s);
}

GridField GridField::apply(const SymbolOp& P) const {
    if (P.dim != dim_) throw Error(Errc::LengthMismatch, "operator and field dimensions differ");
    GridField g = *this;
    for (std::size_t i = 0; i < g.spectrum_.size(); ++i) {
        MultiIndex m = mode_of(i);
        g.spectrum_[i] *= P.symbol(m[0], m[1]);
    }
    g.samples_ = g.spectrum_;
    fft(dim_, n_, g.samples_, FFTW_BACKWARD);
    return g;
}

std::vector<double> iterate_norms(const GridField& u, const SymbolOp& P, int K_iter, ExecPolicy policy) {
    if (P.dim != u.dim()) throw Error(Errc::LengthMismatch, "operator and field dimensions differ");
    if (K_iter < 0) throw Error(Errc::OutOfRangeParam, "K_iter must be nonnegative");
    std::vector<double> lc, lp;
    for (std::size_t i = 0; i < u.spectrum().size(); ++i) {
        const cplx c = u.spectrum()[i];
        if (c == cplx(0)) continue;
        MultiIndex m = u.mode_of(i);
        lc.push_back(std::log(std::abs(c)));
        const double a = std::abs(P.symbol(m[0], m[1]));
        lp.push_back(a > 0 ? std::log(a) : -kInf);
    }
    if (lc.empty()) throw Error(Errc::EmptyField, "field has no nonzero Fourier coefficient");
    std::vector<double> out(static_cast<std::size_t>(K_iter) + 1);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
    for (int k = 0; k <= K_iter; ++k) {
        std::vector<double> terms;
        terms.reserve(lc.size());
        for (std::size_t j = 0; j < lc.size(); ++j) {
            if (k > 0 && lp[j] == -kInf) continue;
            terms.push_back(2 * lc[j] + 2 * static_cast<double>(k) * (k > 0 ? lp[j] : 0.0));
        }
        out[static_cast<std::size_t>(k)] = terms.empty() ? -kInf : 0.5 * logsumexp(terms);
    }
    return out;
}

namespace {

struct LinFit {
    double a = 0, b = 0, rms = kInf;
};

// y_k - m_k = a + b k in least squares
LinFit fit_affine(const std::vector<double>& ks, const std::vector<double>& y, const std::vector<double>& m) {
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - m[i];
    auto [a, b] = linear_fit(ks, r);
    double ss = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double e = r[i] - a - b * ks[i];
        ss += e * e;
    }
    return {a, b, std::sqrt(ss / static_cast<double>(y.size()))};
}

}  // namespace

FitReport fit_growth(const std::vector<double>& log_norms, int d, const std::vector<FitHypothesis>& candidates,
                     std::optional<std::pair<long, long>> k_range) {
    if (d < 1) throw Error(Errc::OutOfRangeParam, "order d must be positive");
    long lo = 0, hi = static_cast<long>(log_norms.size()) - 1;
    if (k_range) {
        lo = std::max(lo, k_range->first);
        hi = std::min(hi, k_range->second);
    }
    std::vector<double> ks, y;
    bool any_finite = false;
    for (long k = lo; k <= hi; ++k) {
        const double v = log_norms[static_cast<std::size_t>(k)];
        if (std::isnan(v)) throw Error(Errc::DegenerateData, "NaN log norm at k=" + std::to_string(k));
        if (!std::isfinite(v)) continue;
        any_finite = true;
        ks.push_back(static_cast<double>(k));
        y.push_back(v);
    }
    if (!any_finite) throw Error(Errc::DegenerateData, "all norms are zero");
    if (ks.size() < 8) throw Error(Errc::DegenerateData, "fewer than 8 usable k values");
    const long klo = static_cast<long>(ks.front()), khi = static_cast<long>(ks.back());

    std::vector<FitHypothesis> hyps = candidates;
    if (hyps.empty()) hyps.push_back(FitHypothesis{});
    FitReport rep;
    for (const FitHypothesis& h : hyps) {
        GrowthFit f;
        f.k_range = {klo, khi};
        if (h.kind == HypKind::Gevrey) {
            if (!(h.s_hi > h.s_lo) || h.s_lo < 0) throw Error(Errc::OutOfRangeParam, "bad Gevrey search range");
            std::vector<double> lg(ks.size());
            for (std::size_t i = 0; i < ks.size(); ++i) lg[i] = std::lgamma(d * ks[i] + 1);
            auto eval = [&](double s) {
                std::vector<double> m(lg.size());
                for (std::size_t i = 0; i < lg.size(); ++i) m[i] = s * lg[i];
                return fit_affine(ks, y, m);
            };
            // the misfit is a convex quadratic in s, so golden section finds it
            const double g = (std::sqrt(5.0) - 1) / 2;
            double a = h.s_lo, b = h.s_hi, c = b - g * (b - a), e = a + g * (b - a);
            double fc = eval(c).rms, fe = eval(e).rms;
            for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
                if (fc <= fe) {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - g * (b - a);
                    fc = eval(c).rms;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + g * (b - a);
                    fe = eval(e).rms;
                }
            }
            double s = 0.5 * (a + b);
            for (double end : {h.s_lo, h.s_hi})
                if (eval(end).rms <= eval(s).rms) s = end;
            LinFit lf = eval(s);
            f.s = s;
            f.family = Gevrey{std::max(s, 1e-300)};
            f.label = h.label.empty() ? "Gevrey(s=" + num(s) + ")" : h.label;
            f.C = std::exp(lf.a);
            f.h = std::exp(lf.b / d);
            f.residual = lf.rms;
            f.geometric = s <= h.s_lo + 1e-3;
        } else {
            validate_family(h.family);
            std::vector<double> m(ks.size());
            for (std::size_t i = 0; i < ks.size(); ++i)
                m[i] = family_log_term(h.family, static_cast<long>(d) * static_cast<long>(ks[i]));
            LinFit lf = fit_affine(ks, y, m);
            f.family = h.family;
            f.label = h.label.empty() ? family_label(h.family) : h.label;
            f.C = std::exp(lf.a);
            f.h = std::exp(lf.b / d);
            f.residual = lf.rms;
        }
        rep.ranking.push_back(f);
    }
    std::stable_sort(rep.ranking.begin(), rep.ranking.end(),
                     [](const GrowthFit& a, const GrowthFit& b) { return a.residual < b.residual; });
    for (const auto& f : rep.ranking)
        if (std::holds_alternative<Gevrey>(f.family) && f.geometric) {
            // only flag when the best Gevrey fit is the geometric one
            rep.geometric = true;
            break;
        }
    return rep;
}

double log_gaussian_moment(double lambda, double m, double a, double b, const QuadSpec& q, double* err) {
    if (!(lambda > 0)) throw Error(Errc::OutOfRangeParam, "lambda must be positive");
    if (!(b > a)) throw Error(Errc::OutOfRangeParam, "empty integration range");
    // tail mass outside +-W of the Gaussian with variance 2 lambda
    if (0.5 * std::erfc(q.window / 2) > std::max(q.rel_tol, 1e-16))
        throw Error(Errc::WindowTooNarrow, "window " + num(q.window) + " sqrt(lambda) leaves tail mass above tolerance");
    const double sp = 2 * lambda * m;
    const double W = q.window * std::sqrt(lambda);
    const double lo = std::max(a, std::min(sp, b) - W), hi = std::min(b, std::max(sp, a) + W);
    auto E = [&](double s) { return m * s - s * s / (4 * lambda); };
    const double shift = E(std::clamp(sp, lo, hi));
    Integrand f = [&](double s) { return std::exp(E(s) - shift); };
    QuadResult r = q.adaptive ? integrate_adaptive(f, lo, hi, 0.0, q.rel_tol, q.max_panels)
                              : integrate_panels(f, lo, hi, q.panels);
    if (q.adaptive && !r.converged)
        throw Error(Errc::QuadratureNotConverged, "adaptive quadrature did not reach " + num(q.rel_tol));
    if (err) *err = r.error / r.value;
    return std::log(r.value) + shift - 0.5 * std::log(4 * kPi * lambda);
}

MellinCheck gaussian_mellin_check(double lambda, int k_max, const QuadSpec& q) {
    if (!(lambda > 0)) throw Error(Errc::OutOfRangeParam, "lambda must be positive");
    if (k_max < 1) throw Error(Errc::OutOfRangeParam, "k_max must be at least 1");
    MellinCheck mc;
    for (int k = 1; k <= k_max; ++k) {
        // t = e^s turns t^{k-1} Theta dt into exp(k s - s^2/(4 lambda)) ds / sqrt(4 pi lambda)
        double li = log_gaussian_moment(lambda, k, -kInf, kInf, q);
        double e = std::abs(std::expm1(li - lambda * k * k));
        mc.log_integral.push_back(li);
        mc.rel_error.push_back(e);
        mc.max_rel_error = std::max(mc.max_rel_error, e);
    }
    return mc;
}

double metivier_epsilon_bound(int d, double lambda, double lambda0) {
    if (d < 1) throw Error(Errc::OutOfRangeParam, "order d must be positive");
    if (!(lambda0 > 0) || !(lambda > lambda0)) throw Error(Errc::OutOfRangeParam, "need 0 < lambda0 < lambda");
    const double r = std::sqrt(lambda - lambda0);
    return d * r / (r + std::sqrt(lambda) * (2 * d - 1));
}

double bump(double y, const BumpSpec& b) {
    const double a = (std::abs(y) - b.delta) / b.delta;  // 0 at the plateau edge, 1 at the support edge
    if (a <= 0) return 1.0;
    if (a >= 1) return 0.0;
    auto g = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    return 1.0 - g(a) / (g(a) + g(1 - a));
}

namespace {

void check_metivier(const MetivierParams& p) {
    const double eb = metivier_epsilon_bound(p.d, p.lambda, p.lambda0);
    if (!(p.epsilon > 0) || p.epsilon > eb * (1 + 1e-12))
        throw Error(Errc::EpsilonOutOfRange, "epsilon " + num(p.epsilon) + " outside (0, " + num(eb) + "]");
    if (!(p.lambda_prime > 0)) throw Error(Errc::OutOfRangeParam, "lambda' must be positive");
    if (p.xi0 != 1 && p.xi0 != -1) throw Error(Errc::OutOfRangeParam, "xi0 must be +1 or -1");
    if (!(p.bump.delta > 0)) throw Error(Errc::OutOfRangeParam, "bump radius must be positive");
}

}  // namespace

GridField MetivierVector::to_field() const {
    const std::size_t n = x.size();
    if (!pow2(n)) throw Error(Errc::OutOfRangeParam, "x grid size must be a power of two");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(x[i] - 2 * kPi * static_cast<double>(i) / static_cast<double>(n)) > 1e-12)
            throw Error(Errc::OutOfRangeParam, "x grid is not the uniform periodic grid on [0, 2pi)");
    return GridField::from_samples(1, n, u);
}

MetivierVector construct_metivier_vector(const MetivierParams& p, const std::vector<double>& x_grid,
                                         ExecPolicy policy) {
    check_metivier(p);
    MetivierVector mv;
    mv.x = x_grid;
    mv.epsilon_bound = metivier_epsilon_bound(p.d, p.lambda, p.lambda0);
    const double lp = p.lambda_prime;
    const double dd = p.d;
    mv.lambda_prime_window = {p.lambda, dd * dd * p.lambda / ((dd - p.epsilon) * (dd - p.epsilon))};
    mv.lambda_prime_in_window = lp > mv.lambda_prime_window.first && lp < mv.lambda_prime_window.second;

    // Theta(t, l') / Theta(1, l') = exp(-(log t)^2 / (4 l')) drops below 1e-16 at log t = S
    const double S_auto = std::sqrt(4 * lp * std::log(1e16));
    double S = S_auto;
    if (p.t_cut) {
        if (!(*p.t_cut > 1)) throw Error(Errc::OutOfRangeParam, "t_cut must exceed 1");
        S = std::log(*p.t_cut);
        if (std::exp(-S * S / (4 * lp)) > 1e-16)
            throw Error(Errc::QuadratureNotConverged,
                        "truncation at t = " + num(*p.t_cut) + " keeps Theta above 1e-16 of its peak");
    }
    mv.t_cut = std::exp(S);
    const double full = 0.5 * std::erfc(-lp / std::sqrt(lp));  // int_0^inf over exp(lp), in units of e^{lp}
    mv.tail_bound = 0.5 * std::erfc((S - 2 * lp) / (2 * std::sqrt(lp))) / full;

    const double norm = 1.0 / std::sqrt(4 * kPi * lp);
    const double scale = std::exp(lp);  // size of the x = x0 value
    mv.u.assign(x_grid.size(), 0);
    std::vector<double> errs(x_grid.size(), 0);
    std::vector<int> failed(x_grid.size(), 0);
    const long nx = static_cast<long>(x_grid.size());
#pragma omp parallel for schedule(dynamic) if (policy == ExecPolicy::Parallel)
    for (long i = 0; i < nx; ++i) {
        const double dx = x_grid[static_cast<std::size_t>(i)] - p.x0;
        double hi = S;
        if (dx != 0) hi = std::min(S, std::log(2 * p.bump.delta / std::abs(dx)) / p.epsilon);
        if (hi <= 0) continue;
        auto weight = [&](double s) { return bump(std::exp(p.epsilon * s) * dx, p.bump) * norm * std::exp(s - s * s / (4 * lp)); };
        Integrand re = [&](double s) { return weight(s) * std::cos(std::exp(s) * dx * p.xi0); };
        Integrand im = [&](double s) { return weight(s) * std::sin(std::exp(s) * dx * p.xi0); };
        QuadResult a = integrate_adaptive(re, 0.0, hi, 1e-13 * scale, 1e-13, 1 << 14);
        QuadResult b = dx == 0 ? QuadResult{0, 0, 0, true} : integrate_adaptive(im, 0.0, hi, 1e-13 * scale, 1e-13, 1 << 14);
        mv.u[static_cast<std::size_t>(i)] = cplx(a.value, b.value);
        errs[static_cast<std::size_t>(i)] = a.error + b.error;
        failed[static_cast<std::size_t>(i)] = !(a.converged && b.converged);
    }
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (failed[i]) throw Error(Errc::QuadratureNotConverged, "quadrature failed at x = " + num(x_grid[i]));
        mv.quad_error += errs[i];
    }
    return mv;
}

DirectionalGrowth directional_growth_check(const MetivierParams& p, int k_max) {
    check_metivier(p);
    if (k_max < 0) throw Error(Errc::OutOfRangeParam, "k_max must be nonnegative");
    const double lp = p.lambda_prime;
    DirectionalGrowth g;
    g.monotone = true;
    QuadSpec q;
    for (int k = 0; k <= k_max; ++k) {
        // D^k pulls down t^k; with t = e^s the weight is exp((k+1) s - s^2/(4 l'))
        GrowthRow r;
        r.k = k;
        const double m = k + 1;
        r.log_derivative = log_gaussian_moment(lp, m, 0.0, kInf, q);
        r.log_remainder = log_gaussian_moment(lp, m, -kInf, 0.0, q);
        r.log_N = lp * m * m;
        r.ratio = -std::expm1(r.log_remainder - r.log_N);
        r.direct_ratio = std::exp(r.log_derivative - r.log_N);
        g.max_identity_error = std::max(g.max_identity_error, std::abs(r.direct_ratio + std::exp(r.log_remainder - r.log_N) - 1));
        if (!g.rows.empty() && r.ratio < g.rows.back().ratio) g.monotone = false;
        g.rows.push_back(r);
    }
    return g;
}

}
