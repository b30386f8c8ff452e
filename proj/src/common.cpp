#include "ultrascale/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace us {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::OutOfRangeParam: return "OutOfRangeParam";
    case Errc::TruncationTooSmall: return "TruncationTooSmall";
    case Errc::NonNormalized: return "NonNormalized";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::HGridInsufficient: return "HGridInsufficient";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::OrderViolation: return "OrderViolation";
    case Errc::NonMonotoneTable: return "NonMonotoneTable";
    case Errc::ArgmaxAtBoundary: return "ArgmaxAtBoundary";
    case Errc::SupDiverges: return "SupDiverges";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::HypothesisNotMet: return "HypothesisNotMet";
    case Errc::AxiomViolation: return "AxiomViolation";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::OddVanishingOrder: return "OddVanishingOrder";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::MissingSupportObject: return "MissingSupportObject";
    case Errc::ZeroPrincipalPart: return "ZeroPrincipalPart";
    case Errc::EmptyField: return "EmptyField";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::WindowTooNarrow: return "WindowTooNarrow";
    case Errc::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownTaskKind: return "UnknownTaskKind";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), msg_(what) {}

const char* status_name(Status s) {
    switch (s) {
    case Status::Holds: return "holds";
    case Status::Fails: return "fails";
    case Status::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxx > 0 ? sxy / sxx : 0.0;
    return {my - b * mx, b};
}

Trend tail_trend(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw Error(Errc::LengthMismatch, "trend inputs differ in length");
    const std::size_t n = y.size();
    if (n < 3)
        throw Error(Errc::TruncationTooSmall, "need at least 3 samples for a trend");
    std::size_t lo = n - std::max<std::size_t>(3, n / 3);
    std::vector<double> tx(x.begin() + lo, x.end()), ty(y.begin() + lo, y.end());
    auto [a, b] = linear_fit(tx, ty);
    Trend t;
    t.slope = b;
    t.intercept = a;
    t.lo = lo;
    t.hi = n;
    t.tail_max = *std::max_element(ty.begin(), ty.end());
    t.tail_min = *std::min_element(ty.begin(), ty.end());
    return t;
}

Trend tail_trend(const std::vector<double>& y) {
    std::vector<double> x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = static_cast<double>(i);
    return tail_trend(x, y);
}

double logsumexp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double a : v) m = std::max(m, a);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double a : v) s += std::exp(a - m);
    return m + std::log(s);
}

double logaddexp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (!std::isfinite(b)) return a;
    return a + std::log1p(std::exp(b - a));
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

double grid_scale() {
    static const double s = [] {
        const char* e = std::getenv("ULTRASCALE_GRID_SCALE");
        if (!e) return 1.0;
        char* end = nullptr;
        double v = std::strtod(e, &end);
        return (end != e && v > 0 && std::isfinite(v)) ? v : 1.0;
    }();
    return s;
}

std::size_t scaled(std::size_t n) {
    return std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(n * grid_scale())));
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}
