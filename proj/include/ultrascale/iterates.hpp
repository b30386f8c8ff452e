#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "ultrascale/conjugate.hpp"
#include "ultrascale/scales.hpp"

namespace us {

// Exact rational on int64 with 128-bit intermediates; overflow throws.
class Rational {
public:
    Rational(std::int64_t n = 0, std::int64_t d = 1);
    std::int64_t num() const { return n_; }
    std::int64_t den() const { return d_; }
    double to_double() const { return static_cast<double>(n_) / static_cast<double>(d_); }
    std::string str() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    friend bool operator==(const Rational& a, const Rational& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
    friend bool operator<(const Rational& a, const Rational& b);
    Rational pow(int e) const;

    // Exact value of a double whose denominator divides 2^20 * 10^6 or is small; nullopt otherwise.
    static std::optional<Rational> from_double(double v);

private:
    struct Raw {};
    Rational(Raw, std::int64_t n, std::int64_t d) : n_(n), d_(d) {}
    static Rational make(__int128 n, __int128 d);
    std::int64_t n_, d_;
};

enum class CharType { Elliptic, PrincipalHypoelliptic };

struct OperatorSpec {
    int order_d = 2;
    CharType char_type = CharType::Elliptic;
    int vanishing_order = 0;  // 2k, even and positive when hypoelliptic
};

struct DeltaEps {
    Rational delta, epsilon;
};

DeltaEps subellipticity_delta(const OperatorSpec& spec);
// alpha = d / (d - delta)
Rational dilation_alpha(const OperatorSpec& spec);

struct GevreyClass { double s; };
struct QGevreyClass { double q, r; };
struct BJClass { int j; double lambda; };
struct ScaleClass { std::shared_ptr<const GenFn> zeta; double lambda; };
struct WeightFnClass { std::shared_ptr<const WeightFn> omega; };

using ClassDesc = std::variant<GevreyClass, QGevreyClass, BJClass, ScaleClass, WeightFnClass>;

struct LossResult {
    std::string formula;
    std::string citation;
    Rational alpha;
    bool exact = false;
    // Gevrey: s'; QGevrey: q' (log_value holds log q'); BJ: lambda'; Scale: lambda*.
    std::optional<double> value;
    std::optional<Rational> exact_value;   // s' or lambda' when exact
    std::optional<double> log_value;       // log q'
    std::optional<Rational> log_factor;    // log q' / log q when r is an integer
    Verdict verdict;                       // Scale and WeightFn witnesses
};

LossResult loss_map(const ClassDesc& cls, const OperatorSpec& spec);

struct PushforwardResult {
    bool found = false;
    double lambda_star = 0;
    double gamma = 0;
    bool off_grid = false;
    std::string direction;  // set when not found
};

PushforwardResult scale_pushforward_witness(const GenFn& zeta, double lambda, const OperatorSpec& spec);

}
