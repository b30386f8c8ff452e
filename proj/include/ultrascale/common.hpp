#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace us {

enum class Errc {
    OutOfRangeParam,
    TruncationTooSmall,
    NonNormalized,
    LengthMismatch,
    PreconditionViolated,
    HGridInsufficient,
    IndexOutOfRange,
    OrderViolation,
    NonMonotoneTable,
    ArgmaxAtBoundary,
    SupDiverges,
    GridTooCoarse,
    HypothesisNotMet,
    AxiomViolation,
    GridMismatch,
    OddVanishingOrder,
    DeltaOutOfRange,
    MissingSupportObject,
    ZeroPrincipalPart,
    EmptyField,
    DegenerateData,
    WindowTooNarrow,
    EpsilonOutOfRange,
    QuadratureNotConverged,
    ParseError,
    UnknownTaskKind,
    IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const { return code_; }
    // what() without the code prefix
    const std::string& message() const { return msg_; }

private:
    Errc code_;
    std::string msg_;
};

enum class Status { Holds, Fails, Inconclusive };
const char* status_name(Status s);

enum class ExecPolicy { Serial, Parallel };

struct Diagnostics {
    std::optional<double> estimated_limit;
    double trend_slope = 0.0;
    std::pair<long, long> k_range{0, 0};
    std::map<std::string, std::string> notes;
};

struct Verdict {
    Status status = Status::Inconclusive;
    std::map<std::string, double> witnesses;
    std::optional<std::vector<long>> counterexample;
    Diagnostics diag;
};

// Least squares fit y = a + b x over the last third of the samples (at least 3 points).
struct Trend {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t lo = 0, hi = 0;  // [lo, hi)
    double tail_max = 0.0;
    double tail_min = 0.0;
};

Trend tail_trend(const std::vector<double>& x, const std::vector<double>& y);
Trend tail_trend(const std::vector<double>& y);  // x = index
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Slopes within this band count as flat.
inline constexpr double kTrendTol = 1e-3;

double logsumexp(const std::vector<double>& v);
double logaddexp(double a, double b);

std::vector<double> logspace(double lo, double hi, std::size_t n);
std::vector<double> linspace(double lo, double hi, std::size_t n);

// Multiplier for default grid sizes, read once from ULTRASCALE_GRID_SCALE.
double grid_scale();
std::size_t scaled(std::size_t n);

std::string fmt_double(double v);

}
