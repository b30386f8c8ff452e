#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ultrascale/seqcore.hpp"

namespace us {

using cplx = std::complex<double>;
using MultiIndex = std::array<int, 2>;  // second entry unused in dim 1

struct SymbolOp {
    int dim = 1;
    int order_d = 1;
    std::map<MultiIndex, cplx> coeffs;

    // p(xi) = sum a_alpha xi^alpha (symbol of sum a_alpha D^alpha, D = -i d/dx)
    cplx symbol(double x1, double x2 = 0) const;
    cplx principal(double x1, double x2 = 0) const;
};

struct EllipticityReport {
    bool elliptic = false;
    double min_abs = 0, max_abs = 0;
    std::array<double, 2> min_direction{0, 0};
    std::size_t directions = 0;
};

struct BuiltOperator {
    SymbolOp op;
    EllipticityReport ellipticity;
};

BuiltOperator build_operator(const std::map<MultiIndex, cplx>& coeffs, int dim);

// Periodic field on [0, 2pi)^dim with n points per axis; norms use the normalized measure,
// so ||u||^2 = mean |u_j|^2 = sum |c_xi|^2.
class GridField {
public:
    static GridField from_samples(int dim, std::size_t n, std::vector<cplx> samples);
    static GridField from_modes(int dim, std::size_t n, const std::vector<std::pair<MultiIndex, cplx>>& modes);

    int dim() const { return dim_; }
    std::size_t n() const { return n_; }
    const std::vector<cplx>& samples() const { return samples_; }
    const std::vector<cplx>& spectrum() const { return spectrum_; }
    // Integer frequency of spectrum index i along one axis.
    int freq(std::size_t i) const;
    MultiIndex mode_of(std::size_t flat) const;

    double grid_norm() const;
    double spectral_norm() const;
    double parseval_error() const;  // relative

    GridField apply(const SymbolOp& P) const;  // one symbol multiplication

private:
    int dim_ = 1;
    std::size_t n_ = 0;
    std::vector<cplx> samples_, spectrum_;
};

// log ||P^k u||, k = 0..K_iter, from per-mode log magnitudes.
std::vector<double> iterate_norms(const GridField& u, const SymbolOp& P, int K_iter,
                                  ExecPolicy policy = ExecPolicy::Parallel);

enum class HypKind { Gevrey, Fixed };

struct FitHypothesis {
    HypKind kind = HypKind::Gevrey;
    SeqFamily family = Gevrey{1.0};  // Fixed
    double s_lo = 0.0, s_hi = 8.0;   // Gevrey search range
    std::string label;
};

struct GrowthFit {
    std::string label;
    SeqFamily family;
    double s = 0;  // Gevrey only
    double h = 0, C = 0;
    double residual = 0;  // RMS of the log misfit
    std::pair<long, long> k_range{0, 0};
    bool geometric = false;
};

struct FitReport {
    std::vector<GrowthFit> ranking;  // best first
    bool geometric = false;
};

// Fits log_norms[k] ~ log C + k d log h + log M_{dk} over k in k_range (default: all finite entries).
FitReport fit_growth(const std::vector<double>& log_norms, int d, const std::vector<FitHypothesis>& candidates,
                     std::optional<std::pair<long, long>> k_range = std::nullopt);

struct QuadSpec {
    bool adaptive = true;
    long panels = 64;       // fixed-panel mode
    double rel_tol = 1e-14;
    double window = 12.14;  // half-width in units of sqrt(lambda)
    long max_panels = 4096;
};

struct MellinCheck {
    double max_rel_error = 0;
    std::vector<double> rel_error;  // k = 1..k_max
    std::vector<double> log_integral;
    long evals = 0;
};

// int_0^inf t^{k-1} Theta(t, lambda) dt against exp(lambda k^2), Theta(t, l) = exp(-(log t)^2/(4l)) / sqrt(4 pi l).
MellinCheck gaussian_mellin_check(double lambda, int k_max, const QuadSpec& q = {});

// log of int_a^b exp(m s - s^2/(4 lambda)) / sqrt(4 pi lambda) ds, a may be -inf, b may be +inf.
double log_gaussian_moment(double lambda, double m, double a, double b, const QuadSpec& q = {},
                           double* err = nullptr);

double metivier_epsilon_bound(int d, double lambda, double lambda0);

struct BumpSpec {
    double delta = 0.5;  // psi = 1 on |y| <= delta, 0 on |y| >= 2 delta
};
double bump(double y, const BumpSpec& b);

struct MetivierParams {
    double lambda0 = 0.5, lambda = 1.0, lambda_prime = 1.0;
    double epsilon = 0.4;
    int d = 1;
    int xi0 = 1;  // direction +1 or -1
    double x0 = 0.0;
    BumpSpec bump;
    std::optional<double> t_cut;  // overrides the automatic truncation
};

struct MetivierVector {
    std::vector<double> x;
    std::vector<cplx> u;
    double t_cut = 0;
    double tail_bound = 0;   // Gaussian tail beyond t_cut relative to the full integral
    double quad_error = 0;   // summed quadrature estimate
    double epsilon_bound = 0;
    std::pair<double, double> lambda_prime_window{0, 0};  // (lambda, d^2 lambda / (d - eps)^2)
    bool lambda_prime_in_window = false;

    // Samples on a uniform periodic grid with power-of-two size become a GridField.
    GridField to_field() const;
};

MetivierVector construct_metivier_vector(const MetivierParams& p, const std::vector<double>& x_grid,
                                         ExecPolicy policy = ExecPolicy::Parallel);

struct GrowthRow {
    int k;
    double log_derivative;  // log D^k u(x0) by quadrature over [1, inf)
    double log_remainder;   // log of int_0^1 t^k Theta dt
    double log_N;           // lambda' (k+1)^2
    double ratio;           // 1 - remainder / N
    double direct_ratio;    // D^k u(x0) / N
};

struct DirectionalGrowth {
    std::vector<GrowthRow> rows;
    bool monotone = false;
    double max_identity_error = 0;  // |D^k + remainder - N| / N
};

DirectionalGrowth directional_growth_check(const MetivierParams& p, int k_max);

}
