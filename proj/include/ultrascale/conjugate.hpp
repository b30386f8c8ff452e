#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ultrascale/seqcore.hpp"
#include "ultrascale/wmatrix.hpp"

namespace us {

struct OmegaS { double s; };         // (max{0, log t})^s
struct GevreyPower { double s; };    // t^{1/s}
struct FromSequence { std::shared_ptr<const LogWeightSeq> M; };  // omega_M
struct CustomTable { std::vector<double> t, w; };                 // knots, linear in log t

using WeightKind = std::variant<OmegaS, GevreyPower, FromSequence, CustomTable>;

class WeightFn {
public:
    WeightFn(WeightKind kind, bool normalized);

    double operator()(double t) const;
    // phi(x) = omega(e^x)
    double phi(double x) const;
    const WeightKind& kind() const { return kind_; }
    bool normalized() const { return normalized_; }
    std::string label() const;
    // Largest t at which evaluation is exact (finite only for sequence-backed functions).
    double t_max() const { return t_max_; }
    std::string to_csv(const std::vector<double>& t_grid) const;

private:
    double raw_phi(double x) const;

    WeightKind kind_;
    bool normalized_;
    double shift_ = 0.0;
    double t_max_;
    std::vector<double> log_mu_;  // FromSequence: log mu_k, k = 1..K
};

WeightFn make_weight_fn(WeightKind kind, bool normalize = true);

std::vector<double> default_t_grid();  // 0 followed by 4096 log-spaced points on [1, 1e8]

class YoungConjugate {
public:
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& argmax() const { return argmax_; }
    double s_max() const { return s_max_; }
    const WeightFn& source() const { return *source_; }

    // phi*(t) for any 0 <= t within the sampled s-range, refined by golden section.
    double eval(double t) const;
    std::string to_csv() const;

private:
    friend YoungConjugate young_conjugate(const WeightFn&, std::vector<double>, std::optional<double>, ExecPolicy);
    double refine(double t, std::size_t i) const;

    std::vector<double> grid_, values_, argmax_;
    double s_max_ = 0, ds_ = 0;
    std::vector<double> phi_;  // phi on the uniform s-grid
    std::shared_ptr<const WeightFn> source_;
};

YoungConjugate young_conjugate(const WeightFn& w, std::vector<double> t_grid = {},
                               std::optional<double> s_max = std::nullopt,
                               ExecPolicy policy = ExecPolicy::Parallel);

// Dense brute-force sup over a uniform s-grid; kept as a test oracle.
std::vector<double> conjugate_bruteforce(const WeightFn& w, const std::vector<double>& t_grid,
                                         double s_max, std::size_t n, ExecPolicy policy);

WeightMatrix associated_matrix(const WeightFn& w, const std::vector<double>& lambda_grid, long K);
// log W^lambda_k for k = 0..K straight from omega.
std::vector<double> associated_log_terms(const YoungConjugate& c, double lambda, long K);

WeightFn associated_weight_fn(const LogWeightSeq& M, const std::vector<double>& t_grid = {});
LogWeightSeq recover_sequence(const WeightFn& w, long K, const std::vector<double>& t_grid = {});

// Relation of sigma to tau read off log(tau/sigma): Lhd when tau = o(sigma), Preceq when tau = O(sigma).
RelationReport compare_weight_fns(const WeightFn& sigma, const WeightFn& tau,
                                  const std::vector<double>& t_grid = {});

enum class WeightProp { Alpha, Beta, GammaConvex, NonQuasianalytic, Xi, XiGeneralized, SubLinear, PowerBound };
const char* weight_prop_name(WeightProp p);
WeightProp parse_weight_prop(const std::string& s);

struct WeightPropSpec {
    WeightProp prop = WeightProp::Alpha;
    double gamma = 2.0;  // XiGeneralized
};

std::optional<Status> analytic_weight_status(const WeightFn& w, const WeightPropSpec& spec);
Verdict check_weight_property(const WeightFn& w, const WeightPropSpec& spec,
                              const std::vector<double>& t_grid = {});

Verdict check_xi_seq(const LogWeightSeq& M, const LogWeightSeq* N = nullptr, int q_max = 16);

enum class ConjLemma { Shift53, Mixed55, HatEquiv52, RhoBound612 };
const char* conj_lemma_name(ConjLemma l);
ConjLemma parse_conj_lemma(const std::string& s);

struct ConjLemmaArgs {
    std::shared_ptr<const WeightFn> omega;
    std::shared_ptr<const WeightFn> sigma;  // Mixed55
    double alpha = 2.0;                     // Mixed55
    double rho = 4.0;                       // RhoBound612
    std::vector<double> lambda_grid{1.0, 2.0, 4.0};
    std::vector<double> t_grid;             // defaults per lemma
    long K = 30;                            // HatEquiv52
};

Verdict verify_conjugate_lemma(ConjLemma lemma, const ConjLemmaArgs& args);

}
