#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ultrascale/conjugate.hpp"
#include "ultrascale/wmatrix.hpp"

namespace us {

enum class GenKind { GevreyGen, PowerGen, LogIterGen, FromOmega, Custom };
enum class AxiomSet { Strong, Weak };
enum class Flavor { Strong, Weak };

struct GenFnSpec {
    GenKind kind = GenKind::GevreyGen;
    double r = 2.0;  // PowerGen
    int j = 1;       // LogIterGen
    // When set, the grid indexes the shape parameter (r for PowerGen, j for LogIterGen) and lambda is fixed.
    bool shape_indexed = false;
    double lambda_fixed = 1.0;
    std::shared_ptr<const WeightFn> omega;                // FromOmega
    std::function<double(double, double)> custom;        // Custom: (lambda, t) -> zeta
    bool order_reversed = false;                          // Custom
    AxiomSet axioms = AxiomSet::Strong;
    std::string label;
};

class GenFn {
public:
    double zeta(double param, double t) const;
    const std::vector<double>& grid() const { return grid_; }
    const GenFnSpec& spec() const { return spec_; }
    bool order_reversed() const { return order_reversed_; }
    const std::string& label() const { return label_; }
    AxiomSet axioms() const { return spec_.axioms; }
    // Parametric kinds admit members off the sampled grid.
    bool parametric() const { return spec_.kind != GenKind::Custom; }
    // dir = +1 gives larger zeta.
    std::optional<double> next_param(double p, int dir) const;
    // Whether param lies in the index set at all (positive cone, integers for LogIterGen over j).
    bool admissible(double p) const;

private:
    friend GenFn make_genfn(const GenFnSpec&, std::vector<double>, long);
    GenFnSpec spec_;
    std::vector<double> grid_;
    bool order_reversed_ = false;
    std::string label_;
    std::shared_ptr<const YoungConjugate> conj_;
};

// Checks the axioms of the chosen set on k = 0..K_axiom and the order on [1, 1e5].
GenFn make_genfn(const GenFnSpec& spec, std::vector<double> grid, long K_axiom = 200);

WeightMatrix scale_to_matrix(const GenFn& z, long K, Flavor flavor);

enum class ScaleCond { Square, Star, Diamond, TriRight, TriLeft, PseudoHom };
const char* scale_cond_name(ScaleCond c);
ScaleCond parse_scale_cond(const std::string& s);

struct ScaleCheckOptions {
    std::vector<double> alpha_grid{1.5, 2.0};
    double t_max = 1e5;
    std::size_t t_points = 512;
    double p_max = 1e4;
    int max_extension_steps = 8;
    std::vector<double> q_candidates{1.0, 1.5, 2.0, 2.5, 3.0, 4.0};  // PseudoHom exponents, c = 1
};

Verdict check_scale_condition(const GenFn& z, ScaleCond cond, const ScaleCheckOptions& opt = {});

struct ScaleReport {
    std::map<ScaleCond, Verdict> verdicts;
    bool fitting = false, apposite = false, r_admissible = false, b_admissible = false;
};

ScaleReport scale_report(const GenFn& z, const ScaleCheckOptions& opt = {});

// Witness for zeta_lambda(alpha t) <= zeta_partner(t) + gamma (t + 1) over the t-samples.
struct AffineBound {
    bool bounded = false;
    double gamma = 0;
    double slope = 0;
    double worst_t = 0;
};
AffineBound affine_bound(const GenFn& z, double lambda, double alpha, const GenFn& w, double partner,
                         const std::vector<double>& ts);

struct PartnerResult {
    bool found = false;
    double partner = 0;
    bool off_grid = false;
    AffineBound bound;
};

// Existential partner for the dilation inequality: upward (right) or downward (left) from `from`.
PartnerResult dilation_partner(const GenFn& z, double lambda, double alpha, const GenFn& w, int dir,
                               const ScaleCheckOptions& opt = {});

struct PairClassification {
    // (a) matrix relations read off Phi = (zeta_lambda - eta_upsilon) / t
    std::vector<std::vector<double>> phi_limsup, phi_liminf;  // [i][j]
    std::vector<std::vector<double>> phi_slope;               // tail slope against log t
    bool rou_preceq = false, beu_preceq = false, rou_lhd_beu = false;
    // (b) mixed conditions zeta_lambda(alpha t) <= eta_upsilon(t) + gamma (t + 1)
    Verdict mixed_roumieu, mixed_beurling;
    // (c) comparability under the identity pairing
    std::optional<bool> comparable;
    std::map<std::string, std::string> notes;
};

// Comparability needs equal-length grids; request_comparability makes a mismatch an error.
PairClassification classify_scale_pair(const GenFn& zeta, const GenFn& eta, double alpha,
                                       bool request_comparability = true, const ScaleCheckOptions& opt = {});

}
