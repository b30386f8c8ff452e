#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ultrascale/seqcore.hpp"

namespace us {

class WeightFn;

enum class MatrixKind { Gevrey, Qr, Rmatrix, Bj, Jsigma, FromWeightFn, Custom };

struct MatrixSpec {
    MatrixKind kind = MatrixKind::Gevrey;
    double r = 2.0;             // Qr
    double q = 2.718281828459045;  // Rmatrix
    bool weak = false;          // Rmatrix built from q^{k^r} instead of k! q^{k^r}
    int j = 1;                  // Bj
    double sigma = 1.0;         // Jsigma
    std::shared_ptr<const WeightFn> omega;  // FromWeightFn
    std::vector<LogWeightSeq> members;      // Custom
    bool order_reversed = false;            // Custom
    std::string label;
};

class WeightMatrix {
public:
    std::vector<double> params;
    std::vector<LogWeightSeq> members;
    std::string label;
    bool order_reversed = false;
    MatrixSpec spec;

    long K() const { return members.front().K(); }
    std::size_t size() const { return members.size(); }
    const LogWeightSeq& seq_at(double lambda) const;

    // Members outside the sampled grid, for parametric kinds only.
    bool parametric() const { return spec.kind != MatrixKind::Custom; }
    LogWeightSeq build_member(double param) const;
    // Next parameter on the extension ladder; dir = +1 gives larger sequences.
    std::optional<double> next_param(double param, int dir) const;
};

WeightMatrix build_matrix(const MatrixSpec& spec, const std::vector<double>& grid, long K);

enum class MatrixRel { RouPreceq, BeuPreceq, RouLhdBeu, ApproxBoth };
const char* matrix_rel_name(MatrixRel r);

struct Pairing {
    double from, to;
    bool off_grid = false;
};

struct MatrixRelation {
    std::vector<MatrixRel> holds;  // empty means None
    std::map<std::string, std::vector<Pairing>> pairings;
    std::vector<std::vector<Relation>> pair_table;  // [i][j] relation of A_i to B_j
    std::map<std::string, std::string> notes;
    bool has(MatrixRel r) const;
};

MatrixRelation matrix_relate(const WeightMatrix& A, const WeightMatrix& B,
                             ExecPolicy policy = ExecPolicy::Parallel);

enum class MatrixProp { MatrixAnal, RSemiregular, BSemiregular, Rmg, Bmg, RL, BL };
const char* matrix_prop_name(MatrixProp p);
MatrixProp parse_matrix_prop(const std::string& s);

struct MatrixCheckOptions {
    bool allow_extension = true;
    int max_extension_steps = 8;
    std::vector<double> h_grid{2.0, 10.0, 100.0};
};

Verdict check_matrix_property(const WeightMatrix& A, MatrixProp prop, const MatrixCheckOptions& opt = {});

// Growth of sup_k over the pair inequality, shared with the conjugate and scales modules.
struct PairBound {
    bool bounded = false;
    double log_const = 0;  // log of the witnessing constant
    double slope = 0;
};

}
