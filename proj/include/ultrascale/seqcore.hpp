#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ultrascale/common.hpp"

namespace us {

struct Gevrey { double s; };                 // (k!)^s
struct LQR { double q, r; };                 // k! q^{k^r}
struct NQR { double q, r; };                 // q^{k^r}
struct BJSigma { int j; double sigma; };     // k! (log^{(j)}(k + e^{(j)}))^{sigma k}
struct DoubleExp {};                         // M_0 = 1, M_k = e^{e^k}
struct CustomSeq {
    std::function<double(long)> log_term_fn;
    std::string name = "custom";
};

using SeqFamily = std::variant<Gevrey, LQR, NQR, BJSigma, DoubleExp, CustomSeq>;

std::string family_label(const SeqFamily& f);
bool is_builtin(const SeqFamily& f);
void validate_family(const SeqFamily& f);
double family_log_term(const SeqFamily& f, long k);

// e^{(j)}, the j-fold iterated exponential of 1 (e^{(0)} = 1). Finite for j <= 3.
double iterated_exp(int j);

class LogWeightSeq {
public:
    LogWeightSeq(std::vector<double> log_terms, SeqFamily family, std::string label = {});

    long K() const { return static_cast<long>(log_terms_.size()) - 1; }
    double log_M(long k) const { return log_terms_.at(static_cast<std::size_t>(k)); }
    double log_m(long k) const;   // log(M_k / k!)
    double log_mu(long k) const;  // log(M_k / M_{k-1}), k >= 1
    const std::vector<double>& log_terms() const { return log_terms_; }
    const SeqFamily& family() const { return family_; }
    const std::string& label() const { return label_; }

    std::string to_csv() const;

private:
    std::vector<double> log_terms_;
    SeqFamily family_;
    std::string label_;
};

LogWeightSeq build_sequence(const SeqFamily& family, long K);

enum class Prop {
    LogConvex,
    SubmultDual,
    AnalyticIncl,
    DerivClosed,
    AltDerivClosed,
    ModerateGrowth,
    Quasianalytic,
    Om7Seq,
};

struct PropSpec {
    Prop prop = Prop::LogConvex;
    int ell = 1;                  // AltDerivClosed
    int p_max = 16;               // Om7Seq search range [2, p_max]
    std::optional<int> p_fixed;   // Om7Seq: check this p only
};

const char* prop_name(Prop p);
Prop parse_prop(const std::string& name);

Verdict check_property(const LogWeightSeq& M, const PropSpec& spec,
                       ExecPolicy policy = ExecPolicy::Parallel);
inline Verdict check_property(const LogWeightSeq& M, Prop p) {
    return check_property(M, PropSpec{p});
}

// Analytic answer for built-in families, if one is tabulated.
std::optional<Status> analytic_status(const SeqFamily& f, const PropSpec& spec);

enum class Relation { Preceq, Lhd, Approx, Incomparable, Succeq, Rhd };
enum class Confidence { Analytic, Numeric };

const char* relation_name(Relation r);

struct RelationReport {
    Relation relation = Relation::Incomparable;
    bool le = false;  // M_k <= N_k for all k
    std::vector<double> ratio_roots;  // rho_k, k = 1..K
    double limsup_estimate = 0;
    double liminf_estimate = 0;
    double trend_slope = 0;
    Confidence confidence = Confidence::Numeric;
    Relation numeric_relation = Relation::Incomparable;

    bool preceq() const { return relation == Relation::Preceq || relation == Relation::Lhd || relation == Relation::Approx; }
    bool succeq() const { return relation == Relation::Succeq || relation == Relation::Rhd || relation == Relation::Approx; }
    bool lhd() const { return relation == Relation::Lhd; }
};

std::optional<Relation> analytic_relation(const SeqFamily& a, const SeqFamily& b);
RelationReport compare_sequences(const LogWeightSeq& M, const LogWeightSeq& N);

struct InterpolationOptions {
    double h_lo = 1e-6, h_hi = 1e6;
    std::size_t h_points = 128;
};

LogWeightSeq interpolate_sequence(const LogWeightSeq& Lp, const LogWeightSeq& M,
                                  const InterpolationOptions& opt = {});

bool verify_split_inequality(const LogWeightSeq& M, long j, long k, long ell, double rho, double R);

}
