// Serial vs OpenMP timings for the hot kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "ultrascale/conjugate.hpp"
#include "ultrascale/probe.hpp"
#include "ultrascale/wmatrix.hpp"

using namespace us;

namespace {

ExecPolicy policy(const benchmark::State& st) { return st.range(0) ? ExecPolicy::Parallel : ExecPolicy::Serial; }

void BM_CheckOm7(benchmark::State& st) {
    LogWeightSeq M = build_sequence(NQR{2, 2}, 2000);
    for (auto _ : st) benchmark::DoNotOptimize(check_property(M, PropSpec{Prop::Om7Seq}, policy(st)));
}
BENCHMARK(BM_CheckOm7)->Arg(0)->Arg(1);

void BM_IterateNorms(benchmark::State& st) {
    BuiltOperator P = build_operator({{{2, 0}, 1.0}, {{0, 2}, 1.0}, {{1, 0}, cplx(0, 1)}}, 2);
    std::vector<std::pair<MultiIndex, cplx>> modes;
    for (int a = -20; a <= 20; a += 3)
        for (int b = -20; b <= 20; b += 5) modes.push_back({{a, b}, cplx(1.0 / (1 + a * a + b * b), 0)});
    GridField u = GridField::from_modes(2, 64, modes);
    for (auto _ : st) benchmark::DoNotOptimize(iterate_norms(u, P.op, 40, policy(st)));
}
BENCHMARK(BM_IterateNorms)->Arg(0)->Arg(1);

void BM_YoungConjugate(benchmark::State& st) {
    WeightFn w = make_weight_fn(OmegaS{2.0});
    std::vector<double> grid = linspace(0, 200, 4001);
    for (auto _ : st) benchmark::DoNotOptimize(young_conjugate(w, grid, std::nullopt, policy(st)));
}
BENCHMARK(BM_YoungConjugate)->Arg(0)->Arg(1);

void BM_MatrixRelate(benchmark::State& st) {
    MatrixSpec g, r;
    g.kind = MatrixKind::Gevrey;
    r.kind = MatrixKind::Rmatrix;
    r.q = 2;
    WeightMatrix A = build_matrix(g, {1, 1.5, 2, 3, 4}, 500);
    WeightMatrix B = build_matrix(r, {1.5, 2, 3, 4}, 500);
    for (auto _ : st) benchmark::DoNotOptimize(matrix_relate(A, B, policy(st)));
}
BENCHMARK(BM_MatrixRelate)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
