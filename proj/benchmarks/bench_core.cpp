#include <twistlab/enflo.hpp>
#include <twistlab/extops.hpp>
#include <twistlab/rng.hpp>
#include <twistlab/twisted.hpp>

#include <benchmark/benchmark.h>

using namespace twistlab;

namespace {

Vec random_vec(int dim, uint64_t seed) {
    Rng rng(seed);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(-1, 1);
    return v;
}

void BM_KaltonPeckEval(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    HomMap kp = HomMap::kalton_peck(NormedSpace::l2(dim));
    Vec x = random_vec(dim, 1);
    for (auto _ : state) benchmark::DoNotOptimize(kp(x));
}
BENCHMARK(BM_KaltonPeckEval)->Arg(2)->Arg(8)->Arg(64);

void BM_EnfloDeltaEval(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    HomMap h = enflo_iterate(HomMap::zero(NormedSpace::l2(1), NormedSpace::l2(1)), k);
    Vec x = random_vec(h.domain().dim(), 2);
    for (auto _ : state) benchmark::DoNotOptimize(h(x));
}
BENCHMARK(BM_EnfloDeltaEval)->Arg(1)->Arg(3)->Arg(6);

void BM_FactorAxiomScan(benchmark::State& state) {
    FactorSystem phi = FactorSystem::rho(HomMap::kalton_peck(NormedSpace::l2(4)));
    for (auto _ : state)
        benchmark::DoNotOptimize(check_factor_axioms(phi, static_cast<int>(state.range(0)), 7));
}
BENCHMARK(BM_FactorAxiomScan)->Arg(100)->Arg(1000);

void BM_TwistedNormUpper(benchmark::State& state) {
    NormedSpace l22 = NormedSpace::l2(2);
    TwistedSpace space(l22, l22, FactorSystem::rho(HomMap::kalton_peck(l22)));
    TwistedPair z{random_vec(2, 3), random_vec(2, 4)};
    const int depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(twisted_norm_bounds(space, z, depth));
}
BENCHMARK(BM_TwistedNormUpper)->Arg(1)->Arg(2)->Arg(4);

void BM_CongruenceSolve(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    NormedSpace e = NormedSpace::l2(d), f = NormedSpace::l2(d);
    Mat a = random_matrix(d, d, 5);
    HomMap h = HomMap::sum(HomMap::linear(a, f, e),
                           HomMap::post(Mat::Identity(d, d), HomMap::kalton_peck(f)).with_spaces(f, e));
    Extension ext = extension_from_factor(e, f, FactorSystem::rho(h));
    Extension po = pushout(Mat::Identity(d, d), ext, e);
    for (auto _ : state) benchmark::DoNotOptimize(find_congruence(po, ext));
}
BENCHMARK(BM_CongruenceSolve)->Arg(2)->Arg(4)->Arg(8);

void BM_BaerSum(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    NormedSpace e = NormedSpace::l2(d), f = NormedSpace::l2(d);
    HomMap h = HomMap::kalton_peck(f);
    Extension ext = extension_from_factor(e, f, FactorSystem::rho(h));
    Extension split = split_extension(e, f);
    for (auto _ : state) benchmark::DoNotOptimize(baer_sum(ext, split));
}
BENCHMARK(BM_BaerSum)->Arg(2)->Arg(4)->Arg(8);

} // namespace

BENCHMARK_MAIN();
