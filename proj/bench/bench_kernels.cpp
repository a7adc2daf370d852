#include "rfhlab/gradflow.hpp"
#include "rfhlab/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace rfh;

namespace {

Vec random_state(const FlowProblem& p)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    Vec v(p.dim());
    for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
    return v;
}

void gradient_bench(benchmark::State& st, bool parallel)
{
    static const ModelSystem sys = make_model(3);
    FlowProblem p(sys, FlowSystem::extended, static_cast<int>(st.range(0)));
    p.parallel = parallel;
    Vec v = random_state(p);
    for (auto _ : st) benchmark::DoNotOptimize(p.gradient(v));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_gradient_serial(benchmark::State& st) { gradient_bench(st, false); }
void BM_gradient_parallel(benchmark::State& st) { gradient_bench(st, true); }

}

BENCHMARK(BM_gradient_serial)->Arg(255)->Arg(1023)->Arg(4095);
BENCHMARK(BM_gradient_parallel)->Arg(255)->Arg(1023)->Arg(4095);

BENCHMARK_MAIN();
