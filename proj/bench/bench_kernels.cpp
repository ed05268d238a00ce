#include <map>

#include <benchmark/benchmark.h>

#include "ratedml/learners.hpp"
#include "ratedml/panel_data.hpp"
#include "ratedml/rng.hpp"
#include "ratedml/synth.hpp"

using namespace ratedml;

namespace {

struct Regression {
    Matrix x;
    Vector y;
};

const Regression& regression(int n) {
    static std::map<int, Regression> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    SynthSpec s;
    s.kind = SynthKind::PlrNonlinear;
    s.n = n;
    s.k_controls = 8;
    s.seed = 1;
    const auto p = gen_plr(s).problem;
    return cache.emplace(n, Regression{p.x, p.y}).first->second;
}

Exec exec_of(int64_t code) { return code == 0 ? Exec::Reference : code == 1 ? Exec::Serial : Exec::Parallel; }

void BM_GbtFit(benchmark::State& state) {
    const auto& r = regression(static_cast<int>(state.range(0)));
    const Exec exec = exec_of(state.range(1));
    const HyperParams p{50, 3, 0.1, 20, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(gbt_fit(r.x, r.y, p, 1, exec));
    state.SetLabel(exec == Exec::Reference ? "reference" : exec == Exec::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_GbtFit)->ArgsProduct({{2000, 10000}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_GridSearch(benchmark::State& state) {
    const auto& r = regression(2000);
    const Exec exec = exec_of(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(grid_search_cv(r.x, r.y, default_grid(), 2, 3, exec));
}
BENCHMARK(BM_GridSearch)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_DfDraws(benchmark::State& state) {
    const Exec exec = exec_of(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(df_tstat_draws(500, 20000, 1, exec));
}
BENCHMARK(BM_DfDraws)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ToPanel(benchmark::State& state) {
    PanelFixtureSpec spec;
    spec.funds = 200;
    const auto fx = gen_panel_fixture(spec);
    const auto macro = difference_columns(fx.macro);
    const auto [funds, m] = align_common(fx.funds, macro);
    const auto treatment = to_series(m, fx.treatment);
    const auto controls = m.drop({fx.treatment});
    const Exec exec = exec_of(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(to_panel(funds, treatment, controls, 7, exec));
}
BENCHMARK(BM_ToPanel)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
