// Serial reference vs OpenMP area kernel on the same region and grid.
#include "lorentz_compare/comparison_suite.hpp"

#include <benchmark/benchmark.h>

namespace lc = lorentz_compare;

namespace {

struct Setup {
    lc::model::WarpingProfile profile = lc::model::build_profile({1.0, 0.0, 3});
    lc::grw::Spacetime st = lc::grw::Spacetime::from_profile(profile);
    lc::comparison::RegionSpec region;
    std::vector<double> grid;

    explicit Setup(std::size_t res)
        : region(lc::comparison::RegionSpec::ball(lc::grw::Hypersurface::slice(0.0), lc::grw::Vector::Zero(2), 1.0,
                                                  res)),
          grid(lc::comparison::default_t_grid(profile, 32)) {}
};

void run(benchmark::State& state, bool parallel) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    lc::comparison::AreaOptions opt;
    opt.parallel = parallel;
    for (auto _ : state) {
        auto prof = lc::comparison::area_profile(s.st, s.region, s.grid, opt);
        benchmark::DoNotOptimize(prof.area.back());
    }
    state.counters["nodes"] = static_cast<double>(lc::comparison::fiber_nodes(s.st, s.region).size());
}

void BM_AreaSerial(benchmark::State& state) { run(state, false); }
void BM_AreaOpenMP(benchmark::State& state) { run(state, true); }

}  // namespace

BENCHMARK(BM_AreaSerial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AreaOpenMP)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
