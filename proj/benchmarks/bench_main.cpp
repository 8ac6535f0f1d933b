#include <benchmark/benchmark.h>

#include <vector>

#include "softopt/fem.hpp"
#include "softopt/finger.hpp"
#include "softopt/moo.hpp"
#include "softopt/nsga2.hpp"
#include "softopt/problems.hpp"
#include "softopt/rng.hpp"

using namespace softopt;

static std::vector<moo::ObjectiveVector> random_points(std::size_t n, std::size_t m) {
    Rng rng(n * 31 + m);
    std::vector<moo::ObjectiveVector> pts;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(m);
        for (auto& c : x) c = rng.uniform();
        pts.emplace_back(x);
    }
    return pts;
}

static void BM_NonDominatedSort(benchmark::State& state) {
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(moo::non_dominated_sort(pts));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NonDominatedSort)->ArgsProduct({{100, 500, 2000}, {2, 3}})->Complexity();

static void BM_Hypervolume2D(benchmark::State& state) {
    std::vector<moo::ObjectiveVector> front;
    const auto n = state.range(0);
    for (int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        front.push_back({t, 1.0 - t});
    }
    const moo::ObjectiveVector ref{2.0, 2.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(moo::hypervolume_2d(front, ref));
    }
}
BENCHMARK(BM_Hypervolume2D)->Arg(100)->Arg(1000);

static void BM_Nsga2Schaffer(benchmark::State& state) {
    const auto problem = problems::make_problem("schaffer");
    nsga2::SolverConfig cfg;
    cfg.budget = 1500;
    cfg.seed = 3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nsga2::run(problem.space, problem.evaluator, cfg));
    }
}
BENCHMARK(BM_Nsga2Schaffer)->Unit(benchmark::kMillisecond);

static void BM_BuildFinger(benchmark::State& state) {
    finger::MeshingSpec spec;
    spec.target_nodes = static_cast<int>(state.range(0));
    const auto design = finger::preset("baseline");
    for (auto _ : state) {
        benchmark::DoNotOptimize(finger::build_finger(design, spec));
    }
}
BENCHMARK(BM_BuildFinger)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

// one tangent assembly on the rest mesh
static void BM_AssembleStiffness(benchmark::State& state) {
    finger::MeshingSpec spec;
    spec.target_nodes = static_cast<int>(state.range(0));
    const auto mesh = finger::build_finger(finger::preset("baseline"), spec);
    const std::vector<fem::Vec3> u(mesh.nodes.size(), fem::Vec3::Zero());
    for (auto _ : state) {
        benchmark::DoNotOptimize(fem::elastic_force_and_stiffness(mesh, {}, u));
    }
}
BENCHMARK(BM_AssembleStiffness)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_EvaluateFinger(benchmark::State& state) {
    finger::MeshingSpec spec;
    spec.target_nodes = static_cast<int>(state.range(0));
    const auto design = finger::preset("baseline");
    for (auto _ : state) {
        benchmark::DoNotOptimize(finger::evaluate_deformation(design, {}, spec));
    }
}
BENCHMARK(BM_EvaluateFinger)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
