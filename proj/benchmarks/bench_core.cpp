#include <benchmark/benchmark.h>

#include "qdyn/dynamics.hpp"
#include "qdyn/grape.hpp"
#include "qdyn/neural.hpp"
#include "qdyn/rlenv.hpp"
#include "qdyn/rng.hpp"

using namespace qdyn;

namespace {

ComplexMatrix random_anti_hermitian(Eigen::Index n, Rng& rng) {
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
        }
    }
    return 0.5 * (m - m.adjoint()).eval();
}

void BM_Expm(benchmark::State& state) {
    Rng rng(1);
    const ComplexMatrix a = random_anti_hermitian(state.range(0), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(linalg::expm(a));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Expm)->RangeMultiplier(2)->Range(4, 128)->Complexity();

void BM_ExpmFrechet(benchmark::State& state) {
    Rng rng(2);
    const ComplexMatrix a = random_anti_hermitian(state.range(0), rng);
    const ComplexMatrix e = random_anti_hermitian(state.range(0), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(linalg::expm_frechet(a, e));
    }
}
BENCHMARK(BM_ExpmFrechet)->RangeMultiplier(2)->Range(4, 64);

void BM_LiouvillianBuild(benchmark::State& state) {
    Rng rng(3);
    const int n = static_cast<int>(state.range(0));
    ComplexMatrix h(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) h(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    h = 0.5 * (h + h.adjoint()).eval();
    const std::vector<Operator> jumps{sigma_x()};
    const std::vector<double> rates{0.1};
    for (auto _ : state) {
        if (n == 2) {
            benchmark::DoNotOptimize(dynamics::build_liouvillian(h, jumps, rates));
        } else {
            benchmark::DoNotOptimize(dynamics::build_liouvillian(h, {}, {}));
        }
    }
}
BENCHMARK(BM_LiouvillianBuild)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_LindbladStep(benchmark::State& state) {
    const TimeGrid grid = TimeGrid::from_range(0.0, 1.0, 0.02);
    const auto h = DynamicOperator::from_constant(sigma_x(), grid);
    const dynamics::LindbladSpec spec(h, {sigma_z()}, {0.25});
    const DensityMatrix rho0 = get_density_matrix(QuantumState::basis(2)[0]);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dynamics::lindblad_integrate(rho0, spec, grid));
    }
}
BENCHMARK(BM_LindbladStep);

void BM_GrapeGradient(benchmark::State& state) {
    const int n_steps = static_cast<int>(state.range(0));
    const auto b = QuantumState::basis(2);
    const grape::ControlProblem problem(Operator(ComplexMatrix::Zero(2, 2)),
                                        {sigma_x(), sigma_z()}, b[0], b[1],
                                        TimeGrid::from_range(0.0, 0.1 * n_steps, 0.1), 1e-3);
    const grape::PulseSchedule schedule = grape::random_schedule(n_steps, 2, 1.0, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(grape::gradient(problem, schedule));
    }
}
BENCHMARK(BM_GrapeGradient)->Arg(25)->Arg(100);

void BM_BusGradient(benchmark::State& state) {
    neural::BusProblem p;  // full 80-dimensional problem
    const neural::Mlp net =
        neural::Mlp::create(150, 4, p.n_channels(), neural::Activation::Sin, 1.0, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(neural::bus_gradient(p, net));
    }
}
BENCHMARK(BM_BusGradient)->Unit(benchmark::kMillisecond);

void BM_EnvRollout(benchmark::State& state) {
    const rl::EnvParams params;
    const std::vector<double> actions(100, 0.7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rl::rollout(params, actions));
    }
}
BENCHMARK(BM_EnvRollout);

}  // namespace

BENCHMARK_MAIN();
