// Pivotal times along one coupled sample of the Schottky reference walk.

#include <cstdio>

#include "dimcons/dimcons.hpp"

int main() {
    using namespace dimcons;
    const PivotalConstants k;
    const auto S = construct_schottky_set(2, 200, static_cast<std::size_t>(k.D), k.C0, 1);
    const auto srw = FactorMeasure::srw(2);
    const SchottkyDecomposition d{0.5, FactorMeasure::uniform(2, S), srw, MeasureSpec::product(srw, srw)};

    const auto plan = plan_coupling(d, k);
    std::printf("#S = %zu, N = %zu, beta = %.3f\n", plan.schottky.certificate.S.size(), plan.N, plan.beta);

    Rng rng(42);
    const auto sample = sample_coupling(d, plan, 400, rng);
    const auto trace = pivotal_times(materialize(plan.schottky.certificate.S, sample.s, sample.u), k, true);
    std::printf("flagged blocks %zu, pivots at n: %zu, audit violations %zu\n", sample.s.a.size(),
                trace.final_pivots().size(), trace.audit.violations);
    for (std::size_t i = 0; i < trace.P.size(); i += std::max<std::size_t>(1, trace.P.size() / 10))
        std::printf("  #P_%zu = %zu\n", i, trace.P[i].size());
}
