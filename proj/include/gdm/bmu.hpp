#pragma once

#include <cstddef>
#include <vector>

#include "gdm/gamma_gwr.hpp"

namespace gdm {

// Inputs of one best-matching-unit search. `ctx` is the K*dim global context;
// `scale` may be null for metrics that do not use it.
struct BmuQuery {
    const double* x = nullptr;
    const double* ctx = nullptr;
    const double* alphas = nullptr;  // K + 1 entries
    int context_count = 0;
    int dim = 0;
    MetricKind metric = MetricKind::manhattan;
    const double* scale = nullptr;
};

double bmu_score(const BmuQuery& q, const Neuron& neuron);

// Serial reference: single ordered scan, two running minima.
BmuResult find_bmu_serial(const BmuQuery& q, const std::vector<Neuron>& neurons);

// OpenMP variant. Each worker keeps its local two best (distance, id) pairs;
// the merge compares pairs under the same total order as the serial scan, so
// the result is identical for any thread count. Falls back to the serial scan
// when built without OpenMP.
BmuResult find_bmu_parallel(const BmuQuery& q, const std::vector<Neuron>& neurons);

// Picks the parallel path for populations large enough to amortize the fork.
BmuResult find_bmu_auto(const BmuQuery& q, const std::vector<Neuron>& neurons,
                        BmuBackend backend);

}  // namespace gdm
