#include "gdm/bmu.hpp"

#include <limits>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool closer(double d, int id, double ref_d, int ref_id) {
    return d < ref_d || (d == ref_d && id < ref_id);
}

struct TopTwo {
    double d1 = kInf, d2 = kInf;
    int i1 = -1, i2 = -1;

    void offer(double d, int id) {
        if (closer(d, id, d1, i1)) {
            d2 = d1;
            i2 = i1;
            d1 = d;
            i1 = id;
        } else if (closer(d, id, d2, i2)) {
            d2 = d;
            i2 = id;
        }
    }

    void merge(const TopTwo& o) {
        if (o.i1 >= 0) offer(o.d1, o.i1);
        if (o.i2 >= 0) offer(o.d2, o.i2);
    }
};

}  // namespace

double bmu_score(const BmuQuery& q, const Neuron& neuron) {
    const double* v = neuron.values.data();
    const std::size_t n = static_cast<std::size_t>(q.dim);
    double d = q.alphas[0] * distance(q.metric, q.x, v, n, q.scale);
    for (int k = 1; k <= q.context_count; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * n;
        d += q.alphas[k] * distance(q.metric, q.ctx + off - n, v + off, n, q.scale);
    }
    return d;
}

BmuResult find_bmu_serial(const BmuQuery& q, const std::vector<Neuron>& neurons) {
    TopTwo top;
    for (std::size_t j = 0; j < neurons.size(); ++j)
        top.offer(bmu_score(q, neurons[j]), static_cast<int>(j));
    return {top.i1, top.i2, top.d1, top.d2};
}

BmuResult find_bmu_parallel(const BmuQuery& q, const std::vector<Neuron>& neurons) {
#if defined(_OPENMP)
    const int workers = omp_get_max_threads();
    if (workers > 1 && neurons.size() > 1) {
        std::vector<TopTwo> local(static_cast<std::size_t>(workers));
        const long count = static_cast<long>(neurons.size());
#pragma omp parallel num_threads(workers)
        {
            TopTwo mine;
#pragma omp for schedule(static) nowait
            for (long j = 0; j < count; ++j)
                mine.offer(bmu_score(q, neurons[static_cast<std::size_t>(j)]),
                           static_cast<int>(j));
            local[static_cast<std::size_t>(omp_get_thread_num())] = mine;
        }
        TopTwo top;
        for (const TopTwo& t : local) top.merge(t);
        return {top.i1, top.i2, top.d1, top.d2};
    }
#endif
    return find_bmu_serial(q, neurons);
}

BmuResult find_bmu_auto(const BmuQuery& q, const std::vector<Neuron>& neurons,
                        BmuBackend backend) {
    switch (backend) {
        case BmuBackend::serial: return find_bmu_serial(q, neurons);
        case BmuBackend::parallel: return find_bmu_parallel(q, neurons);
        case BmuBackend::automatic: break;
    }
#if defined(_OPENMP)
    // Fork overhead dominates below a few hundred score evaluations.
    if (neurons.size() >= 256 && omp_get_max_threads() > 1)
        return find_bmu_parallel(q, neurons);
#endif
    return find_bmu_serial(q, neurons);
}

}  // namespace gdm
