// Timing harness for the best-matching-unit scan: serial reference vs the
// OpenMP kernel, checked for identical winners at every size.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gdm/bmu.hpp"
#include "gdm/rng.hpp"

namespace {

std::vector<gdm::Neuron> random_population(std::size_t count, int dim, int contexts,
                                           gdm::Rng& rng) {
    std::vector<gdm::Neuron> neurons(count);
    const std::size_t values = static_cast<std::size_t>(dim) * (contexts + 1);
    for (auto& n : neurons) {
        n.values.resize(values);
        for (auto& v : n.values) v = rng.uniform(-1.0, 1.0);
    }
    return neurons;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    int dim = 256;
    int contexts = 2;
    int queries = 200;
    int repeats = 3;
    std::uint64_t seed = 7;
    std::vector<std::size_t> sizes{256, 512, 1024, 2048, 4096};

    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        auto next = [&]() -> const char* {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "missing value for %s\n", arg.c_str());
                std::exit(2);
            }
            return argv[++i];
        };
        if (arg == "--dim") {
            dim = std::atoi(next());
        } else if (arg == "--contexts") {
            contexts = std::atoi(next());
        } else if (arg == "--queries") {
            queries = std::atoi(next());
        } else if (arg == "--repeats") {
            repeats = std::atoi(next());
        } else if (arg == "--seed") {
            seed = std::strtoull(next(), nullptr, 10);
        } else if (arg == "--sizes") {
            sizes.clear();
            std::string list = next();
            std::size_t pos = 0;
            while (pos < list.size()) {
                std::size_t comma = list.find(',', pos);
                if (comma == std::string::npos) comma = list.size();
                sizes.push_back(std::strtoull(list.substr(pos, comma - pos).c_str(), nullptr, 10));
                pos = comma + 1;
            }
        } else {
            std::fprintf(stderr,
                         "usage: bench_bmu [--dim D] [--contexts K] [--queries Q] "
                         "[--repeats R] [--sizes a,b,c] [--seed S]\n");
            return arg == "--help" || arg == "-h" ? 0 : 2;
        }
    }

#ifdef _OPENMP
    std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: not built in (parallel path falls back to serial)\n");
#endif
    std::printf("dim=%d contexts=%d queries=%d repeats=%d\n\n", dim, contexts, queries, repeats);
    std::printf("%10s %14s %14s %9s %7s\n", "neurons", "serial ms/q", "parallel ms/q", "speedup",
                "match");

    gdm::Rng rng(gdm::mix_seed(seed, 0));
    std::vector<double> alphas(static_cast<std::size_t>(contexts) + 1);
    double norm = 0.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        alphas[k] = static_cast<double>(alphas.size() - k);
        norm += alphas[k];
    }
    for (auto& a : alphas) a /= norm;

    bool all_match = true;
    for (const std::size_t count : sizes) {
        const auto neurons = random_population(count, dim, contexts, rng);
        std::vector<double> inputs(static_cast<std::size_t>(queries) * dim);
        std::vector<double> ctxs(static_cast<std::size_t>(queries) * dim * contexts);
        for (auto& v : inputs) v = rng.uniform(-1.0, 1.0);
        for (auto& v : ctxs) v = rng.uniform(-1.0, 1.0);

        auto query_at = [&](int q) {
            gdm::BmuQuery query;
            query.x = inputs.data() + static_cast<std::size_t>(q) * dim;
            query.ctx = ctxs.data() + static_cast<std::size_t>(q) * dim * contexts;
            query.alphas = alphas.data();
            query.context_count = contexts;
            query.dim = dim;
            query.metric = gdm::MetricKind::manhattan;
            return query;
        };

        double best_serial = 1e300;
        double best_parallel = 1e300;
        bool match = true;
        double sink = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            const double t0 = now_ms();
            for (int q = 0; q < queries; ++q) {
                const auto r = gdm::find_bmu_serial(query_at(q), neurons);
                sink += r.d_best;
            }
            const double t1 = now_ms();
            for (int q = 0; q < queries; ++q) {
                const auto r = gdm::find_bmu_parallel(query_at(q), neurons);
                sink += r.d_best;
            }
            const double t2 = now_ms();
            best_serial = std::min(best_serial, (t1 - t0) / queries);
            best_parallel = std::min(best_parallel, (t2 - t1) / queries);
        }
        for (int q = 0; q < queries; ++q) {
            const auto a = gdm::find_bmu_serial(query_at(q), neurons);
            const auto b = gdm::find_bmu_parallel(query_at(q), neurons);
            if (a.best != b.best || a.second != b.second || a.d_best != b.d_best ||
                a.d_second != b.d_second)
                match = false;
        }
        all_match = all_match && match;
        std::printf("%10zu %14.4f %14.4f %8.2fx %7s\n", count, best_serial, best_parallel,
                    best_serial / best_parallel, match ? "yes" : "NO");
        if (sink == -1.0) std::printf("%f\n", sink);
    }
    if (!all_match) {
        std::fprintf(stderr, "kernel mismatch between serial and parallel paths\n");
        return 1;
    }
    return 0;
}
