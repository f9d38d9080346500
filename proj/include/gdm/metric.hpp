#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gdm {

enum class MetricKind {
    manhattan,
    euclidean,
    squared_euclidean,
    minkowski_p3,
    cosine_distance,
    mahalanobis_diagonal,
};

MetricKind metric_from_string(const std::string& name);
const char* metric_name(MetricKind kind);

// Distance between two n-dimensional vectors. `scale` holds per-dimension
// variances and is consulted only by mahalanobis_diagonal, where it must be
// present and strictly positive. All variants are symmetric, non-negative and
// zero on identical inputs; cosine_distance of any zero vector is defined as 1.
double distance(MetricKind kind, const double* a, const double* b, std::size_t n,
                const double* scale = nullptr);

double distance(MetricKind kind, const std::vector<double>& a, const std::vector<double>& b,
                const std::vector<double>* scale = nullptr);

// Welford online mean/variance per dimension; feeds the mahalanobis scale.
struct RunningVariance {
    std::uint64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    void init(std::size_t n) {
        count = 0;
        mean.assign(n, 0.0);
        m2.assign(n, 0.0);
    }

    void add(const double* x) {
        ++count;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double delta = x[i] - mean[i];
            mean[i] += delta / static_cast<double>(count);
            m2[i] += delta * (x[i] - mean[i]);
        }
    }

    // Population variance with a floor keeping the scale strictly positive.
    void variances(std::vector<double>& out, double floor_value = 1e-8) const {
        out.assign(mean.size(), floor_value);
        if (count < 2) return;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double v = m2[i] / static_cast<double>(count);
            out[i] = v > floor_value ? v : floor_value;
        }
    }
};

}  // namespace gdm
