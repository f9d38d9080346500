#include "gdm/metric.hpp"

#include <cmath>
#include <stdexcept>

namespace gdm {

MetricKind metric_from_string(const std::string& name) {
    if (name == "manhattan") return MetricKind::manhattan;
    if (name == "euclidean") return MetricKind::euclidean;
    if (name == "squared_euclidean") return MetricKind::squared_euclidean;
    if (name == "minkowski_p3") return MetricKind::minkowski_p3;
    if (name == "cosine_distance") return MetricKind::cosine_distance;
    if (name == "mahalanobis_diagonal") return MetricKind::mahalanobis_diagonal;
    throw std::invalid_argument("unknown metric: " + name);
}

const char* metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::manhattan: return "manhattan";
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::squared_euclidean: return "squared_euclidean";
        case MetricKind::minkowski_p3: return "minkowski_p3";
        case MetricKind::cosine_distance: return "cosine_distance";
        case MetricKind::mahalanobis_diagonal: return "mahalanobis_diagonal";
    }
    return "?";
}

double distance(MetricKind kind, const double* a, const double* b, std::size_t n,
                const double* scale) {
    switch (kind) {
        case MetricKind::manhattan: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
            return s;
        }
        case MetricKind::euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case MetricKind::squared_euclidean: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = a[i] - b[i];
                s += d * d;
            }
            return s;
        }
        case MetricKind::minkowski_p3: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = std::fabs(a[i] - b[i]);
                s += d * d * d;
            }
            return std::cbrt(s);
        }
        case MetricKind::cosine_distance: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (na == 0.0 || nb == 0.0) return 1.0;
            return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
        }
        case MetricKind::mahalanobis_diagonal: {
            if (scale == nullptr)
                throw std::invalid_argument("mahalanobis_diagonal requires a scale vector");
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(scale[i] > 0.0))
                    throw std::invalid_argument("mahalanobis_diagonal scale must be positive");
                const double d = a[i] - b[i];
                s += d * d / scale[i];
            }
            return std::sqrt(s);
        }
    }
    throw std::invalid_argument("unknown metric kind");
}

double distance(MetricKind kind, const std::vector<double>& a, const std::vector<double>& b,
                const std::vector<double>* scale) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimension mismatch");
    if (scale != nullptr && scale->size() != a.size())
        throw std::invalid_argument("distance: scale dimension mismatch");
    return distance(kind, a.data(), b.data(), a.size(), scale ? scale->data() : nullptr);
}

}  // namespace gdm
