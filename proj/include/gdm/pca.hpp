#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gdm {

struct PcaResult {
    std::vector<double> mean;
    std::vector<double> pc1;
    std::vector<double> pc2;
    double var1 = 0.0;
    double var2 = 0.0;
    int rank = 0;  // components with non-negligible variance (0, 1 or 2)
};

// Top-2 principal axes by power iteration with deflation (tolerance 1e-9,
// at most 10000 iterations per component). The covariance is applied
// implicitly, so cost per iteration is O(rows * dim). Components are
// sign-fixed (largest-magnitude coordinate positive) for determinism.
PcaResult pca_top2(const std::vector<const double*>& rows, std::size_t dim);

// 2-D coordinates of x; missing components project to 0.
std::pair<double, double> pca_project(const PcaResult& pca, const double* x);

}  // namespace gdm
