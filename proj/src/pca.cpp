#include "gdm/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace gdm {

namespace {

constexpr double kTol = 1e-9;
constexpr int kMaxIter = 10000;

// y = Cov * v, computed as (1/(m-1)) sum_r (r - mean) ((r - mean) . v),
// with an optional deflation term lambda1 * (pc1 . v) * pc1 subtracted.
void apply_cov(const std::vector<const double*>& rows, const std::vector<double>& mean,
               const std::vector<double>& v, const std::vector<double>* deflate,
               double deflate_var, std::vector<double>& y) {
    const std::size_t n = mean.size();
    y.assign(n, 0.0);
    for (const double* r : rows) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += (r[i] - mean[i]) * v[i];
        for (std::size_t i = 0; i < n; ++i) y[i] += dot * (r[i] - mean[i]);
    }
    const double denom = static_cast<double>(rows.size() - 1);
    for (auto& x : y) x /= denom;
    if (deflate) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += (*deflate)[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) y[i] -= deflate_var * dot * (*deflate)[i];
    }
}

void fix_sign(std::vector<double>& v) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::fabs(v[i]) > best) {
            best = std::fabs(v[i]);
            arg = i;
        }
    if (v[arg] < 0.0)
        for (auto& x : v) x = -x;
}

// Returns the eigenvalue, or 0 if the component is negligible.
double power_component(const std::vector<const double*>& rows, const std::vector<double>& mean,
                       const std::vector<double>* deflate, double deflate_var, double scale,
                       std::vector<double>& v) {
    const std::size_t n = mean.size();
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    std::vector<double> y;
    double lambda = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
        apply_cov(rows, mean, v, deflate, deflate_var, y);
        lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) lambda += v[i] * y[i];
        double ny = 0.0;
        for (double x : y) ny += x * x;
        ny = std::sqrt(ny);
        if (ny <= 1e-15 * (scale > 0.0 ? scale : 1.0)) return 0.0;
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] /= ny;
            delta = std::max(delta, std::fabs(y[i] - v[i]));
        }
        v.swap(y);
        if (delta < kTol) break;
    }
    if (lambda <= 1e-12 * (scale > 0.0 ? scale : 1.0)) return 0.0;
    fix_sign(v);
    return lambda;
}

}  // namespace

PcaResult pca_top2(const std::vector<const double*>& rows, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("pca_top2: dim must be positive");
    PcaResult out;
    out.mean.assign(dim, 0.0);
    if (rows.empty()) return out;
    for (const double* r : rows)
        for (std::size_t i = 0; i < dim; ++i) out.mean[i] += r[i];
    for (auto& x : out.mean) x /= static_cast<double>(rows.size());
    if (rows.size() < 2) return out;

    // Total variance sets the scale for the negligible-component cutoff.
    double trace = 0.0;
    for (const double* r : rows)
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = r[i] - out.mean[i];
            trace += d * d;
        }
    trace /= static_cast<double>(rows.size() - 1);
    if (trace <= 0.0) return out;

    out.var1 = power_component(rows, out.mean, nullptr, 0.0, trace, out.pc1);
    if (out.var1 <= 0.0) {
        out.pc1.clear();
        return out;
    }
    out.rank = 1;
    out.var2 = power_component(rows, out.mean, &out.pc1, out.var1, trace, out.pc2);
    if (out.var2 <= 0.0) {
        out.pc2.clear();
        return out;
    }
    out.rank = 2;
    return out;
}

std::pair<double, double> pca_project(const PcaResult& pca, const double* x) {
    double px = 0.0, py = 0.0;
    const std::size_t n = pca.mean.size();
    if (pca.rank >= 1)
        for (std::size_t i = 0; i < n; ++i) px += (x[i] - pca.mean[i]) * pca.pc1[i];
    if (pca.rank >= 2)
        for (std::size_t i = 0; i < n; ++i) py += (x[i] - pca.mean[i]) * pca.pc2[i];
    return {px, py};
}

}  // namespace gdm
