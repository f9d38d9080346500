#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gdm/hyperparams.hpp"
#include "gdm/metric.hpp"

namespace gdm {

// One unit of the network. `values` packs the weight vector followed by the
// K context descriptors: [w | c_1 | ... | c_K], each segment of length dim.
struct Neuron {
    std::vector<double> values;
    double habituation = 1.0;
    std::map<int, double> instance_counts;
    std::map<int, double> category_counts;
};

enum class BmuBackend { automatic, serial, parallel };

enum class GrowthGate {
    unsupervised,              // grow whenever activation and habituation allow
    require_misclassification  // additionally require a wrong category prediction
};

enum class LabelLevel { instance, category };

struct BmuResult {
    int best = -1;
    int second = -1;
    double d_best = 0.0;
    double d_second = 0.0;
};

struct StepOutcome {
    int bmu = -1;     // best match among the neurons that existed before the step
    int second = -1;
    int winner = -1;  // the inserted neuron if growth fired, otherwise bmu
    double dist = 0.0;
    double act = 0.0;
    std::optional<int> inserted;
    // Labels read from the BMU before any counter update (online accuracy).
    std::optional<int> predicted_instance;
    std::optional<int> predicted_category;
};

// Grow-when-required network with gamma-filter temporal context, habituation
// counters, associative label counters and temporal (consecutive-activation)
// links. Growth, adaptation and pruning follow the recurrent-GWR update rules;
// see step() for the per-frame order of operations.
class GammaGwrNet {
public:
    // Seeds must contain exactly two frames of length dim.
    GammaGwrNet(int dim, GwrHyperParams params, const std::vector<std::vector<double>>& seeds);

    int dim() const { return dim_; }
    int context_count() const { return params.context_count; }
    std::size_t size() const { return neurons.size(); }

    // --- kernel operations ----------------------------------------------

    // Shifts the global context one level: C_k <- beta * w_prev + (1 - beta) *
    // c_prev,k-1 with c_prev,0 == w_prev. No previous BMU leaves it untouched.
    void update_global_context();

    // Weighted sum of the input-space and context-space distances over all
    // neurons; ties break to the lowest id. Requires at least two neurons.
    BmuResult find_bmu(const double* x) const;
    BmuResult find_bmu_with_context(const double* x, const double* ctx) const;

    static double activation(double dist);

    // One habituation update h <- h + tau * (kappa * (1 - h) - 1), clamped.
    static double habituate_value(double h, double tau, double kappa);

    // Moves the BMU (lr_bmu, lr_context) and its one-ring neighbors
    // (lr_neighbor) toward the input and the current global context, then
    // habituates them. Rates are damped by each neuron's own habituation.
    void adapt(int bmu, const double* x);

    // Inserts the midpoint neuron between BMU and input when activation and
    // BMU habituation are both below threshold (plus the optional
    // misclassification gate on the category label). Rewires: BMU-second edge
    // is replaced by edges through the new neuron.
    std::optional<int> maybe_insert(int bmu, int second, double act, const double* x,
                                    GrowthGate gate = GrowthGate::unsupervised,
                                    std::optional<int> category_label = std::nullopt);

    // Creates or resets the (bmu, partner) edge to age 0 and ages every other
    // edge incident to bmu by 1.
    void update_edges(int bmu, int partner);

    void update_temporal_link(int from, int to);

    // delta+ on the observed label, delta- (floored at zero) on the other
    // counters of the same table. Absent labels leave that table unchanged.
    void update_labels(int j, std::optional<int> instance_label, std::optional<int> category_label);

    std::optional<int> predict_label(int j, LabelLevel level) const;

    // End-of-epoch connection maintenance. With removal_threshold < 1 an
    // over-age edge is removed only if the owning neuron is still poorly
    // trained (h >= threshold); well-trained neurons keep the edge with its
    // age reset. removal_threshold >= 1 selects the classic unconditional
    // variant. Neurons left without edges are deleted (well-trained ones are
    // kept in the gated variant), never dropping below two neurons.
    void prune();

    // Full per-frame update in the documented order. Returns what happened.
    StepOutcome step(const double* x, std::optional<int> instance_label,
                     std::optional<int> category_label,
                     GrowthGate gate = GrowthGate::unsupervised);

    // Forgets the temporal state between sequences.
    void reset_context();

    // Mahalanobis scale (per-dimension variance, floored); empty otherwise.
    const std::vector<double>& metric_scale() const { return scale_; }

    std::uint64_t edge_count() const;

    // --- state ------------------------------------------------------------

    GwrHyperParams params;
    std::vector<Neuron> neurons;
    std::vector<std::map<int, int>> edges;        // edges[i][j] = age, symmetric
    std::vector<std::map<int, double>> temporal;  // temporal[i][j] = activation count
    std::vector<double> global_context;           // K * dim
    int prev_bmu = -1;
    std::uint64_t step_count = 0;
    RunningVariance input_stats;
    BmuBackend bmu_backend = BmuBackend::automatic;
    bool record_temporal = true;  // cleared while rehearsal should not rewrite links

    double* weight(int j) { return neurons[j].values.data(); }
    const double* weight(int j) const { return neurons[j].values.data(); }
    double* context(int j, int k) { return neurons[j].values.data() + static_cast<std::size_t>(k) * dim_; }
    const double* context(int j, int k) const {
        return neurons[j].values.data() + static_cast<std::size_t>(k) * dim_;
    }

private:
    void age_incident_edges(int bmu, int skip);
    void refresh_scale();
    void check_index(int j) const;

    int dim_;
    std::vector<double> scale_;
};

}  // namespace gdm
