#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gdm/dataset.hpp"
#include "gdm/gamma_gwr.hpp"
#include "gdm/hyperparams.hpp"

namespace gdm {

struct GdmStepOutcome {
    StepOutcome em;
    StepOutcome sm;
    // Online predictions made before any counter update.
    std::optional<int> predicted_instance;  // episodic BMU, instance table
    std::optional<int> predicted_category;  // semantic BMU, category table
};

struct FramePrediction {
    std::optional<int> instance;
    std::optional<int> category;
    double em_dist = 0.0;
    double sm_dist = 0.0;
};

// Prototype trajectory recalled from the episodic temporal links.
struct PseudoSequence {
    int source_neuron = -1;
    std::vector<std::vector<double>> frames;
    std::vector<std::optional<int>> instance_labels;
    std::vector<std::optional<int>> category_labels;
};

struct ReplayReport {
    std::size_t sequences = 0;
    std::size_t frames = 0;
    int em_grown = 0;
    int sm_grown = 0;
};

struct EvalResult {
    std::size_t frames = 0;
    double acc_instance = 0.0;
    double acc_category = 0.0;
    double qe_em = 0.0;  // mean episodic BMU distance
    double qe_sm = 0.0;
    // Per ground-truth category: {correct, total} at the category level.
    std::map<int, std::pair<std::size_t, std::size_t>> per_category;

    double category_accuracy(int cat) const {
        auto it = per_category.find(cat);
        if (it == per_category.end() || it->second.second == 0) return 0.0;
        return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
};

// Dual-memory learner: an episodic network trained on raw frames feeds its
// winning prototype into a semantic network whose growth additionally
// requires a category misclassification. Periodic replay regenerates
// prototype sequences from the episodic temporal links and rehearses both
// networks on them.
class GdmModel {
public:
    // Seeds both networks from two bootstrap frames.
    GdmModel(int dim, GdmParams params, const std::vector<std::vector<double>>& seeds);

    GdmStepOutcome gdm_step(const double* x, std::optional<int> instance_label,
                            std::optional<int> category_label);

    void reset_contexts();

    // Walks the episodic temporal links (argmax successor, ties to the lowest
    // id) from every neuron; sequences shorter than the replay window are
    // discarded. Labels are each visited neuron's counter argmax.
    std::vector<PseudoSequence> generate_rnats() const;

    // Rehearses every pseudo-sequence through the normal step path (growth
    // enabled). No-op when replay is disabled.
    ReplayReport replay();

    // Read-only inference over one ordered sequence of frames.
    std::vector<FramePrediction> predict_sequence(
        const std::vector<const double*>& frames) const;

    // Read-only accuracy/quantization over whole sequences. Requires at least
    // one labeled frame at each level.
    EvalResult evaluate(const std::vector<const Sequence*>& sequences) const;

    GdmParams params;
    GammaGwrNet em;
    GammaGwrNet sm;
};

}  // namespace gdm
