#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdm/dataset.hpp"
#include "gdm/gdm_model.hpp"
#include "gdm/hyperparams.hpp"

namespace gdm {

enum class ScenarioKind { batch, incremental, ni, nc, nic };

ScenarioKind scenario_from_string(const std::string& name);
const char* scenario_name(ScenarioKind kind);

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::batch;
    int epochs = 35;  // batch only; the other kinds derive epochs from their plan
    int trials = 5;
    bool replay = true;
    bool temporal_context = true;
    double label_availability = 1.0;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string profile;  // informational echo; parameters travel separately

    void validate() const;
};

struct EpochRecord {
    int trial = 0;
    int epoch = 0;
    std::size_t neurons_em = 0;
    std::size_t neurons_sm = 0;
    std::uint64_t edges_em = 0;
    std::uint64_t edges_sm = 0;
    double acc_instance_train = 0.0;
    double acc_category_train = 0.0;
    double acc_instance_test = 0.0;
    double acc_category_test = 0.0;
    double qe_em = 0.0;  // train-split quantization error
    double qe_sm = 0.0;
    std::size_t replay_sequences = 0;
    double wall_ms = 0.0;  // reported out of band, not in the canonical metrics
};

struct TrialResult {
    int trial = 0;
    int first_category = -1;  // first-taught category where the plan defines one
    std::vector<EpochRecord> epochs;
    std::map<int, double> final_per_category;  // category-level test accuracy
};

struct ScenarioReport {
    ScenarioConfig config;
    int dataset_categories = 0;
    std::vector<TrialResult> trials;

    double mean_final_acc_category_test() const;
    double mean_final_acc_instance_test() const;
};

// One mini-batch of the training plan; sequences are already in the order
// they will be presented.
struct MiniBatch {
    std::vector<const Sequence*> sequences;
};

struct TrainingPlan {
    std::vector<MiniBatch> batches;
    std::vector<int> category_order;  // seeded order where the kind uses one
    int first_category = -1;
};

// Deterministic for (dataset, kind, trial seed). Throws when the dataset does
// not fit the protocol (e.g. the {4,2,2,2} plan needs exactly 10 categories).
TrainingPlan build_plan(ScenarioKind kind, const Dataset& ds, int epochs, std::uint64_t trial_seed);

struct ScenarioRunResult {
    ScenarioReport report;
    std::vector<GdmModel> models;  // final model per trial
};

TrialResult run_single_trial(const Dataset& ds, const ScenarioConfig& cfg,
                             const GdmParams& params, int trial,
                             std::optional<GdmModel>* out_model = nullptr);

// Full multi-trial run; trials are independent and may execute on parallel
// workers, with records slotted by trial index so results do not depend on
// scheduling.
ScenarioRunResult run_scenario(const Dataset& ds, const ScenarioConfig& cfg,
                               const GdmParams& params);

struct Footprint {
    std::uint64_t em_bytes = 0;
    std::uint64_t sm_bytes = 0;
    std::uint64_t total_bytes = 0;
    std::size_t probe_frames = 0;
    double inference_ms = 0.0;
};

// Serialized network sizes plus wall time of a 50-frame inference probe drawn
// from the test split.
Footprint measure_footprint(const GdmModel& model, const Dataset& ds, std::uint64_t seed);

}  // namespace gdm
