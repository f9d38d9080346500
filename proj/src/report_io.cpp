#include "gdm/report_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gdm {

namespace {

using nlohmann::json;

constexpr int kSchema = 1;

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, std::sqrt(var)};
}

json epoch_line(const EpochRecord& r) {
    return json{{"schema", kSchema},
                {"type", "epoch"},
                {"trial", r.trial},
                {"epoch", r.epoch},
                {"neurons_em", r.neurons_em},
                {"neurons_sm", r.neurons_sm},
                {"edges_em", r.edges_em},
                {"edges_sm", r.edges_sm},
                {"acc_instance_train", r.acc_instance_train},
                {"acc_category_train", r.acc_category_train},
                {"acc_instance_test", r.acc_instance_test},
                {"acc_category_test", r.acc_category_test},
                {"qe_em", r.qe_em},
                {"qe_sm", r.qe_sm},
                {"replay_sequences", r.replay_sequences}};
}

}  // namespace

std::string metrics_jsonl_string(const ScenarioReport& report) {
    std::string out;
    const std::size_t epochs = report.trials.empty() ? 0 : report.trials.front().epochs.size();

    for (const auto& trial : report.trials)
        for (const auto& rec : trial.epochs) out += epoch_line(rec).dump() + "\n";

    for (std::size_t e = 0; e < epochs; ++e) {
        std::vector<double> cat_test, inst_test, cat_train, inst_train, nem, nsm;
        for (const auto& trial : report.trials) {
            const EpochRecord& r = trial.epochs.at(e);
            cat_test.push_back(r.acc_category_test);
            inst_test.push_back(r.acc_instance_test);
            cat_train.push_back(r.acc_category_train);
            inst_train.push_back(r.acc_instance_train);
            nem.push_back(static_cast<double>(r.neurons_em));
            nsm.push_back(static_cast<double>(r.neurons_sm));
        }
        const auto [ct_m, ct_s] = mean_sd(cat_test);
        const auto [it_m, it_s] = mean_sd(inst_test);
        const auto [cr_m, cr_s] = mean_sd(cat_train);
        const auto [ir_m, ir_s] = mean_sd(inst_train);
        const auto [ne_m, ne_s] = mean_sd(nem);
        const auto [ns_m, ns_s] = mean_sd(nsm);
        out += json{{"schema", kSchema},
                    {"type", "epoch_mean"},
                    {"epoch", e},
                    {"acc_category_test_mean", ct_m},
                    {"acc_category_test_sd", ct_s},
                    {"acc_instance_test_mean", it_m},
                    {"acc_instance_test_sd", it_s},
                    {"acc_category_train_mean", cr_m},
                    {"acc_category_train_sd", cr_s},
                    {"acc_instance_train_mean", ir_m},
                    {"acc_instance_train_sd", ir_s},
                    {"neurons_em_mean", ne_m},
                    {"neurons_em_sd", ne_s},
                    {"neurons_sm_mean", ns_m},
                    {"neurons_sm_sd", ns_s}}
                   .dump() +
               "\n";
    }

    std::vector<double> final_cat, final_inst;
    json first_cats = json::array();
    for (const auto& trial : report.trials) {
        final_cat.push_back(trial.epochs.back().acc_category_test);
        final_inst.push_back(trial.epochs.back().acc_instance_test);
        json fc{{"trial", trial.trial}, {"first_category", trial.first_category}};
        if (trial.first_category >= 0) {
            auto it = trial.final_per_category.find(trial.first_category);
            fc["first_category_acc"] =
                it != trial.final_per_category.end() ? it->second : 0.0;
        }
        first_cats.push_back(fc);
    }
    const auto [fc_m, fc_s] = mean_sd(final_cat);
    const auto [fi_m, fi_s] = mean_sd(final_inst);
    out += json{{"schema", kSchema},
                {"type", "summary"},
                {"kind", scenario_name(report.config.kind)},
                {"profile", report.config.profile},
                {"trials", report.config.trials},
                {"epochs", epochs},
                {"replay", report.config.replay},
                {"temporal_context", report.config.temporal_context},
                {"label_availability", report.config.label_availability},
                {"seed", report.config.seed},
                {"dataset_categories", report.dataset_categories},
                {"final_acc_category_test_mean", fc_m},
                {"final_acc_category_test_sd", fc_s},
                {"final_acc_instance_test_mean", fi_m},
                {"final_acc_instance_test_sd", fi_s},
                {"first_category", first_cats}}
               .dump() +
           "\n";
    return out;
}

void write_metrics_jsonl(const std::string& path, const ScenarioReport& report) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << metrics_jsonl_string(report);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gdm
