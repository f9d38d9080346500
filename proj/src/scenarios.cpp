#include "gdm/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <set>
#include <stdexcept>

#include "gdm/rng.hpp"
#include "gdm/snapshot.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gdm {

ScenarioKind scenario_from_string(const std::string& name) {
    if (name == "batch") return ScenarioKind::batch;
    if (name == "incremental") return ScenarioKind::incremental;
    if (name == "ni") return ScenarioKind::ni;
    if (name == "nc") return ScenarioKind::nc;
    if (name == "nic") return ScenarioKind::nic;
    throw std::invalid_argument("unknown scenario: " + name);
}

const char* scenario_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::batch: return "batch";
        case ScenarioKind::incremental: return "incremental";
        case ScenarioKind::ni: return "ni";
        case ScenarioKind::nc: return "nc";
        case ScenarioKind::nic: return "nic";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (!(label_availability > 0.0 && label_availability <= 1.0))
        throw std::invalid_argument("label_availability must be in (0, 1]");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

double ScenarioReport::mean_final_acc_category_test() const {
    double s = 0.0;
    for (const auto& t : trials) s += t.epochs.back().acc_category_test;
    return trials.empty() ? 0.0 : s / static_cast<double>(trials.size());
}

double ScenarioReport::mean_final_acc_instance_test() const {
    double s = 0.0;
    for (const auto& t : trials) s += t.epochs.back().acc_instance_test;
    return trials.empty() ? 0.0 : s / static_cast<double>(trials.size());
}

namespace {

std::vector<int> train_categories(const Dataset& ds, bool required) {
    std::set<int> cats;
    for (const auto& s : ds.sequences) {
        if (s.collection >= ds.train_collections) continue;
        if (s.category())
            cats.insert(*s.category());
        else if (required)
            throw std::runtime_error("protocol requires category labels on every training sequence");
    }
    return {cats.begin(), cats.end()};
}

std::vector<const Sequence*> sequences_of_category(const std::vector<const Sequence*>& pool,
                                                   int category) {
    std::vector<const Sequence*> out;
    for (const Sequence* s : pool)
        if (s->category() == category) out.push_back(s);
    return out;
}

}  // namespace

TrainingPlan build_plan(ScenarioKind kind, const Dataset& ds, int epochs,
                        std::uint64_t trial_seed) {
    TrainingPlan plan;
    Rng rng(trial_seed);
    const auto train = ds.train_sequences();
    if (train.empty()) throw std::runtime_error("dataset has no training sequences");

    switch (kind) {
        case ScenarioKind::batch: {
            for (int e = 0; e < epochs; ++e) {
                MiniBatch b;
                b.sequences = train;
                rng.shuffle(b.sequences);
                plan.batches.push_back(std::move(b));
            }
            break;
        }
        case ScenarioKind::incremental: {
            plan.category_order = train_categories(ds, true);
            rng.shuffle(plan.category_order);
            for (int c : plan.category_order) {
                MiniBatch b;
                b.sequences = sequences_of_category(train, c);
                rng.shuffle(b.sequences);
                plan.batches.push_back(std::move(b));
            }
            plan.first_category = plan.category_order.front();
            break;
        }
        case ScenarioKind::ni: {
            std::vector<int> colls(static_cast<std::size_t>(ds.train_collections));
            for (int i = 0; i < ds.train_collections; ++i) colls[static_cast<std::size_t>(i)] = i;
            rng.shuffle(colls);
            for (int coll : colls) {
                MiniBatch b;
                for (const Sequence* s : train)
                    if (s->collection == coll) b.sequences.push_back(s);
                rng.shuffle(b.sequences);
                plan.batches.push_back(std::move(b));
            }
            break;
        }
        case ScenarioKind::nc: {
            plan.category_order = train_categories(ds, true);
            if (plan.category_order.size() != 10)
                throw std::runtime_error(
                    "nc protocol requires exactly 10 categories (plan 4+2+2+2); dataset has " +
                    std::to_string(plan.category_order.size()));
            rng.shuffle(plan.category_order);
            std::size_t at = 0;
            for (std::size_t group : {4u, 2u, 2u, 2u}) {
                MiniBatch b;
                for (std::size_t g = 0; g < group; ++g, ++at)
                    for (const Sequence* s :
                         sequences_of_category(train, plan.category_order[at]))
                        b.sequences.push_back(s);
                rng.shuffle(b.sequences);
                plan.batches.push_back(std::move(b));
            }
            plan.first_category = plan.category_order.front();
            break;
        }
        case ScenarioKind::nic: {
            plan.category_order = train_categories(ds, true);
            if (plan.category_order.size() != 10)
                throw std::runtime_error(
                    "nic protocol requires exactly 10 categories; dataset has " +
                    std::to_string(plan.category_order.size()));
            rng.shuffle(plan.category_order);
            std::map<int, std::vector<const Sequence*>> per_cat;
            std::map<int, std::size_t> used;
            for (int c : plan.category_order) {
                per_cat[c] = sequences_of_category(train, c);
                rng.shuffle(per_cat[c]);
                used[c] = 0;
            }
            auto take = [&](int c) -> const Sequence* {
                auto& pool = per_cat[c];
                if (used[c] >= pool.size())
                    throw std::runtime_error(
                        "nic plan exhausted training sequences of category " + std::to_string(c) +
                        "; it needs at least 10 per category");
                return pool[used[c]++];
            };
            MiniBatch first;
            for (std::size_t i = 0; i < 4; ++i)
                first.sequences.push_back(take(plan.category_order[i]));
            plan.batches.push_back(std::move(first));
            std::size_t pos = 4;
            for (int b = 1; b < 48; ++b) {
                MiniBatch mb;
                for (int g = 0; g < 2; ++g) {
                    const int c = plan.category_order[pos % plan.category_order.size()];
                    ++pos;
                    mb.sequences.push_back(take(c));
                }
                plan.batches.push_back(std::move(mb));
            }
            plan.first_category = plan.category_order.front();
            break;
        }
    }
    return plan;
}

TrialResult run_single_trial(const Dataset& ds, const ScenarioConfig& cfg,
                             const GdmParams& params, int trial,
                             std::optional<GdmModel>* out_model) {
    const std::uint64_t trial_base = mix_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    TrainingPlan plan = build_plan(cfg.kind, ds, cfg.epochs, mix_seed(trial_base, 1));
    Rng label_rng(mix_seed(trial_base, 2));

    // Bootstrap from the first two frames in presentation order.
    std::vector<std::vector<double>> seeds;
    for (const Sequence* s : plan.batches.front().sequences) {
        for (const auto& f : s->frames) {
            seeds.push_back(f.values);
            if (seeds.size() == 2) break;
        }
        if (seeds.size() == 2) break;
    }
    if (seeds.size() < 2) throw std::runtime_error("dataset too small to seed the networks");

    GdmModel model(ds.dim, params, seeds);

    const auto all_train = ds.train_sequences();
    const auto all_test = ds.test_sequences();
    if (all_test.empty()) throw std::runtime_error("dataset has no test sequences");

    std::vector<const Sequence*> seen_train;
    std::set<int> seen_categories;

    TrialResult result;
    result.trial = trial;
    result.first_category = plan.first_category;

    for (std::size_t e = 0; e < plan.batches.size(); ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const MiniBatch& batch = plan.batches[e];
        for (const Sequence* seq : batch.sequences) {
            model.reset_contexts();
            for (const auto& f : seq->frames) {
                const bool labeled = cfg.label_availability >= 1.0 ||
                                     label_rng.uniform() < cfg.label_availability;
                model.gdm_step(f.values.data(), labeled ? f.instance : std::nullopt,
                               labeled ? f.category : std::nullopt);
            }
            if (seq->category()) seen_categories.insert(*seq->category());
        }
        model.em.prune();
        model.sm.prune();
        ReplayReport replay_report;
        if (cfg.replay) replay_report = model.replay();

        if (cfg.kind == ScenarioKind::batch) {
            if (e == 0) seen_train = all_train;
        } else {
            seen_train.insert(seen_train.end(), batch.sequences.begin(), batch.sequences.end());
        }
        std::vector<const Sequence*> test_scope;
        if (cfg.kind == ScenarioKind::incremental) {
            for (const Sequence* s : all_test)
                if (s->category() && seen_categories.count(*s->category()))
                    test_scope.push_back(s);
        } else {
            test_scope = all_test;
        }

        const EvalResult train_eval = model.evaluate(seen_train);
        const EvalResult test_eval = model.evaluate(test_scope);
        const auto t1 = std::chrono::steady_clock::now();

        EpochRecord rec;
        rec.trial = trial;
        rec.epoch = static_cast<int>(e);
        rec.neurons_em = model.em.size();
        rec.neurons_sm = model.sm.size();
        rec.edges_em = model.em.edge_count();
        rec.edges_sm = model.sm.edge_count();
        rec.acc_instance_train = train_eval.acc_instance;
        rec.acc_category_train = train_eval.acc_category;
        rec.acc_instance_test = test_eval.acc_instance;
        rec.acc_category_test = test_eval.acc_category;
        rec.qe_em = train_eval.qe_em;
        rec.qe_sm = train_eval.qe_sm;
        rec.replay_sequences = replay_report.sequences;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        result.epochs.push_back(rec);

        if (e + 1 == plan.batches.size())
            for (const auto& [cat, tally] : test_eval.per_category)
                result.final_per_category[cat] =
                    tally.second ? static_cast<double>(tally.first) /
                                       static_cast<double>(tally.second)
                                 : 0.0;
    }

    if (out_model) out_model->emplace(std::move(model));
    return result;
}

ScenarioRunResult run_scenario(const Dataset& ds, const ScenarioConfig& cfg,
                               const GdmParams& params) {
    cfg.validate();
    params.validate();

    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
    std::vector<std::optional<GdmModel>> models(static_cast<std::size_t>(cfg.trials));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.trials));

    const int workers = std::min(cfg.workers, cfg.trials);
#if defined(_OPENMP)
    if (workers > 1) {
#pragma omp parallel for num_threads(workers) schedule(dynamic)
        for (int t = 0; t < cfg.trials; ++t) {
            try {
                results[static_cast<std::size_t>(t)] =
                    run_single_trial(ds, cfg, params, t, &models[static_cast<std::size_t>(t)]);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        }
    } else
#endif
    {
        (void)workers;
        for (int t = 0; t < cfg.trials; ++t) {
            try {
                results[static_cast<std::size_t>(t)] =
                    run_single_trial(ds, cfg, params, t, &models[static_cast<std::size_t>(t)]);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        }
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    ScenarioRunResult out;
    out.report.config = cfg;
    out.report.dataset_categories = static_cast<int>(ds.categories().size());
    out.report.trials = std::move(results);
    for (auto& m : models) out.models.push_back(std::move(*m));
    return out;
}

Footprint measure_footprint(const GdmModel& model, const Dataset& ds, std::uint64_t seed) {
    Footprint fp;
    fp.em_bytes = serialized_net_bytes(model.em);
    fp.sm_bytes = serialized_net_bytes(model.sm);
    fp.total_bytes = fp.em_bytes + fp.sm_bytes + 13;  // magic, version, flags, window

    std::vector<const double*> frames;
    for (const Sequence* s : ds.test_sequences())
        for (const auto& f : s->frames) frames.push_back(f.values.data());
    if (frames.empty())
        for (const auto& s : ds.sequences)
            for (const auto& f : s.frames) frames.push_back(f.values.data());
    Rng rng(mix_seed(seed, 99));
    rng.shuffle(frames);
    if (frames.size() > 50) frames.resize(50);
    fp.probe_frames = frames.size();

    const auto t0 = std::chrono::steady_clock::now();
    for (const double* f : frames) model.predict_sequence({f});
    const auto t1 = std::chrono::steady_clock::now();
    fp.inference_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return fp;
}

}  // namespace gdm
