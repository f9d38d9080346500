#include "gdm/gdm_model.hpp"

#include <cstring>
#include <stdexcept>

namespace gdm {

GdmModel::GdmModel(int dim, GdmParams p, const std::vector<std::vector<double>>& seeds)
    : params(p), em(dim, p.em, seeds), sm(dim, p.sm, seeds) {
    params.validate();
}

GdmStepOutcome GdmModel::gdm_step(const double* x, std::optional<int> instance_label,
                                  std::optional<int> category_label) {
    GdmStepOutcome out;

    std::vector<double> pre_weight;
    if (!params.sm_input_post_adapt) {
        // Preview the episodic winner so its weight can be captured before
        // adaptation. The preview context update is idempotent: step() will
        // recompute the same context from the same previous BMU.
        em.update_global_context();
        const BmuResult preview = em.find_bmu(x);
        pre_weight.assign(em.weight(preview.best),
                          em.weight(preview.best) + em.dim());
    }

    out.em = em.step(x, instance_label, category_label, GrowthGate::unsupervised);

    const double* sm_input =
        params.sm_input_post_adapt ? em.weight(out.em.winner) : pre_weight.data();
    out.sm = sm.step(sm_input, std::nullopt, category_label,
                     GrowthGate::require_misclassification);

    out.predicted_instance = out.em.predicted_instance;
    out.predicted_category = out.sm.predicted_category;
    return out;
}

void GdmModel::reset_contexts() {
    em.reset_context();
    sm.reset_context();
}

std::vector<PseudoSequence> GdmModel::generate_rnats() const {
    const int window = params.effective_replay_window();
    std::vector<PseudoSequence> out;
    for (int j = 0; j < static_cast<int>(em.size()); ++j) {
        PseudoSequence seq;
        seq.source_neuron = j;
        int cur = j;
        while (static_cast<int>(seq.frames.size()) < window) {
            seq.frames.emplace_back(em.weight(cur), em.weight(cur) + em.dim());
            seq.instance_labels.push_back(em.predict_label(cur, LabelLevel::instance));
            seq.category_labels.push_back(em.predict_label(cur, LabelLevel::category));
            if (static_cast<int>(seq.frames.size()) == window) break;
            const auto& row = em.temporal[static_cast<std::size_t>(cur)];
            int next = -1;
            double best = 0.0;
            for (const auto& [to, count] : row)
                if (count > best) {  // ties keep the lowest id
                    next = to;
                    best = count;
                }
            if (next < 0) break;
            cur = next;
        }
        if (static_cast<int>(seq.frames.size()) == window) out.push_back(std::move(seq));
    }
    return out;
}

ReplayReport GdmModel::replay() {
    ReplayReport report;
    if (!params.replay_enabled) return report;
    const auto rnats = generate_rnats();
    const std::size_t em_before = em.size();
    const std::size_t sm_before = sm.size();

    const bool keep = params.replay_updates_temporal;
    em.record_temporal = keep;
    sm.record_temporal = keep;
    for (const auto& seq : rnats) {
        reset_contexts();
        for (std::size_t t = 0; t < seq.frames.size(); ++t) {
            gdm_step(seq.frames[t].data(), seq.instance_labels[t], seq.category_labels[t]);
            ++report.frames;
        }
        ++report.sequences;
    }
    em.record_temporal = true;
    sm.record_temporal = true;
    reset_contexts();

    report.em_grown = static_cast<int>(em.size() - em_before);
    report.sm_grown = static_cast<int>(sm.size() - sm_before);
    return report;
}

std::vector<FramePrediction> GdmModel::predict_sequence(
    const std::vector<const double*>& frames) const {
    const std::size_t n = static_cast<std::size_t>(em.dim());
    std::vector<double> em_ctx(n * static_cast<std::size_t>(em.context_count()), 0.0);
    std::vector<double> sm_ctx(n * static_cast<std::size_t>(sm.context_count()), 0.0);
    int em_prev = -1, sm_prev = -1;

    auto shift_context = [&](const GammaGwrNet& net, std::vector<double>& ctx, int prev) {
        if (prev < 0) return;
        const double beta = net.params.context_blend;
        for (int k = net.context_count(); k >= 1; --k) {
            const double* w = net.weight(prev);
            const double* c = net.context(prev, k - 1);
            double* out = ctx.data() + static_cast<std::size_t>(k - 1) * n;
            for (std::size_t i = 0; i < n; ++i) out[i] = beta * w[i] + (1.0 - beta) * c[i];
        }
    };

    std::vector<FramePrediction> out;
    out.reserve(frames.size());
    for (const double* x : frames) {
        shift_context(em, em_ctx, em_prev);
        const BmuResult em_bmu = em.find_bmu_with_context(x, em_ctx.data());
        shift_context(sm, sm_ctx, sm_prev);
        const BmuResult sm_bmu = sm.find_bmu_with_context(em.weight(em_bmu.best), sm_ctx.data());

        FramePrediction p;
        p.instance = em.predict_label(em_bmu.best, LabelLevel::instance);
        p.category = sm.predict_label(sm_bmu.best, LabelLevel::category);
        p.em_dist = em_bmu.d_best;
        p.sm_dist = sm_bmu.d_best;
        out.push_back(p);
        em_prev = em_bmu.best;
        sm_prev = sm_bmu.best;
    }
    return out;
}

EvalResult GdmModel::evaluate(const std::vector<const Sequence*>& sequences) const {
    if (sequences.empty()) throw std::invalid_argument("evaluate: empty dataset");
    EvalResult r;
    std::size_t instance_labeled = 0, instance_correct = 0;
    std::size_t category_labeled = 0, category_correct = 0;
    double qe_em_sum = 0.0, qe_sm_sum = 0.0;

    std::vector<const double*> ptrs;
    for (const Sequence* seq : sequences) {
        ptrs.clear();
        ptrs.reserve(seq->frames.size());
        for (const auto& f : seq->frames) ptrs.push_back(f.values.data());
        const auto preds = predict_sequence(ptrs);
        for (std::size_t t = 0; t < preds.size(); ++t) {
            const FeatureFrame& f = seq->frames[t];
            qe_em_sum += preds[t].em_dist;
            qe_sm_sum += preds[t].sm_dist;
            ++r.frames;
            if (f.instance) {
                ++instance_labeled;
                if (preds[t].instance == f.instance) ++instance_correct;
            }
            if (f.category) {
                ++category_labeled;
                auto& tally = r.per_category[*f.category];
                ++tally.second;
                if (preds[t].category == f.category) {
                    ++category_correct;
                    ++tally.first;
                }
            }
        }
    }
    if (instance_labeled == 0 || category_labeled == 0)
        throw std::invalid_argument("evaluate: dataset carries no labels");
    r.acc_instance = static_cast<double>(instance_correct) / static_cast<double>(instance_labeled);
    r.acc_category = static_cast<double>(category_correct) / static_cast<double>(category_labeled);
    r.qe_em = qe_em_sum / static_cast<double>(r.frames);
    r.qe_sm = qe_sm_sum / static_cast<double>(r.frames);
    return r;
}

}  // namespace gdm
