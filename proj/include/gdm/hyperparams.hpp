#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdm/metric.hpp"

namespace gdm {

// Per-network knobs of the recurrent grow-when-required layer.
struct GwrHyperParams {
    double insertion_threshold = 0.7;    // activation below this may trigger growth
    double habituation_threshold = 0.1;  // BMU must also be trained below this
    int context_count = 2;               // K temporal context descriptors
    double context_blend = 0.5;          // beta, blend between weight and deeper context
    std::vector<double> context_weights = {0.63, 0.234, 0.086};  // alpha_0..alpha_K
    double lr_bmu = 0.3;                 // epsilon_b
    double lr_neighbor = 0.003;          // epsilon_n
    double lr_context = 0.001;           // epsilon_c, context rate of the BMU
    double hab_tau_bmu = 0.3;            // tau_b
    double hab_tau_neighbor = 0.1;       // tau_i
    double hab_kappa = 1.05;             // kappa, controls the habituation floor 1-1/kappa
    int max_edge_age = 50;
    double removal_threshold = 0.2;      // N_T; >= 1.0 selects classic unconditional pruning
    double label_delta_pos = 1.0;        // delta+
    double label_delta_neg = 0.1;        // delta-
    MetricKind metric = MetricKind::manhattan;

    void validate() const {
        if (!(insertion_threshold > 0.0 && insertion_threshold <= 1.0))
            throw std::invalid_argument("insertion_threshold must be in (0, 1]");
        if (!(habituation_threshold > 0.0 && habituation_threshold < 1.0))
            throw std::invalid_argument("habituation_threshold must be in (0, 1)");
        if (context_count < 0)
            throw std::invalid_argument("context_count must be >= 0");
        if (context_weights.size() != static_cast<std::size_t>(context_count) + 1)
            throw std::invalid_argument("context_weights must have context_count + 1 entries");
        for (double a : context_weights)
            if (!(a > 0.0)) throw std::invalid_argument("context_weights must be positive");
        if (!(context_blend >= 0.0 && context_blend <= 1.0))
            throw std::invalid_argument("context_blend must be in [0, 1]");
        if (!(lr_bmu > 0.0 && lr_bmu <= 1.0))
            throw std::invalid_argument("lr_bmu must be in (0, 1]");
        if (!(lr_neighbor > 0.0 && lr_neighbor <= 1.0))
            throw std::invalid_argument("lr_neighbor must be in (0, 1]");
        if (!(lr_context > 0.0 && lr_context <= 1.0))
            throw std::invalid_argument("lr_context must be in (0, 1]");
        if (!(hab_tau_bmu > 0.0) || !(hab_tau_neighbor > 0.0))
            throw std::invalid_argument("habituation taus must be positive");
        if (!(hab_kappa > 1.0))
            throw std::invalid_argument("hab_kappa must be > 1");
        if (max_edge_age < 1)
            throw std::invalid_argument("max_edge_age must be >= 1");
        if (!(removal_threshold >= 0.0 && removal_threshold <= 1.0))
            throw std::invalid_argument("removal_threshold must be in [0, 1]");
        if (!(label_delta_pos > 0.0))
            throw std::invalid_argument("label_delta_pos must be positive");
        if (!(label_delta_neg >= 0.0))
            throw std::invalid_argument("label_delta_neg must be >= 0");
    }
};

// Full dual-memory configuration: episodic net, semantic net, replay knobs.
struct GdmParams {
    GwrHyperParams em;
    GwrHyperParams sm;
    bool replay_enabled = true;
    bool replay_updates_temporal = true;
    // Pseudo-sequence window; 0 means the default em.K + sm.K + 1.
    int replay_window = 0;
    // Semantic input is the episodic BMU weight after adaptation (default) or before.
    bool sm_input_post_adapt = true;

    int effective_replay_window() const {
        return replay_window > 0 ? replay_window : em.context_count + sm.context_count + 1;
    }

    void validate() const {
        em.validate();
        sm.validate();
        if (replay_window < 0) throw std::invalid_argument("replay_window must be >= 0");
    }
};

// Named profiles. The two sets mirror the tuning used for one-shot batch
// training versus incremental (class-by-class) training.
inline GdmParams gdm_profile(const std::string& name, bool temporal_context = true) {
    GdmParams p;
    if (name == "batch") {
        p.em.insertion_threshold = 0.7;
        p.sm.insertion_threshold = 0.8;
        p.em.context_blend = p.sm.context_blend = 0.5;
        p.em.lr_bmu = p.sm.lr_bmu = 0.3;
        p.em.lr_neighbor = p.sm.lr_neighbor = 0.003;
    } else if (name == "incremental") {
        p.em.insertion_threshold = 0.5;
        p.sm.insertion_threshold = 0.7;
        p.em.context_blend = p.sm.context_blend = 0.4;
        p.em.lr_bmu = p.sm.lr_bmu = 0.5;
        p.em.lr_neighbor = p.sm.lr_neighbor = 0.005;
    } else {
        throw std::invalid_argument("unknown profile: " + name);
    }
    if (!temporal_context) {
        for (GwrHyperParams* q : {&p.em, &p.sm}) {
            q->context_count = 0;
            q->context_weights = {1.0};
        }
    }
    p.validate();
    return p;
}

}  // namespace gdm
