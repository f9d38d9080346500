#include "gdm/gamma_gwr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gdm/bmu.hpp"

namespace gdm {

GammaGwrNet::GammaGwrNet(int dim, GwrHyperParams p, const std::vector<std::vector<double>>& seeds)
    : params(std::move(p)), dim_(dim) {
    params.validate();
    if (dim_ < 1) throw std::invalid_argument("network dim must be >= 1");
    if (seeds.size() != 2) throw std::invalid_argument("network needs exactly two seed frames");
    const std::size_t stride = static_cast<std::size_t>(dim_) * (params.context_count + 1);
    for (const auto& s : seeds) {
        if (s.size() != static_cast<std::size_t>(dim_))
            throw std::invalid_argument("seed frame dimension mismatch");
        Neuron n;
        n.values.assign(stride, 0.0);
        std::copy(s.begin(), s.end(), n.values.begin());
        neurons.push_back(std::move(n));
    }
    edges.resize(2);
    temporal.resize(2);
    global_context.assign(static_cast<std::size_t>(dim_) * params.context_count, 0.0);
    input_stats.init(static_cast<std::size_t>(dim_));
}

void GammaGwrNet::check_index(int j) const {
    if (j < 0 || static_cast<std::size_t>(j) >= neurons.size())
        throw std::out_of_range("neuron index out of range");
}

void GammaGwrNet::update_global_context() {
    if (prev_bmu < 0) return;
    const Neuron& prev = neurons[static_cast<std::size_t>(prev_bmu)];
    const double beta = params.context_blend;
    const std::size_t n = static_cast<std::size_t>(dim_);
    // C_k derives from the previous BMU's stored weight and its (k-1)-th
    // stored context, not from the freshly shifted C_{k-1}.
    for (int k = params.context_count; k >= 1; --k) {
        const double* wk = prev.values.data();                                   // c_{b,0} == w_b
        const double* ck = prev.values.data() + static_cast<std::size_t>(k - 1) * n;
        double* out = global_context.data() + static_cast<std::size_t>(k - 1) * n;
        for (std::size_t i = 0; i < n; ++i) out[i] = beta * wk[i] + (1.0 - beta) * ck[i];
    }
}

BmuResult GammaGwrNet::find_bmu(const double* x) const {
    return find_bmu_with_context(x, global_context.data());
}

BmuResult GammaGwrNet::find_bmu_with_context(const double* x, const double* ctx) const {
    if (neurons.size() < 2) throw std::logic_error("find_bmu requires at least two neurons");
    BmuQuery q;
    q.x = x;
    q.ctx = ctx;
    q.alphas = params.context_weights.data();
    q.context_count = params.context_count;
    q.dim = dim_;
    q.metric = params.metric;
    q.scale = scale_.empty() ? nullptr : scale_.data();
    return find_bmu_auto(q, neurons, bmu_backend);
}

double GammaGwrNet::activation(double dist) { return std::exp(-dist); }

double GammaGwrNet::habituate_value(double h, double tau, double kappa) {
    const double next = h + tau * (kappa * (1.0 - h) - 1.0);
    return std::clamp(next, 0.0, 1.0);
}

void GammaGwrNet::adapt(int bmu, const double* x) {
    check_index(bmu);
    const std::size_t n = static_cast<std::size_t>(dim_);
    Neuron& b = neurons[static_cast<std::size_t>(bmu)];
    const double hb = b.habituation;
    double* w = b.values.data();
    for (std::size_t i = 0; i < n; ++i) w[i] += params.lr_bmu * hb * (x[i] - w[i]);
    for (int k = 1; k <= params.context_count; ++k) {
        double* c = b.values.data() + static_cast<std::size_t>(k) * n;
        const double* gc = global_context.data() + static_cast<std::size_t>(k - 1) * n;
        for (std::size_t i = 0; i < n; ++i) c[i] += params.lr_context * hb * (gc[i] - c[i]);
    }
    for (const auto& [nb, age] : edges[static_cast<std::size_t>(bmu)]) {
        (void)age;
        Neuron& m = neurons[static_cast<std::size_t>(nb)];
        const double hn = m.habituation;
        double* wn = m.values.data();
        for (std::size_t i = 0; i < n; ++i) wn[i] += params.lr_neighbor * hn * (x[i] - wn[i]);
        for (int k = 1; k <= params.context_count; ++k) {
            double* c = m.values.data() + static_cast<std::size_t>(k) * n;
            const double* gc = global_context.data() + static_cast<std::size_t>(k - 1) * n;
            for (std::size_t i = 0; i < n; ++i) c[i] += params.lr_neighbor * hn * (gc[i] - c[i]);
        }
    }
    b.habituation = habituate_value(hb, params.hab_tau_bmu, params.hab_kappa);
    for (const auto& [nb, age] : edges[static_cast<std::size_t>(bmu)]) {
        (void)age;
        Neuron& m = neurons[static_cast<std::size_t>(nb)];
        m.habituation = habituate_value(m.habituation, params.hab_tau_neighbor, params.hab_kappa);
    }
}

std::optional<int> GammaGwrNet::maybe_insert(int bmu, int second, double act, const double* x,
                                             GrowthGate gate, std::optional<int> category_label) {
    check_index(bmu);
    check_index(second);
    const Neuron& b = neurons[static_cast<std::size_t>(bmu)];
    if (!(act < params.insertion_threshold)) return std::nullopt;
    if (!(b.habituation < params.habituation_threshold)) return std::nullopt;
    if (gate == GrowthGate::require_misclassification) {
        if (!category_label.has_value()) return std::nullopt;
        if (predict_label(bmu, LabelLevel::category) == category_label) return std::nullopt;
    }

    const std::size_t n = static_cast<std::size_t>(dim_);
    Neuron fresh;
    fresh.values.resize(b.values.size());
    for (std::size_t i = 0; i < n; ++i) fresh.values[i] = 0.5 * (b.values[i] + x[i]);
    for (int k = 1; k <= params.context_count; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * n;
        const double* gc = global_context.data() + off - n;
        for (std::size_t i = 0; i < n; ++i)
            fresh.values[off + i] = 0.5 * (b.values[off + i] + gc[i]);
    }
    const int id = static_cast<int>(neurons.size());
    neurons.push_back(std::move(fresh));
    edges.emplace_back();
    temporal.emplace_back();

    edges[static_cast<std::size_t>(bmu)].erase(second);
    edges[static_cast<std::size_t>(second)].erase(bmu);
    edges[static_cast<std::size_t>(bmu)][id] = 0;
    edges[static_cast<std::size_t>(id)][bmu] = 0;
    edges[static_cast<std::size_t>(second)][id] = 0;
    edges[static_cast<std::size_t>(id)][second] = 0;
    return id;
}

void GammaGwrNet::age_incident_edges(int bmu, int skip) {
    for (auto& [nb, age] : edges[static_cast<std::size_t>(bmu)]) {
        if (nb == skip) continue;
        ++age;
        edges[static_cast<std::size_t>(nb)][bmu] = age;
    }
}

void GammaGwrNet::update_edges(int bmu, int partner) {
    check_index(bmu);
    check_index(partner);
    if (bmu == partner) throw std::invalid_argument("update_edges: self edge");
    age_incident_edges(bmu, partner);
    edges[static_cast<std::size_t>(bmu)][partner] = 0;
    edges[static_cast<std::size_t>(partner)][bmu] = 0;
}

void GammaGwrNet::update_temporal_link(int from, int to) {
    check_index(from);
    check_index(to);
    temporal[static_cast<std::size_t>(from)][to] += 1.0;
}

void GammaGwrNet::update_labels(int j, std::optional<int> instance_label,
                                std::optional<int> category_label) {
    check_index(j);
    Neuron& n = neurons[static_cast<std::size_t>(j)];
    auto bump = [this](std::map<int, double>& table, int label) {
        for (auto& [key, count] : table) {
            if (key == label) continue;
            count = std::max(0.0, count - params.label_delta_neg);
        }
        table[label] += params.label_delta_pos;
    };
    if (instance_label) bump(n.instance_counts, *instance_label);
    if (category_label) bump(n.category_counts, *category_label);
}

std::optional<int> GammaGwrNet::predict_label(int j, LabelLevel level) const {
    check_index(j);
    const Neuron& n = neurons[static_cast<std::size_t>(j)];
    const auto& table = level == LabelLevel::instance ? n.instance_counts : n.category_counts;
    if (table.empty()) return std::nullopt;
    int best = table.begin()->first;
    double best_count = table.begin()->second;
    for (const auto& [label, count] : table) {
        if (count > best_count) {  // ties keep the smallest label
            best = label;
            best_count = count;
        }
    }
    return best;
}

void GammaGwrNet::prune() {
    const bool classic = params.removal_threshold >= 1.0;
    const std::size_t count = neurons.size();

    for (std::size_t j = 0; j < count; ++j) {
        auto& adj = edges[j];
        bool remove_overage = classic || neurons[j].habituation >= params.removal_threshold;
        for (auto it = adj.begin(); it != adj.end();) {
            if (it->second <= params.max_edge_age) {
                ++it;
                continue;
            }
            if (remove_overage) {
                edges[static_cast<std::size_t>(it->first)].erase(static_cast<int>(j));
                it = adj.erase(it);
            } else {
                it->second = 0;
                edges[static_cast<std::size_t>(it->first)][static_cast<int>(j)] = 0;
                ++it;
            }
        }
    }

    std::vector<bool> drop(count, false);
    std::size_t remaining = count;
    for (std::size_t j = 0; j < count && remaining > 2; ++j) {
        if (!edges[j].empty()) continue;
        if (!classic && neurons[j].habituation < params.removal_threshold) continue;
        drop[j] = true;
        --remaining;
    }
    if (remaining == count) return;

    std::vector<int> remap(count, -1);
    int next = 0;
    for (std::size_t j = 0; j < count; ++j)
        if (!drop[j]) remap[j] = next++;

    std::vector<Neuron> kept_neurons;
    std::vector<std::map<int, int>> kept_edges;
    std::vector<std::map<int, double>> kept_temporal;
    kept_neurons.reserve(remaining);
    kept_edges.reserve(remaining);
    kept_temporal.reserve(remaining);
    for (std::size_t j = 0; j < count; ++j) {
        if (drop[j]) continue;
        kept_neurons.push_back(std::move(neurons[j]));
        std::map<int, int> adj;
        for (const auto& [nb, age] : edges[j])
            if (remap[static_cast<std::size_t>(nb)] >= 0)
                adj[remap[static_cast<std::size_t>(nb)]] = age;
        kept_edges.push_back(std::move(adj));
        std::map<int, double> row;
        for (const auto& [to, v] : temporal[j])
            if (remap[static_cast<std::size_t>(to)] >= 0)
                row[remap[static_cast<std::size_t>(to)]] = v;
        kept_temporal.push_back(std::move(row));
    }
    neurons = std::move(kept_neurons);
    edges = std::move(kept_edges);
    temporal = std::move(kept_temporal);
    prev_bmu = prev_bmu >= 0 ? remap[static_cast<std::size_t>(prev_bmu)] : -1;
}

void GammaGwrNet::refresh_scale() {
    if (params.metric == MetricKind::mahalanobis_diagonal)
        input_stats.variances(scale_);
}

StepOutcome GammaGwrNet::step(const double* x, std::optional<int> instance_label,
                              std::optional<int> category_label, GrowthGate gate) {
    update_global_context();
    if (params.metric == MetricKind::mahalanobis_diagonal) {
        input_stats.add(x);
        refresh_scale();
    }

    const BmuResult bmu = find_bmu(x);
    StepOutcome out;
    out.bmu = bmu.best;
    out.second = bmu.second;
    out.dist = bmu.d_best;
    out.act = activation(bmu.d_best);
    out.predicted_instance = predict_label(bmu.best, LabelLevel::instance);
    out.predicted_category = predict_label(bmu.best, LabelLevel::category);

    out.inserted = maybe_insert(bmu.best, bmu.second, out.act, x, gate, category_label);
    if (out.inserted) {
        out.winner = *out.inserted;
        age_incident_edges(bmu.best, *out.inserted);
    } else {
        out.winner = bmu.best;
        adapt(bmu.best, x);
        update_edges(bmu.best, bmu.second);
    }

    if (record_temporal && prev_bmu >= 0) update_temporal_link(prev_bmu, out.winner);
    update_labels(out.winner, instance_label, category_label);
    prev_bmu = out.winner;
    ++step_count;
    return out;
}

void GammaGwrNet::reset_context() {
    std::fill(global_context.begin(), global_context.end(), 0.0);
    prev_bmu = -1;
}

std::uint64_t GammaGwrNet::edge_count() const {
    std::uint64_t twice = 0;
    for (const auto& adj : edges) twice += adj.size();
    return twice / 2;
}

}  // namespace gdm
