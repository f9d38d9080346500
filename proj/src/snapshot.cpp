#include "gdm/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gdm {

namespace {

constexpr char kMagic[4] = {'G', 'D', 'M', 'S'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* p, std::size_t len) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
        written_ += len;
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void i32(std::int32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void f64s(const double* p, std::size_t n) { bytes(p, n * sizeof(double)); }

    std::uint64_t written() const { return written_; }

private:
    std::ostream& out_;
    std::uint64_t written_ = 0;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw std::runtime_error("cannot open: " + path);
    }

    void bytes(void* p, std::size_t len, const char* what) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(in_.gcount()) != len)
            throw std::runtime_error(path_ + ": truncated " + what + " at byte " +
                                     std::to_string(offset_));
        offset_ += len;
    }
    std::uint8_t u8(const char* what) { std::uint8_t v; bytes(&v, 1, what); return v; }
    std::uint32_t u32(const char* what) { std::uint32_t v; bytes(&v, 4, what); return v; }
    std::int32_t i32(const char* what) { std::int32_t v; bytes(&v, 4, what); return v; }
    std::uint64_t u64(const char* what) { std::uint64_t v; bytes(&v, 8, what); return v; }
    double f64(const char* what) { double v; bytes(&v, 8, what); return v; }
    void f64s(double* p, std::size_t n, const char* what) { bytes(p, n * sizeof(double), what); }

private:
    std::ifstream in_;
    std::string path_;
    std::uint64_t offset_ = 0;
};

void write_params(Writer& w, const GwrHyperParams& p) {
    w.f64(p.insertion_threshold);
    w.f64(p.habituation_threshold);
    w.f64(p.context_blend);
    w.f64(p.lr_bmu);
    w.f64(p.lr_neighbor);
    w.f64(p.lr_context);
    w.f64(p.hab_tau_bmu);
    w.f64(p.hab_tau_neighbor);
    w.f64(p.hab_kappa);
    w.f64(p.removal_threshold);
    w.f64(p.label_delta_pos);
    w.f64(p.label_delta_neg);
    w.i32(p.context_count);
    w.i32(p.max_edge_age);
    w.u8(static_cast<std::uint8_t>(p.metric));
    w.u32(static_cast<std::uint32_t>(p.context_weights.size()));
    w.f64s(p.context_weights.data(), p.context_weights.size());
}

GwrHyperParams read_params(Reader& r) {
    GwrHyperParams p;
    p.insertion_threshold = r.f64("params");
    p.habituation_threshold = r.f64("params");
    p.context_blend = r.f64("params");
    p.lr_bmu = r.f64("params");
    p.lr_neighbor = r.f64("params");
    p.lr_context = r.f64("params");
    p.hab_tau_bmu = r.f64("params");
    p.hab_tau_neighbor = r.f64("params");
    p.hab_kappa = r.f64("params");
    p.removal_threshold = r.f64("params");
    p.label_delta_pos = r.f64("params");
    p.label_delta_neg = r.f64("params");
    p.context_count = r.i32("params");
    p.max_edge_age = r.i32("params");
    const std::uint8_t metric = r.u8("params");
    if (metric > static_cast<std::uint8_t>(MetricKind::mahalanobis_diagonal))
        throw std::runtime_error("snapshot: bad metric id");
    p.metric = static_cast<MetricKind>(metric);
    const std::uint32_t alphas = r.u32("params");
    p.context_weights.resize(alphas);
    r.f64s(p.context_weights.data(), alphas, "params");
    return p;
}

void write_table(Writer& w, const std::map<int, double>& table) {
    w.u32(static_cast<std::uint32_t>(table.size()));
    for (const auto& [label, count] : table) {
        w.i32(label);
        w.f64(count);
    }
}

std::map<int, double> read_table(Reader& r) {
    std::map<int, double> table;
    const std::uint32_t n = r.u32("label table");
    for (std::uint32_t i = 0; i < n; ++i) {
        const int label = r.i32("label table");
        table[label] = r.f64("label table");
    }
    return table;
}

void write_net(Writer& w, const GammaGwrNet& net) {
    w.u32(static_cast<std::uint32_t>(net.dim()));
    write_params(w, net.params);
    w.u32(static_cast<std::uint32_t>(net.size()));
    for (const auto& n : net.neurons) {
        w.f64s(n.values.data(), n.values.size());
        w.f64(n.habituation);
        write_table(w, n.instance_counts);
        write_table(w, n.category_counts);
    }
    std::uint64_t edge_records = 0;
    for (std::size_t i = 0; i < net.edges.size(); ++i)
        for (const auto& [j, age] : net.edges[i]) {
            (void)age;
            if (static_cast<int>(i) < j) ++edge_records;
        }
    w.u64(edge_records);
    for (std::size_t i = 0; i < net.edges.size(); ++i)
        for (const auto& [j, age] : net.edges[i])
            if (static_cast<int>(i) < j) {
                w.u32(static_cast<std::uint32_t>(i));
                w.u32(static_cast<std::uint32_t>(j));
                w.i32(age);
            }
    std::uint64_t link_records = 0;
    for (const auto& row : net.temporal) link_records += row.size();
    w.u64(link_records);
    for (std::size_t i = 0; i < net.temporal.size(); ++i)
        for (const auto& [j, v] : net.temporal[i]) {
            w.u32(static_cast<std::uint32_t>(i));
            w.u32(static_cast<std::uint32_t>(j));
            w.f64(v);
        }
    w.f64s(net.global_context.data(), net.global_context.size());
    w.i32(net.prev_bmu);
    w.u64(net.step_count);
    w.u64(net.input_stats.count);
    w.f64s(net.input_stats.mean.data(), net.input_stats.mean.size());
    w.f64s(net.input_stats.m2.data(), net.input_stats.m2.size());
}

GammaGwrNet read_net(Reader& r) {
    const std::uint32_t dim = r.u32("net dim");
    if (dim < 1 || dim > (1u << 20)) throw std::runtime_error("snapshot: implausible dim");
    GwrHyperParams params = read_params(r);
    params.validate();

    const std::size_t stride = static_cast<std::size_t>(dim) * (params.context_count + 1);
    std::vector<std::vector<double>> seeds(2, std::vector<double>(dim, 0.0));
    GammaGwrNet net(static_cast<int>(dim), params, seeds);

    const std::uint32_t count = r.u32("neuron count");
    if (count < 2) throw std::runtime_error("snapshot: fewer than two neurons");
    net.neurons.assign(count, Neuron{});
    for (auto& n : net.neurons) {
        n.values.resize(stride);
        r.f64s(n.values.data(), stride, "neuron values");
        n.habituation = r.f64("habituation");
        n.instance_counts = read_table(r);
        n.category_counts = read_table(r);
    }
    net.edges.assign(count, {});
    const std::uint64_t edge_records = r.u64("edge count");
    for (std::uint64_t e = 0; e < edge_records; ++e) {
        const std::uint32_t i = r.u32("edge");
        const std::uint32_t j = r.u32("edge");
        const std::int32_t age = r.i32("edge");
        if (i >= count || j >= count || i == j) throw std::runtime_error("snapshot: bad edge");
        net.edges[i][static_cast<int>(j)] = age;
        net.edges[j][static_cast<int>(i)] = age;
    }
    net.temporal.assign(count, {});
    const std::uint64_t link_records = r.u64("temporal count");
    for (std::uint64_t e = 0; e < link_records; ++e) {
        const std::uint32_t i = r.u32("temporal");
        const std::uint32_t j = r.u32("temporal");
        const double v = r.f64("temporal");
        if (i >= count || j >= count) throw std::runtime_error("snapshot: bad temporal link");
        net.temporal[i][static_cast<int>(j)] = v;
    }
    r.f64s(net.global_context.data(), net.global_context.size(), "global context");
    net.prev_bmu = r.i32("prev bmu");
    if (net.prev_bmu < -1 || net.prev_bmu >= static_cast<int>(count))
        throw std::runtime_error("snapshot: bad prev bmu");
    net.step_count = r.u64("step count");
    net.input_stats.init(dim);
    net.input_stats.count = r.u64("input stats");
    r.f64s(net.input_stats.mean.data(), dim, "input stats");
    r.f64s(net.input_stats.m2.data(), dim, "input stats");
    return net;
}

}  // namespace

void save_model(const std::string& path, const GdmModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    Writer w(out);
    w.bytes(kMagic, 4);
    w.u32(kVersion);
    std::uint8_t flags = 0;
    if (model.params.replay_enabled) flags |= 1;
    if (model.params.replay_updates_temporal) flags |= 2;
    if (model.params.sm_input_post_adapt) flags |= 4;
    w.u8(flags);
    w.i32(model.params.replay_window);
    write_net(w, model.em);
    write_net(w, model.sm);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::uint64_t serialized_net_bytes(const GammaGwrNet& net) {
    std::ostringstream sink;
    Writer w(sink);
    write_net(w, net);
    return w.written();
}

GdmModel load_model(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic, not a model snapshot");
    const std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported snapshot version " +
                                 std::to_string(version));
    const std::uint8_t flags = r.u8("flags");
    GdmParams params;
    params.replay_enabled = flags & 1;
    params.replay_updates_temporal = flags & 2;
    params.sm_input_post_adapt = flags & 4;
    params.replay_window = r.i32("replay window");

    GammaGwrNet em = read_net(r);
    GammaGwrNet sm = read_net(r);
    if (em.dim() != sm.dim()) throw std::runtime_error(path + ": network dim mismatch");
    params.em = em.params;
    params.sm = sm.params;

    std::vector<std::vector<double>> seeds(2, std::vector<double>(em.dim(), 0.0));
    GdmModel model(em.dim(), params, seeds);
    model.em = std::move(em);
    model.sm = std::move(sm);
    return model;
}

}  // namespace gdm
