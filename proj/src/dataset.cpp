#include "gdm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gdm/rng.hpp"

namespace gdm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<double> unit_direction(Rng& rng, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    while (norm == 0.0) {
        for (auto& x : v) x = rng.gaussian();
        norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
    }
    for (auto& x : v) x /= norm;
    return v;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

std::vector<const Sequence*> Dataset::train_sequences() const {
    std::vector<const Sequence*> out;
    for (const auto& s : sequences)
        if (s.collection < train_collections) out.push_back(&s);
    return out;
}

std::vector<const Sequence*> Dataset::test_sequences() const {
    std::vector<const Sequence*> out;
    for (const auto& s : sequences)
        if (s.collection >= train_collections) out.push_back(&s);
    return out;
}

std::vector<int> Dataset::categories() const {
    std::set<int> cats;
    for (const auto& s : sequences)
        if (s.collection < train_collections && s.category()) cats.insert(*s.category());
    return {cats.begin(), cats.end()};
}

std::size_t Dataset::frame_count() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.frames.size();
    return n;
}

void CollectionSpec::validate() const {
    if (categories < 1) throw std::invalid_argument("categories must be >= 1");
    if (instances_per_category < 1) throw std::invalid_argument("instances_per_category must be >= 1");
    if (frames_per_sequence < 2) throw std::invalid_argument("frames_per_sequence must be >= 2");
    if (collections < 1) throw std::invalid_argument("collections must be >= 1");
    if (train_collections < 1 || train_collections > collections)
        throw std::invalid_argument("train_collections must be in [1, collections]");
    if (dim < 2) throw std::invalid_argument("dim must be >= 2");
    if (!(intra_sigma > 0.0)) throw std::invalid_argument("intra_sigma must be positive");
    if (!(separation > 0.0)) throw std::invalid_argument("separation must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    if (trajectory_dims < 1 || trajectory_dims > dim)
        throw std::invalid_argument("trajectory_dims must be in [1, dim]");
    if (!(augmentation.noise_sigma >= 0.0))
        throw std::invalid_argument("noise_sigma must be >= 0");
    if (!(augmentation.drop_prob >= 0.0 && augmentation.drop_prob < 1.0))
        throw std::invalid_argument("drop_prob must be in [0, 1)");
    if (augmentation.occlusion_block < 0 || augmentation.occlusion_block > dim)
        throw std::invalid_argument("occlusion_block must be in [0, dim]");
}

Dataset generate_dataset(const CollectionSpec& spec) {
    spec.validate();
    const int n = spec.dim;
    const double min_sep = spec.separation * spec.intra_sigma;

    Rng proto_rng(mix_seed(spec.seed, 0));
    std::vector<std::vector<double>> category_protos;
    for (int c = 0; c < spec.categories; ++c) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            auto dir = unit_direction(proto_rng, n);
            for (auto& x : dir) x *= spec.radius;
            placed = true;
            for (const auto& other : category_protos)
                if (euclidean(dir, other) < min_sep) {
                    placed = false;
                    break;
                }
            if (placed) category_protos.push_back(std::move(dir));
        }
        if (!placed)
            throw std::runtime_error(
                "cannot place category prototypes at the requested separation; "
                "reduce categories/separation or increase dim/radius");
    }

    Rng inst_rng(mix_seed(spec.seed, 1));
    std::vector<std::vector<double>> instance_protos;
    instance_protos.reserve(static_cast<std::size_t>(spec.categories) *
                            spec.instances_per_category);
    for (int c = 0; c < spec.categories; ++c)
        for (int i = 0; i < spec.instances_per_category; ++i) {
            auto dir = unit_direction(inst_rng, n);
            auto p = category_protos[static_cast<std::size_t>(c)];
            const double off = spec.instance_offset * spec.intra_sigma;
            for (int d = 0; d < n; ++d)
                p[static_cast<std::size_t>(d)] += off * dir[static_cast<std::size_t>(d)];
            instance_protos.push_back(std::move(p));
        }

    Dataset ds;
    ds.dim = n;
    ds.collections = spec.collections;
    ds.train_collections = spec.train_collections;

    for (int coll = 0; coll < spec.collections; ++coll) {
        Rng coll_rng(mix_seed(spec.seed, 100 + static_cast<std::uint64_t>(coll)));
        const double noise_factor = coll_rng.uniform(0.5, 1.5);
        const double noise_sd = spec.augmentation.noise_sigma * spec.intra_sigma * noise_factor;

        for (int c = 0; c < spec.categories; ++c) {
            for (int i = 0; i < spec.instances_per_category; ++i) {
                const int seq_uid =
                    (coll * spec.categories + c) * spec.instances_per_category + i;
                Rng rng(mix_seed(spec.seed, 1000 + static_cast<std::uint64_t>(seq_uid)));
                const auto& base =
                    instance_protos[static_cast<std::size_t>(c * spec.instances_per_category + i)];

                // Random orthonormal trajectory subspace (Gram-Schmidt).
                std::vector<std::vector<double>> axes;
                for (int m = 0; m < spec.trajectory_dims; ++m) {
                    auto v = unit_direction(rng, n);
                    for (const auto& a : axes) {
                        double dot = 0.0;
                        for (int d = 0; d < n; ++d)
                            dot += v[static_cast<std::size_t>(d)] * a[static_cast<std::size_t>(d)];
                        for (int d = 0; d < n; ++d)
                            v[static_cast<std::size_t>(d)] -= dot * a[static_cast<std::size_t>(d)];
                    }
                    double norm = 0.0;
                    for (double x : v) norm += x * x;
                    norm = std::sqrt(norm);
                    if (norm < 1e-9) {
                        --m;
                        continue;
                    }
                    for (auto& x : v) x /= norm;
                    axes.push_back(std::move(v));
                }
                std::vector<double> omega(axes.size()), phase(axes.size());
                for (std::size_t m = 0; m < axes.size(); ++m) {
                    omega[m] = rng.uniform(0.25, 0.6);
                    phase[m] = rng.uniform(0.0, kTwoPi);
                }
                const double amp = spec.trajectory_amp * spec.intra_sigma;

                int occl_start = -1;
                if (spec.augmentation.occlusion_block > 0)
                    occl_start = static_cast<int>(
                        rng.index(static_cast<std::size_t>(n - spec.augmentation.occlusion_block + 1)));

                Sequence seq;
                seq.sequence_id = seq_uid;
                seq.collection = coll;
                for (int t = 0; t < spec.frames_per_sequence; ++t) {
                    FeatureFrame f;
                    f.sequence_id = seq_uid;
                    f.category = c;
                    f.instance = c * spec.instances_per_category + i;
                    f.values = base;
                    for (std::size_t m = 0; m < axes.size(); ++m) {
                        const double s = amp * std::sin(omega[m] * t + phase[m]);
                        for (int d = 0; d < n; ++d)
                            f.values[static_cast<std::size_t>(d)] +=
                                s * axes[m][static_cast<std::size_t>(d)];
                    }
                    if (noise_sd > 0.0)
                        for (auto& x : f.values) x += noise_sd * rng.gaussian();
                    if (occl_start >= 0)
                        for (int d = 0; d < spec.augmentation.occlusion_block; ++d)
                            f.values[static_cast<std::size_t>(occl_start + d)] = 0.0;
                    const bool dropped = spec.augmentation.drop_prob > 0.0 &&
                                         rng.uniform() < spec.augmentation.drop_prob;
                    if (!dropped || t < 2) seq.frames.push_back(std::move(f));
                }
                for (std::size_t t = 0; t < seq.frames.size(); ++t)
                    seq.frames[t].frame_index = static_cast<int>(t);
                ds.sequences.push_back(std::move(seq));
            }
        }
    }
    return ds;
}

// --- GDMF serialization ----------------------------------------------------

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    out.write(b, 8);
}

void put_i32(std::ostream& out, std::int32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.write(b, 4);
}

struct BinReader {
    std::ifstream in;
    std::string path;
    std::uint64_t offset = 0;

    void read(void* dst, std::size_t len, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(len));
        if (static_cast<std::size_t>(in.gcount()) != len)
            throw std::runtime_error(path + ": truncated " + what + " at byte " +
                                     std::to_string(offset));
        offset += len;
    }

    std::uint32_t u32(const char* what) {
        std::uint32_t v;
        read(&v, 4, what);
        return v;
    }

    std::uint64_t u64(const char* what) {
        std::uint64_t v;
        read(&v, 8, what);
        return v;
    }

    std::int32_t i32(const char* what) {
        std::int32_t v;
        read(&v, 4, what);
        return v;
    }
};

std::vector<Sequence> group_frames(std::vector<FeatureFrame>&& frames, const std::string& path) {
    std::vector<Sequence> seqs;
    std::set<int> seen;
    for (auto& f : frames) {
        if (seqs.empty() || seqs.back().sequence_id != f.sequence_id) {
            if (!seen.insert(f.sequence_id).second)
                throw std::runtime_error(path + ": sequence " + std::to_string(f.sequence_id) +
                                         " is not contiguous");
            Sequence s;
            s.sequence_id = f.sequence_id;
            seqs.push_back(std::move(s));
        } else if (f.frame_index <= seqs.back().frames.back().frame_index) {
            throw std::runtime_error(path + ": frame_index not increasing in sequence " +
                                     std::to_string(f.sequence_id));
        }
        seqs.back().frames.push_back(std::move(f));
    }
    return seqs;
}

}  // namespace

void write_gdmf_file(const std::string& path, int dim,
                     const std::vector<const Sequence*>& sequences, bool text) {
    std::ofstream out(path, text ? std::ios::out : (std::ios::out | std::ios::binary));
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    std::uint64_t frames = 0;
    for (const auto* s : sequences) frames += s->frames.size();

    if (text) {
        out << "GDMFTEXT,1," << dim << "\n";
        char buf[32];
        for (const auto* s : sequences)
            for (const auto& f : s->frames) {
                out << f.sequence_id << ',' << f.frame_index << ','
                    << (f.category ? *f.category : -1) << ',' << (f.instance ? *f.instance : -1);
                for (double v : f.values) {
                    std::snprintf(buf, sizeof(buf), "%.17g", v);
                    out << ',' << buf;
                }
                out << '\n';
            }
    } else {
        out.write("GDMF", 4);
        put_u32(out, 1);
        put_u32(out, static_cast<std::uint32_t>(dim));
        put_u64(out, frames);
        for (const auto* s : sequences)
            for (const auto& f : s->frames) {
                if (f.values.size() != static_cast<std::size_t>(dim))
                    throw std::invalid_argument("frame dimension mismatch while writing " + path);
                put_i32(out, f.sequence_id);
                put_i32(out, f.frame_index);
                put_i32(out, f.category ? *f.category : -1);
                put_i32(out, f.instance ? *f.instance : -1);
                out.write(reinterpret_cast<const char*>(f.values.data()),
                          static_cast<std::streamsize>(sizeof(double) * f.values.size()));
            }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<Sequence> read_gdmf_text(std::ifstream&& in, const std::string& path, int& dim_out) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    int version = 0, dim = 0;
    if (std::sscanf(line.c_str(), "GDMFTEXT,%d,%d", &version, &dim) != 2)
        throw std::runtime_error(path + ": row 1: bad GDMFTEXT header");
    if (version != 1) throw std::runtime_error(path + ": unsupported text version");
    if (dim < 1) throw std::runtime_error(path + ": row 1: bad dim");
    dim_out = dim;

    std::vector<FeatureFrame> frames;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != static_cast<std::size_t>(dim) + 4)
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                                     std::to_string(dim + 4) + " fields, got " +
                                     std::to_string(fields.size()));
        FeatureFrame f;
        try {
            f.sequence_id = std::stoi(fields[0]);
            f.frame_index = std::stoi(fields[1]);
            const int cat = std::stoi(fields[2]);
            const int inst = std::stoi(fields[3]);
            if (cat >= 0) f.category = cat;
            if (inst >= 0) f.instance = inst;
            f.values.resize(static_cast<std::size_t>(dim));
            for (int d = 0; d < dim; ++d)
                f.values[static_cast<std::size_t>(d)] = std::stod(fields[static_cast<std::size_t>(d) + 4]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": bad numeric field");
        }
        frames.push_back(std::move(f));
    }
    return group_frames(std::move(frames), path);
}

}  // namespace

std::vector<Sequence> read_gdmf_file(const std::string& path, int& dim_out) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open: " + path);
    char magic[8] = {0};
    probe.read(magic, 8);
    probe.close();

    if (std::memcmp(magic, "GDMFTEXT", 8) == 0)
        return read_gdmf_text(std::ifstream(path), path, dim_out);
    if (std::memcmp(magic, "GDMF", 4) != 0)
        throw std::runtime_error(path + ": bad magic, not a GDMF file");

    BinReader r{std::ifstream(path, std::ios::binary), path, 0};
    char m[4];
    r.read(m, 4, "magic");
    const std::uint32_t version = r.u32("version");
    if (version != 1)
        throw std::runtime_error(path + ": unsupported GDMF version " + std::to_string(version));
    const std::uint32_t dim = r.u32("dim");
    if (dim < 1 || dim > (1u << 20)) throw std::runtime_error(path + ": implausible dim");
    const std::uint64_t count = r.u64("frame count");
    dim_out = static_cast<int>(dim);

    std::vector<FeatureFrame> frames;
    frames.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        FeatureFrame f;
        f.sequence_id = r.i32("frame record");
        f.frame_index = r.i32("frame record");
        const std::int32_t cat = r.i32("frame record");
        const std::int32_t inst = r.i32("frame record");
        if (cat >= 0) f.category = cat;
        if (inst >= 0) f.instance = inst;
        f.values.resize(dim);
        r.read(f.values.data(), sizeof(double) * dim, "frame values");
        frames.push_back(std::move(f));
    }
    return group_frames(std::move(frames), path);
}

Dataset load_dataset(const std::vector<std::string>& paths, int train_collections) {
    if (paths.empty()) throw std::invalid_argument("no dataset files given");
    Dataset ds;
    ds.collections = static_cast<int>(paths.size());
    ds.train_collections = train_collections;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        int dim = 0;
        auto seqs = read_gdmf_file(paths[i], dim);
        if (ds.dim == 0) ds.dim = dim;
        if (dim != ds.dim)
            throw std::runtime_error(paths[i] + ": dim " + std::to_string(dim) +
                                     " differs from " + std::to_string(ds.dim));
        for (auto& s : seqs) {
            s.collection = static_cast<int>(i);
            ds.sequences.push_back(std::move(s));
        }
    }
    if (train_collections < 1 || train_collections > ds.collections)
        throw std::invalid_argument("train_collections out of range for dataset");
    return ds;
}

}  // namespace gdm
