#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gdm {

struct FeatureFrame {
    int sequence_id = 0;
    int frame_index = 0;
    std::optional<int> category;
    std::optional<int> instance;
    std::vector<double> values;
};

struct Sequence {
    int sequence_id = 0;
    int collection = 0;
    std::vector<FeatureFrame> frames;

    std::optional<int> category() const {
        return frames.empty() ? std::nullopt : frames.front().category;
    }
    std::optional<int> instance() const {
        return frames.empty() ? std::nullopt : frames.front().instance;
    }
};

struct Dataset {
    int dim = 0;
    int collections = 0;
    int train_collections = 0;
    std::vector<Sequence> sequences;

    std::vector<const Sequence*> train_sequences() const;
    std::vector<const Sequence*> test_sequences() const;
    std::vector<int> categories() const;  // sorted, training split
    std::size_t frame_count() const;
};

struct AugmentationSpec {
    // Per-dimension gaussian noise, in units of intra_sigma; each collection
    // draws its own strength factor in [0.5, 1.5] of this.
    double noise_sigma = 0.05;
    double drop_prob = 0.0;    // chance a frame is dropped from a sequence
    int occlusion_block = 0;   // contiguous zeroed coordinates per sequence
};

// Shape and difficulty of the synthetic corpus. Category prototypes sit on a
// hypersphere with a guaranteed pairwise separation of `separation` units of
// intra_sigma; instances offset the prototype, and each sequence follows a
// smooth sinusoidal trajectory in a random low-dimensional subspace.
struct CollectionSpec {
    int categories = 10;
    int instances_per_category = 5;
    int frames_per_sequence = 15;
    int collections = 15;
    int train_collections = 12;
    int dim = 256;
    double intra_sigma = 0.05;
    double separation = 6.0;
    double radius = 0.4;
    double instance_offset = 1.5;    // units of intra_sigma
    double trajectory_amp = 0.35;    // per-direction amplitude, units of intra_sigma
    int trajectory_dims = 4;
    AugmentationSpec augmentation;
    std::uint64_t seed = 1;

    void validate() const;
};

// Deterministic for a given spec. Throws if the requested separation cannot
// be met (too many categories for the sphere).
Dataset generate_dataset(const CollectionSpec& spec);

// Serialized feature-stream format, one file per collection. Binary layout:
//   magic "GDMF" | u32 version=1 | u32 dim | u64 frame_count |
//   repeated { i32 sequence_id | i32 frame_index | i32 category | i32 instance
//              | dim * f64 }
// with -1 encoding an absent label. The text variant is CSV with an initial
// "GDMFTEXT,1,<dim>" line and the same columns per row.
void write_gdmf_file(const std::string& path, int dim,
                     const std::vector<const Sequence*>& sequences, bool text = false);

// Sniffs binary vs text by the magic bytes. Errors carry byte offsets (binary)
// or 1-based row numbers (text).
std::vector<Sequence> read_gdmf_file(const std::string& path, int& dim_out);

// Loads collection files in the given order; collection index = position.
Dataset load_dataset(const std::vector<std::string>& paths, int train_collections);

}  // namespace gdm
