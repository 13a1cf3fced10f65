#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hwy/matrix.hpp"
#include "hwy/rng.hpp"

namespace hwy {

struct Dataset {
    Matrix features;           // n x d, values in [0, 1] after normalization
    std::vector<int> labels;   // length n, each in [0, class_count)
    int class_count = 0;
    std::string split = "train";

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
};

/// Reads an IDX image/label pair (big-endian, magics 0x00000803/0x00000801).
/// Pixels are scaled to [0, 1] by /255, images flattened row-major.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Inverse of load_idx for byte-quantized features; used for fixtures and
/// round-trip checks.
void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path);

/// Deterministic stratified subsample of n rows (proportional per-class
/// quotas, largest remainder). n == ds.size() returns a permutation of ds.
Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed);

/// Average-pool spatial downsampling by `factor` (features must be square
/// images whose side `factor` divides).
Dataset downsample(const Dataset& ds, int factor);

/// Uniform random bit strings labeled by their XOR. Class count 2.
Dataset gen_parity(int n_bits, std::size_t n_samples, std::uint64_t seed);
/// All 2^n_bits strings, enumerated (bit j of row i is bit j of i).
Dataset gen_parity_full(int n_bits);

/// Head/tail split; the validation set is the last `val_n` rows.
std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, std::size_t val_n);

struct BatchPlan {
    std::size_t batch_size = 64;
    std::uint64_t shuffle_seed = 0;
};

/// Shuffled minibatch index lists for one epoch. The permutation depends
/// only on (shuffle_seed, epoch); the last batch may be short.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, const BatchPlan& plan,
                                                    int epoch);

struct Batch {
    Matrix x;
    std::vector<int> labels;
};

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices);

/// Where a run's dataset comes from; persisted with the run so any record
/// can be reproduced from its config alone.
struct DatasetRef {
    std::string kind = "idx"; // "idx" | "parity"
    // idx
    std::string dir;    // directory holding the standard train file names
    std::string images; // explicit paths win over dir
    std::string labels;
    std::size_t subsample_n = 0; // 0 = keep all rows
    std::uint64_t subsample_seed = 0;
    int downsample_factor = 1;
    // parity
    int parity_bits = 4;
    std::size_t parity_samples = 0; // 0 = exhaustive enumeration
    std::uint64_t parity_seed = 0;
    // common
    std::size_t val_split = 0; // rows held out from the tail

    void validate() const;
};

struct ResolvedData {
    Dataset train;
    std::vector<Dataset> val; // empty or one element
};

/// Materializes the reference: load (or generate), then subsample, then
/// downsample, then split off the validation tail. `default_dir` backs an
/// idx ref with no dir/paths of its own.
ResolvedData resolve_dataset(const DatasetRef& ref, const std::string& default_dir);

} // namespace hwy
