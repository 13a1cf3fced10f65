#include "hwy/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace hwy {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw TruncatedFileError(path + ": truncated header");
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

void shuffle_indices(std::vector<std::size_t>& idx, RngState& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open " + images_path);
    const std::uint32_t img_magic = read_be_u32(img, images_path);
    if (img_magic != kImageMagic) {
        throw BadMagicError(images_path + ": bad magic " + hex32(img_magic) + ", expected " +
                            hex32(kImageMagic));
    }
    const std::uint32_t n = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open " + labels_path);
    const std::uint32_t lab_magic = read_be_u32(lab, labels_path);
    if (lab_magic != kLabelMagic) {
        throw BadMagicError(labels_path + ": bad magic " + hex32(lab_magic) + ", expected " +
                            hex32(kLabelMagic));
    }
    const std::uint32_t n_lab = read_be_u32(lab, labels_path);
    if (n != n_lab) {
        throw CountMismatchError(images_path + " has " + std::to_string(n) + " images but " +
                                 labels_path + " has " + std::to_string(n_lab) + " labels");
    }

    const std::size_t d = std::size_t(rows) * cols;
    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);

    std::vector<unsigned char> buf(d);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d))) {
            throw TruncatedFileError(images_path + ": truncated at image " + std::to_string(i));
        }
        double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = buf[j] / 255.0;
    }
    std::vector<unsigned char> lbuf(n);
    if (!lab.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(n))) {
        throw TruncatedFileError(labels_path + ": truncated label block");
    }
    int max_label = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        ds.labels[i] = lbuf[i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.class_count = max_label + 1;
    return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path,
               const std::string& labels_path) {
    const std::size_t d = ds.dim();
    const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(double(d))));
    std::uint32_t rows = side, cols = side;
    if (std::size_t(side) * side != d) {
        rows = 1;
        cols = static_cast<std::uint32_t>(d);
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot write " + images_path);
    write_be_u32(img, kImageMagic);
    write_be_u32(img, static_cast<std::uint32_t>(ds.size()));
    write_be_u32(img, rows);
    write_be_u32(img, cols);
    std::vector<unsigned char> buf(d);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            const long v = std::lround(row[j] * 255.0);
            buf[j] = static_cast<unsigned char>(std::clamp(v, 0L, 255L));
        }
        img.write(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d));
    }
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot write " + labels_path);
    write_be_u32(lab, kLabelMagic);
    write_be_u32(lab, static_cast<std::uint32_t>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        lab.put(static_cast<char>(static_cast<unsigned char>(ds.labels[i])));
    }
}

Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed) {
    if (n > ds.size()) {
        throw UsageError("subsample: requested " + std::to_string(n) + " of " +
                         std::to_string(ds.size()) + " rows");
    }
    const std::size_t k = static_cast<std::size_t>(ds.class_count);
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    // Proportional quotas via largest remainder, ties to the lower class.
    std::vector<std::size_t> quota(k, 0);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(n) * by_class[c].size() / ds.size();
        quota[c] = static_cast<std::size_t>(exact);
        assigned += quota[c];
        rema.push_back({exact - quota[c], c});
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) quota[rema[i].second] += 1;

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (std::size_t c = 0; c < k; ++c) {
        auto& pool = by_class[c];
        RngState rng = RngState::substream(seed, c);
        shuffle_indices(pool, rng);
        quota[c] = std::min(quota[c], pool.size());
        chosen.insert(chosen.end(), pool.begin(), pool.begin() + quota[c]);
    }
    RngState mix_rng = RngState::substream(seed, k);
    shuffle_indices(chosen, mix_rng);

    Batch b = gather(ds, chosen);
    Dataset out;
    out.features = std::move(b.x);
    out.labels = std::move(b.labels);
    out.class_count = ds.class_count;
    out.split = ds.split;
    return out;
}

Dataset downsample(const Dataset& ds, int factor) {
    if (factor < 1) throw UsageError("downsample: factor must be >= 1");
    const std::size_t d = ds.dim();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(d))));
    if (side * side != d) {
        throw UsageError("downsample: features are not square images (d = " + std::to_string(d) +
                         ")");
    }
    if (side % static_cast<std::size_t>(factor) != 0) {
        throw UsageError("downsample: factor " + std::to_string(factor) +
                         " does not divide side " + std::to_string(side));
    }
    const std::size_t out_side = side / factor;
    Dataset out;
    out.labels = ds.labels;
    out.class_count = ds.class_count;
    out.split = ds.split;
    out.features = Matrix(ds.size(), out_side * out_side);
    const double inv = 1.0 / (double(factor) * factor);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double* src = ds.features.row_ptr(i);
        double* dst = out.features.row_ptr(i);
        for (std::size_t r = 0; r < out_side; ++r) {
            for (std::size_t c = 0; c < out_side; ++c) {
                double sum = 0.0;
                for (int dr = 0; dr < factor; ++dr)
                    for (int dc = 0; dc < factor; ++dc)
                        sum += src[(r * factor + dr) * side + (c * factor + dc)];
                dst[r * out_side + c] = sum * inv;
            }
        }
    }
    return out;
}

Dataset gen_parity(int n_bits, std::size_t n_samples, std::uint64_t seed) {
    if (n_bits < 1) throw UsageError("gen_parity: n_bits must be >= 1");
    RngState rng = RngState::from_seed(seed);
    Dataset ds;
    ds.class_count = 2;
    ds.features = Matrix(n_samples, static_cast<std::size_t>(n_bits));
    ds.labels.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        int parity = 0;
        double* row = ds.features.row_ptr(i);
        for (int j = 0; j < n_bits; ++j) {
            const int bit = static_cast<int>(rng.next_u64() >> 63);
            row[j] = bit;
            parity ^= bit;
        }
        ds.labels[i] = parity;
    }
    return ds;
}

Dataset gen_parity_full(int n_bits) {
    if (n_bits < 1 || n_bits > 20) throw UsageError("gen_parity_full: n_bits out of range");
    const std::size_t n = std::size_t(1) << n_bits;
    Dataset ds;
    ds.class_count = 2;
    ds.features = Matrix(n, static_cast<std::size_t>(n_bits));
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int parity = 0;
        double* row = ds.features.row_ptr(i);
        for (int j = 0; j < n_bits; ++j) {
            const int bit = static_cast<int>((i >> j) & 1u);
            row[j] = bit;
            parity ^= bit;
        }
        ds.labels[i] = parity;
    }
    return ds;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& ds, std::size_t val_n) {
    if (val_n >= ds.size()) throw UsageError("split_train_val: validation split too large");
    const std::size_t train_n = ds.size() - val_n;
    Dataset train, val;
    train.class_count = val.class_count = ds.class_count;
    train.split = "train";
    val.split = "val";
    train.features = Matrix(train_n, ds.dim());
    val.features = Matrix(val_n, ds.dim());
    std::copy_n(ds.features.data.begin(), train_n * ds.dim(), train.features.data.begin());
    std::copy_n(ds.features.data.begin() + static_cast<std::ptrdiff_t>(train_n * ds.dim()),
                val_n * ds.dim(), val.features.data.begin());
    train.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(train_n));
    val.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(train_n), ds.labels.end());
    return {std::move(train), std::move(val)};
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, const BatchPlan& plan,
                                                    int epoch) {
    if (plan.batch_size == 0) throw UsageError("batch_indices: batch_size must be positive");
    if (epoch < 0) throw UsageError("batch_indices: negative epoch");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RngState rng = RngState::substream(plan.shuffle_seed, static_cast<std::uint64_t>(epoch));
    shuffle_indices(perm, rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += plan.batch_size) {
        const std::size_t end = std::min(n, start + plan.batch_size);
        out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Batch b;
    b.x = Matrix(indices.size(), ds.dim());
    b.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        std::copy_n(ds.features.row_ptr(src), ds.dim(), b.x.row_ptr(i));
        b.labels[i] = ds.labels[src];
    }
    return b;
}

void DatasetRef::validate() const {
    if (kind != "idx" && kind != "parity") {
        throw ConfigError("dataset kind must be \"idx\" or \"parity\", got \"" + kind + "\"");
    }
    if (kind == "parity" && parity_bits < 1) {
        throw ConfigError("parity dataset needs bits >= 1");
    }
    if (downsample_factor < 1) throw ConfigError("downsample factor must be >= 1");
    if (images.empty() != labels.empty()) {
        throw ConfigError("dataset images/labels paths must be given together");
    }
}

ResolvedData resolve_dataset(const DatasetRef& ref, const std::string& default_dir) {
    ref.validate();
    Dataset ds;
    if (ref.kind == "parity") {
        ds = ref.parity_samples == 0 ? gen_parity_full(ref.parity_bits)
                                     : gen_parity(ref.parity_bits, ref.parity_samples,
                                                  ref.parity_seed);
    } else {
        std::string images = ref.images, labels = ref.labels;
        if (images.empty()) {
            std::string dir = !ref.dir.empty() ? ref.dir : default_dir;
            if (dir.empty()) {
                throw ConfigError("idx dataset needs a dir, explicit paths, or HWY_DATA_DIR");
            }
            images = dir + "/train-images-idx3-ubyte";
            labels = dir + "/train-labels-idx1-ubyte";
        }
        ds = load_idx(images, labels);
    }
    if (ref.subsample_n > 0 && ref.subsample_n != ds.size()) {
        ds = subsample(ds, ref.subsample_n, ref.subsample_seed);
    }
    if (ref.downsample_factor > 1) {
        ds = downsample(ds, ref.downsample_factor);
    }
    ResolvedData out;
    if (ref.val_split > 0) {
        auto [train, val] = split_train_val(ds, ref.val_split);
        out.train = std::move(train);
        out.val.push_back(std::move(val));
    } else {
        out.train = std::move(ds);
    }
    return out;
}

} // namespace hwy
