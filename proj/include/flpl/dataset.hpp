#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "flpl/error.hpp"
#include "flpl/rng.hpp"

namespace flpl {

struct Sample {
    std::vector<double> features; // scaled to [0, 1]
    int label = 0;

    bool operator==(const Sample&) const = default;
};

struct ClientDataset {
    int client_id = 0;
    std::vector<Sample> train;
    std::vector<Sample> test; // shared holdout, same for every client
};

struct PartitionPlan {
    enum class Scheme { kIid, kLabelShard };
    Scheme scheme = Scheme::kIid;
    int client_count = 1;
    int samples_per_client = 1;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// IDX format (big-endian): images magic 0x00000803 then count/rows/cols,
// labels magic 0x00000801 then count, one unsigned byte per pixel or label.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, const std::string& file, std::size_t offset) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (in.gcount() != 4)
        throw FormatError(file + ": truncated at byte offset " + std::to_string(offset));
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::string hex_u32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

} // namespace detail

inline std::vector<Sample> load_idx(const std::filesystem::path& images_path,
                                    const std::filesystem::path& labels_path) {
    constexpr std::uint32_t kImagesMagic = 0x00000803;
    constexpr std::uint32_t kLabelsMagic = 0x00000801;

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path.string() + ": cannot open");
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path.string() + ": cannot open");

    const std::uint32_t img_magic = detail::read_be_u32(img, images_path.string(), 0);
    if (img_magic != kImagesMagic)
        throw FormatError(images_path.string() + ": expected magic " + detail::hex_u32(kImagesMagic) + ", found " +
                          detail::hex_u32(img_magic));
    const std::uint32_t img_count = detail::read_be_u32(img, images_path.string(), 4);
    const std::uint32_t rows = detail::read_be_u32(img, images_path.string(), 8);
    const std::uint32_t cols = detail::read_be_u32(img, images_path.string(), 12);

    const std::uint32_t lab_magic = detail::read_be_u32(lab, labels_path.string(), 0);
    if (lab_magic != kLabelsMagic)
        throw FormatError(labels_path.string() + ": expected magic " + detail::hex_u32(kLabelsMagic) + ", found " +
                          detail::hex_u32(lab_magic));
    const std::uint32_t lab_count = detail::read_be_u32(lab, labels_path.string(), 4);

    if (img_count != lab_count)
        throw FormatError(images_path.string() + ": " + std::to_string(img_count) + " images but " +
                          std::to_string(lab_count) + " labels in " + labels_path.string());

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> pixel_buf(pixels);
    std::vector<Sample> out;
    out.reserve(img_count);
    for (std::uint32_t i = 0; i < img_count; ++i) {
        img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(pixels));
        if (img.gcount() != static_cast<std::streamsize>(pixels))
            throw FormatError(images_path.string() + ": truncated at byte offset " +
                              std::to_string(16 + static_cast<std::size_t>(i) * pixels + static_cast<std::size_t>(img.gcount())));
        const int lbl = lab.get();
        if (lbl == EOF)
            throw FormatError(labels_path.string() + ": truncated at byte offset " + std::to_string(8 + i));
        Sample s;
        s.features.resize(pixels);
        for (std::size_t p = 0; p < pixels; ++p) s.features[p] = pixel_buf[p] / 255.0;
        s.label = lbl;
        out.push_back(std::move(s));
    }
    return out;
}

// Test-fixture writer for the same IDX layout; features are quantized back
// to bytes.
inline void write_idx(const std::vector<Sample>& samples, const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path, std::uint32_t rows, std::uint32_t cols) {
    detail::require(!samples.empty(), "write_idx: empty sample list");
    detail::require(samples[0].features.size() == static_cast<std::size_t>(rows) * cols,
                    "write_idx: feature length does not match rows*cols");

    auto put_be = [](std::ostream& out, std::uint32_t v) {
        const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };

    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    put_be(img, 0x00000803);
    put_be(img, static_cast<std::uint32_t>(samples.size()));
    put_be(img, rows);
    put_be(img, cols);
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    for (const Sample& s : samples) {
        for (std::size_t p = 0; p < buf.size(); ++p)
            buf[p] = static_cast<unsigned char>(std::lround(std::clamp(s.features[p], 0.0, 1.0) * 255.0));
        img.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }

    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    put_be(lab, 0x00000801);
    put_be(lab, static_cast<std::uint32_t>(samples.size()));
    for (const Sample& s : samples) lab.put(static_cast<char>(s.label));
}

// ---------------------------------------------------------------------------
// CIFAR-10 binary format: records of 3073 bytes, one label byte (0..9)
// followed by 1024 R, 1024 G, 1024 B bytes.
// ---------------------------------------------------------------------------

inline std::vector<Sample> load_cifar10(const std::vector<std::filesystem::path>& batch_paths) {
    constexpr std::size_t kRecordBytes = 3073;
    std::vector<Sample> out;
    for (const auto& path : batch_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError(path.string() + ": cannot open");
        in.seekg(0, std::ios::end);
        const std::size_t size = static_cast<std::size_t>(in.tellg());
        in.seekg(0, std::ios::beg);
        if (size % kRecordBytes != 0)
            throw FormatError(path.string() + ": size " + std::to_string(size) + " is not a multiple of " +
                              std::to_string(kRecordBytes) + " (format error at record " +
                              std::to_string(size / kRecordBytes + 1) + ")");
        const std::size_t records = size / kRecordBytes;
        std::vector<unsigned char> buf(kRecordBytes);
        out.reserve(out.size() + records);
        for (std::size_t r = 0; r < records; ++r) {
            in.read(reinterpret_cast<char*>(buf.data()), kRecordBytes);
            if (in.gcount() != static_cast<std::streamsize>(kRecordBytes))
                throw FormatError(path.string() + ": truncated at record " + std::to_string(r + 1));
            if (buf[0] > 9)
                throw FormatError(path.string() + ": label byte " + std::to_string(buf[0]) + " > 9 at record " +
                                  std::to_string(r + 1));
            Sample s;
            s.label = buf[0];
            s.features.resize(kRecordBytes - 1);
            for (std::size_t p = 1; p < kRecordBytes; ++p) s.features[p - 1] = buf[p] / 255.0;
            out.push_back(std::move(s));
        }
    }
    return out;
}

inline void write_cifar10(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (const Sample& s : samples) {
        detail::require(s.features.size() == 3072, "write_cifar10: features must have length 3072");
        out.put(static_cast<char>(s.label));
        for (double f : s.features)
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0))));
    }
}

// ---------------------------------------------------------------------------
// Synthetic Gaussian blobs: a fast, linearly separable stand-in for the
// image datasets. Class centers are deterministic unit vectors paired
// antipodally, so adjacent class pairs sit two units apart.
// ---------------------------------------------------------------------------

inline std::vector<double> synthetic_class_center(int klass, int dim) {
    std::vector<double> dir(static_cast<std::size_t>(dim));
    RngStream rng = RngStream::derive(0x5B105C3A11EDull, {static_cast<std::uint64_t>(klass / 2),
                                                          static_cast<std::uint64_t>(dim)});
    double norm = 0.0;
    for (double& v : dir) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const double sign = (klass % 2 == 0) ? 1.0 : -1.0;
    for (double& v : dir) v = sign * v / norm;
    return dir;
}

inline std::vector<Sample> generate_synthetic(int classes, int dim, int per_class, std::uint64_t seed) {
    detail::require(classes >= 2, "generate_synthetic: classes must be >= 2");
    detail::require(dim >= 2, "generate_synthetic: dim must be >= 2");

    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(classes) * per_class);
    for (int c = 0; c < classes; ++c) {
        const std::vector<double> center = synthetic_class_center(c, dim);
        RngStream rng = RngStream::derive(seed, {stream_tag::kSyntheticData, static_cast<std::uint64_t>(c)});
        for (int n = 0; n < per_class; ++n) {
            Sample s;
            s.label = c;
            s.features.resize(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j) {
                const double raw = center[static_cast<std::size_t>(j)] + 0.5 * rng.normal();
                s.features[static_cast<std::size_t>(j)] = std::clamp(0.5 + 0.5 * raw, 0.0, 1.0);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

struct Partition {
    std::vector<ClientDataset> clients;
    std::vector<Sample> holdout; // samples not assigned to any client
};

namespace detail {

// Per-class quota for one client under proportional (iid) assignment:
// floor shares plus largest-remainder top-up.
inline std::vector<int> iid_class_quota(const std::vector<int>& class_counts, int total, int samples_per_client) {
    const int classes = static_cast<int>(class_counts.size());
    std::vector<int> quota(static_cast<std::size_t>(classes), 0);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int c = 0; c < classes; ++c) {
        const double exact = static_cast<double>(samples_per_client) * class_counts[static_cast<std::size_t>(c)] / total;
        quota[static_cast<std::size_t>(c)] = static_cast<int>(exact);
        assigned += quota[static_cast<std::size_t>(c)];
        remainders.emplace_back(exact - quota[static_cast<std::size_t>(c)], c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; assigned < samples_per_client; ++i, ++assigned)
        quota[static_cast<std::size_t>(remainders[static_cast<std::size_t>(i % remainders.size())].second)] += 1;
    return quota;
}

} // namespace detail

inline Partition partition(const std::vector<Sample>& samples, const PartitionPlan& plan) {
    const std::size_t needed = static_cast<std::size_t>(plan.client_count) * plan.samples_per_client;
    if (needed > samples.size())
        throw ConfigError("partition: need " + std::to_string(needed) + " samples for " +
                          std::to_string(plan.client_count) + " clients but only " + std::to_string(samples.size()) +
                          " available");

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng = RngStream::derive(plan.seed, {stream_tag::kPartition});
    rng.shuffle(order);

    int num_classes = 0;
    for (const Sample& s : samples) num_classes = std::max(num_classes, s.label + 1);

    // Per-class queues in shuffled order.
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t idx : order) by_class[static_cast<std::size_t>(samples[idx].label)].push_back(idx);

    Partition out;
    out.clients.resize(static_cast<std::size_t>(plan.client_count));
    std::vector<bool> taken(samples.size(), false);

    if (plan.scheme == PartitionPlan::Scheme::kIid) {
        std::vector<int> class_counts(static_cast<std::size_t>(num_classes));
        for (int c = 0; c < num_classes; ++c) class_counts[static_cast<std::size_t>(c)] = static_cast<int>(by_class[static_cast<std::size_t>(c)].size());
        const std::vector<int> quota =
            detail::iid_class_quota(class_counts, static_cast<int>(samples.size()), plan.samples_per_client);
        std::vector<std::size_t> cursor(static_cast<std::size_t>(num_classes), 0);
        for (int i = 0; i < plan.client_count; ++i) {
            ClientDataset& cd = out.clients[static_cast<std::size_t>(i)];
            cd.client_id = i;
            for (int c = 0; c < num_classes; ++c) {
                for (int k = 0; k < quota[static_cast<std::size_t>(c)]; ++k) {
                    if (cursor[static_cast<std::size_t>(c)] >= by_class[static_cast<std::size_t>(c)].size())
                        throw ConfigError("partition: class " + std::to_string(c) + " exhausted; reduce samples_per_client");
                    const std::size_t idx = by_class[static_cast<std::size_t>(c)][cursor[static_cast<std::size_t>(c)]++];
                    cd.train.push_back(samples[idx]);
                    taken[idx] = true;
                }
            }
        }
    } else {
        // Label-shard: each client receives two label-pure shards, so it
        // holds at most two distinct labels.
        const int shard_size = (plan.samples_per_client + 1) / 2;
        std::vector<std::vector<std::size_t>> shards;
        for (auto& queue : by_class) {
            for (std::size_t start = 0; start + static_cast<std::size_t>(shard_size) <= queue.size();
                 start += static_cast<std::size_t>(shard_size))
                shards.emplace_back(queue.begin() + static_cast<std::ptrdiff_t>(start),
                                    queue.begin() + static_cast<std::ptrdiff_t>(start + static_cast<std::size_t>(shard_size)));
        }
        if (shards.size() < static_cast<std::size_t>(2 * plan.client_count))
            throw ConfigError("partition: label-shard needs " + std::to_string(2 * plan.client_count) +
                              " shards of " + std::to_string(shard_size) + " but only " +
                              std::to_string(shards.size()) + " available");
        rng.shuffle(shards);
        for (int i = 0; i < plan.client_count; ++i) {
            ClientDataset& cd = out.clients[static_cast<std::size_t>(i)];
            cd.client_id = i;
            for (int s = 0; s < 2; ++s) {
                for (std::size_t idx : shards[static_cast<std::size_t>(2 * i + s)]) {
                    if (static_cast<int>(cd.train.size()) >= plan.samples_per_client) break;
                    cd.train.push_back(samples[idx]);
                    taken[idx] = true;
                }
            }
        }
    }

    for (std::size_t idx : order)
        if (!taken[idx]) out.holdout.push_back(samples[idx]);
    return out;
}

} // namespace flpl
