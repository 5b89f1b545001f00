#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "flpl/dataset.hpp"
#include "flpl/error.hpp"
#include "flpl/svm.hpp"

using namespace flpl;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::path(::testing::TempDir()) / name; }

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void put_be(std::vector<unsigned char>& v, std::uint32_t x) {
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

} // namespace

// ---------------------------------------------------------------------------
// IDX loader
// ---------------------------------------------------------------------------

TEST(LoadIdx, ScalesPixelEndpoints) {
    // Two 2x2 images, pixels all 0 and all 255.
    std::vector<unsigned char> img;
    put_be(img, 0x00000803);
    put_be(img, 2);
    put_be(img, 2);
    put_be(img, 2);
    for (int i = 0; i < 4; ++i) img.push_back(0);
    for (int i = 0; i < 4; ++i) img.push_back(255);
    std::vector<unsigned char> lab;
    put_be(lab, 0x00000801);
    put_be(lab, 2);
    lab.push_back(3);
    lab.push_back(7);

    const fs::path ip = temp_file("idx_images"), lp = temp_file("idx_labels");
    write_bytes(ip, img);
    write_bytes(lp, lab);

    const std::vector<Sample> samples = load_idx(ip, lp);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[0].features, std::vector<double>(4, 0.0));
    EXPECT_EQ(samples[1].features, std::vector<double>(4, 1.0));
    EXPECT_EQ(samples[0].label, 3);
    EXPECT_EQ(samples[1].label, 7);
}

TEST(LoadIdx, WrongMagicNamesExpectedAndFound) {
    std::vector<unsigned char> img;
    put_be(img, 0x00000801); // labels magic in the images slot
    put_be(img, 0);
    put_be(img, 1);
    put_be(img, 1);
    std::vector<unsigned char> lab;
    put_be(lab, 0x00000801);
    put_be(lab, 0);
    const fs::path ip = temp_file("bad_magic_images"), lp = temp_file("bad_magic_labels");
    write_bytes(ip, img);
    write_bytes(lp, lab);
    try {
        load_idx(ip, lp);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("0x00000803"), std::string::npos);
        EXPECT_NE(what.find("0x00000801"), std::string::npos);
    }
}

TEST(LoadIdx, CountMismatchRejected) {
    std::vector<unsigned char> img;
    put_be(img, 0x00000803);
    put_be(img, 2);
    put_be(img, 1);
    put_be(img, 1);
    img.push_back(9);
    img.push_back(9);
    std::vector<unsigned char> lab;
    put_be(lab, 0x00000801);
    put_be(lab, 3);
    lab.push_back(0);
    lab.push_back(1);
    lab.push_back(2);
    const fs::path ip = temp_file("mismatch_images"), lp = temp_file("mismatch_labels");
    write_bytes(ip, img);
    write_bytes(lp, lab);
    EXPECT_THROW(load_idx(ip, lp), FormatError);
}

TEST(LoadIdx, TruncationReportsByteOffset) {
    std::vector<unsigned char> img;
    put_be(img, 0x00000803);
    put_be(img, 2);
    put_be(img, 2);
    put_be(img, 2);
    for (int i = 0; i < 5; ++i) img.push_back(1); // 3 bytes short
    std::vector<unsigned char> lab;
    put_be(lab, 0x00000801);
    put_be(lab, 2);
    lab.push_back(0);
    lab.push_back(1);
    const fs::path ip = temp_file("trunc_images"), lp = temp_file("trunc_labels");
    write_bytes(ip, img);
    write_bytes(lp, lab);
    try {
        load_idx(ip, lp);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
    }
}

TEST(LoadIdx, RoundTripsSyntheticFixtures) {
    const std::vector<Sample> original = generate_synthetic(2, 16, 20, 99);
    const fs::path ip = temp_file("rt_images"), lp = temp_file("rt_labels");
    write_idx(original, ip, lp, 4, 4);
    const std::vector<Sample> reloaded = load_idx(ip, lp);
    ASSERT_EQ(reloaded.size(), original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        EXPECT_EQ(reloaded[i].label, original[i].label);
        for (std::size_t p = 0; p < original[i].features.size(); ++p)
            EXPECT_NEAR(reloaded[i].features[p], original[i].features[p], 1.0 / 255.0);
    }
}

// ---------------------------------------------------------------------------
// CIFAR-10 loader
// ---------------------------------------------------------------------------

TEST(LoadCifar10, SingleRecordFixture) {
    std::vector<unsigned char> rec(3073, 0);
    rec[0] = 7;
    rec[1] = 255;
    const fs::path p = temp_file("cifar_one.bin");
    write_bytes(p, rec);
    const std::vector<Sample> samples = load_cifar10({p});
    ASSERT_EQ(samples.size(), 1u);
    EXPECT_EQ(samples[0].label, 7);
    EXPECT_DOUBLE_EQ(samples[0].features[0], 1.0);
    EXPECT_DOUBLE_EQ(samples[0].features[1], 0.0);
    EXPECT_EQ(samples[0].features.size(), 3072u);
}

TEST(LoadCifar10, MisalignedFileRejected) {
    std::vector<unsigned char> bytes(3074, 0);
    const fs::path p = temp_file("cifar_misaligned.bin");
    write_bytes(p, bytes);
    try {
        load_cifar10({p});
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
    }
}

TEST(LoadCifar10, LabelByteOutOfRangeRejected) {
    std::vector<unsigned char> rec(3073, 0);
    rec[0] = 10;
    const fs::path p = temp_file("cifar_badlabel.bin");
    write_bytes(p, rec);
    EXPECT_THROW(load_cifar10({p}), FormatError);
}

TEST(LoadCifar10, RoundTripsFixture) {
    std::vector<Sample> original = generate_synthetic(4, 3072, 3, 5);
    const fs::path p = temp_file("cifar_rt.bin");
    write_cifar10(original, p);
    const std::vector<Sample> reloaded = load_cifar10({p});
    ASSERT_EQ(reloaded.size(), original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        EXPECT_EQ(reloaded[i].label, original[i].label);
        for (std::size_t f = 0; f < 3072; ++f)
            ASSERT_NEAR(reloaded[i].features[f], original[i].features[f], 1.0 / 255.0);
    }
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

TEST(GenerateSynthetic, DeterministicUnderSeed) {
    const auto a = generate_synthetic(2, 10, 100, 1);
    const auto b = generate_synthetic(2, 10, 100, 1);
    EXPECT_EQ(a, b);
    const auto c = generate_synthetic(2, 10, 100, 2);
    EXPECT_NE(a, c);
}

TEST(GenerateSynthetic, CountsPerLabel) {
    const auto samples = generate_synthetic(3, 5, 50, 11);
    EXPECT_EQ(samples.size(), 150u);
    std::map<int, int> counts;
    for (const Sample& s : samples) counts[s.label]++;
    for (int c = 0; c < 3; ++c) EXPECT_EQ(counts[c], 50);
}

TEST(GenerateSynthetic, FeaturesWithinUnitInterval) {
    for (const Sample& s : generate_synthetic(4, 8, 200, 3))
        for (double f : s.features) {
            ASSERT_GE(f, 0.0);
            ASSERT_LE(f, 1.0);
        }
}

TEST(GenerateSynthetic, BlobsAreLinearlySeparable) {
    // A linear SVM should fit the two-class blobs almost perfectly.
    const auto samples = generate_synthetic(2, 10, 500, 21);
    ClientDataset cd;
    cd.client_id = 0;
    cd.train = samples;
    FlConfig cfg;
    cfg.local_iters = 30;
    cfg.learning_rate = 0.01;
    cfg.reg_coeff = 0.01;
    RngStream rng(555);
    const ModelWeights trained = local_train(ModelWeights(2, 10), cd, cfg, rng);
    EXPECT_GE(evaluate(trained, samples), 0.95);
}

// ---------------------------------------------------------------------------
// Partitioning
// ---------------------------------------------------------------------------

namespace {

// Tag each sample with a unique id in feature 0 so disjointness can be
// checked across copies.
std::vector<Sample> tagged_samples(int n, int classes) {
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.label = i % classes;
        s.features = {static_cast<double>(i), 0.5};
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST(PartitionData, IidDisjointCounts) {
    const auto samples = tagged_samples(1000, 4);
    PartitionPlan plan{PartitionPlan::Scheme::kIid, 5, 200, 7};
    const Partition part = partition(samples, plan);
    ASSERT_EQ(part.clients.size(), 5u);
    std::set<double> seen;
    for (const ClientDataset& c : part.clients) {
        EXPECT_EQ(c.train.size(), 200u);
        for (const Sample& s : c.train) {
            EXPECT_TRUE(seen.insert(s.features[0]).second) << "sample assigned twice";
        }
    }
    EXPECT_EQ(part.holdout.size(), 0u);
}

TEST(PartitionData, IidHistogramTracksGlobalProportions) {
    std::vector<Sample> samples;
    RngStream rng(13);
    for (int i = 0; i < 6000; ++i) {
        Sample s;
        s.label = static_cast<int>(rng.uniform_int(10));
        s.features = {rng.uniform01()};
        samples.push_back(std::move(s));
    }
    std::map<int, double> global_hist;
    for (const Sample& s : samples) global_hist[s.label] += 1.0 / samples.size();

    PartitionPlan plan{PartitionPlan::Scheme::kIid, 5, 500, 3};
    const Partition part = partition(samples, plan);
    for (const ClientDataset& c : part.clients) {
        std::map<int, double> hist;
        for (const Sample& s : c.train) hist[s.label] += 1.0 / c.train.size();
        for (const auto& [label, p] : global_hist)
            EXPECT_LT(std::abs(hist[label] - p) / p, 0.10) << "label " << label;
    }
}

TEST(PartitionData, LabelShardHasAtMostTwoLabels) {
    const auto samples = tagged_samples(4000, 10);
    PartitionPlan plan{PartitionPlan::Scheme::kLabelShard, 5, 200, 17};
    const Partition part = partition(samples, plan);
    for (const ClientDataset& c : part.clients) {
        std::set<int> labels;
        for (const Sample& s : c.train) labels.insert(s.label);
        EXPECT_LE(labels.size(), 2u);
        EXPECT_EQ(c.train.size(), 200u);
    }
}

TEST(PartitionData, DeterministicUnderSeed) {
    const auto samples = tagged_samples(1000, 4);
    PartitionPlan plan{PartitionPlan::Scheme::kIid, 5, 150, 7};
    const Partition a = partition(samples, plan);
    const Partition b = partition(samples, plan);
    for (std::size_t i = 0; i < a.clients.size(); ++i) EXPECT_EQ(a.clients[i].train, b.clients[i].train);
    EXPECT_EQ(a.holdout, b.holdout);
}

TEST(PartitionData, InsufficientSamplesRejected) {
    const auto samples = tagged_samples(100, 2);
    PartitionPlan plan{PartitionPlan::Scheme::kIid, 5, 50, 1};
    EXPECT_THROW(partition(samples, plan), ConfigError);
}

TEST(PartitionData, HoldoutGetsTheRemainder) {
    const auto samples = tagged_samples(1000, 4);
    PartitionPlan plan{PartitionPlan::Scheme::kIid, 3, 100, 7};
    const Partition part = partition(samples, plan);
    EXPECT_EQ(part.holdout.size(), 1000u - 300u);
}
