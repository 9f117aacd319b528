#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saln/matrix.hpp"
#include "saln/spectral.hpp"

namespace saln {

/// Parameters of the synthetic Gaussian-blob generator.
struct BlobParams {
    std::size_t n = 2000;
    std::size_t d = 20;
    std::size_t classes = 2;
    double separation = 6.0;
};

/// Where a dataset came from; echoed into experiment artifacts.
struct Provenance {
    enum class Kind { synthetic, file };
    Kind kind = Kind::synthetic;
    std::uint64_t seed = 0; // synthetic only
    BlobParams params{};    // synthetic only
    std::string path;       // file only
};

/// A feature matrix with optional aligned labels. `labels` is empty when the
/// source carried none (has_labels=0 feature files); otherwise it has one
/// entry per row, each in [0, class_count).
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::size_t class_count = 0;
    Provenance provenance;

    std::size_t sample_count() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool has_labels() const { return !labels.empty(); }
};

/// Train/val/test fractions (each >= 0, summing to 1 within 1e-9) plus the
/// shuffle seed that fixes the partition.
struct SplitSpec {
    double train_fraction = 0.7;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    std::uint64_t shuffle_seed = 0;
};

enum class FileFormat { binary, csv };

/// Synthetic blobs: sample i gets label i % classes, and class k's mean is
/// separation * (k/d + 1) along axis k%d (so the first d classes sit on the
/// unit axes, the next d on the same axes twice as far out, and so on), with
/// unit-variance Gaussian noise on every coordinate. Deterministic in seed.
/// Requires n >= classes >= 2, d >= 1, separation > 0.
Dataset generate_blobs(std::size_t n, std::size_t d, std::size_t classes, double separation,
                       std::uint64_t seed);

Dataset generate_blobs(const BlobParams& params, std::uint64_t seed);

/// Read a feature file. Binary layout: magic "SALN", u8 version=1, u8
/// has_labels, u64 LE n, u64 LE d, n*d f32 LE row-major values, then n u32 LE
/// labels if has_labels. CSV layout: header `feat_0,...,feat_{d-1}[,label]`,
/// one sample per row. Throws IoError when the file cannot be read,
/// FormatError on bad magic/version/shape/trailing bytes, NonFiniteInput on
/// NaN or Inf entries.
Dataset load_features(const std::string& path, FileFormat format);

/// Inverse of load_features; binary files round-trip bit-identically.
void write_features(const Dataset& ds, const std::string& path, FileFormat format);

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Seeded shuffle then contiguous partition. Val and test sizes are floored;
/// the remainder goes to train. The three parts are disjoint and exhaustive.
Splits split(const Dataset& ds, const SplitSpec& spec);

/// One training batch: feature rows (with their global dataset indices) plus
/// aligned labels.
struct TrainBatch {
    FeatureBatch features;
    std::vector<int> labels;

    std::size_t sample_count() const { return features.sample_count(); }
};

/// Partition one epoch's reshuffled sample order into batches of batch_size.
/// The shuffle is keyed by (shuffle_seed, epoch_index), so each epoch has its
/// own order but repeats are identical. A trailing partial batch is kept if
/// it has at least 2 samples (the spectral minimum) and merged into the
/// previous batch otherwise.
std::vector<TrainBatch> batches(const Dataset& ds, std::size_t batch_size,
                                std::uint64_t shuffle_seed, std::uint64_t epoch_index);

} // namespace saln
