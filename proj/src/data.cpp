#include "saln/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "saln/errors.hpp"
#include "saln/rng.hpp"

namespace saln {

namespace {

// ---- little-endian byte plumbing -------------------------------------------

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32le(std::string& out, float v) { put_u32le(out, std::bit_cast<std::uint32_t>(v)); }

std::uint64_t get_u64le(const std::string& bytes, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | static_cast<std::uint8_t>(bytes[at + static_cast<std::size_t>(i)]);
    return v;
}

std::uint32_t get_u32le(const std::string& bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<std::uint8_t>(bytes[at + static_cast<std::size_t>(i)]);
    return v;
}

float get_f32le(const std::string& bytes, std::size_t at) {
    return std::bit_cast<float>(get_u32le(bytes, at));
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on " + path);
    return bytes;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed on " + path);
}

// ---- binary feature format --------------------------------------------------

constexpr std::size_t kHeaderBytes = 4 + 1 + 1 + 8 + 8;
constexpr std::uint64_t kMaxAxis = 1ULL << 30; // keeps all size arithmetic overflow-free

Dataset load_binary(const std::string& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < kHeaderBytes) throw FormatError(path + ": truncated header");
    if (bytes.compare(0, 4, "SALN") != 0) throw FormatError(path + ": bad magic");
    const auto version = static_cast<std::uint8_t>(bytes[4]);
    if (version != 1) throw FormatError(path + ": unsupported version " + std::to_string(version));
    const auto has_labels = static_cast<std::uint8_t>(bytes[5]);
    if (has_labels > 1) throw FormatError(path + ": bad has_labels flag");

    const std::uint64_t n = get_u64le(bytes, 6);
    const std::uint64_t d = get_u64le(bytes, 14);
    if (n == 0 || d == 0) throw FormatError(path + ": empty shape");
    if (n > kMaxAxis || d > kMaxAxis) throw FormatError(path + ": implausible shape");

    const std::size_t expected = kHeaderBytes + 4 * n * d + (has_labels ? 4 * n : 0);
    if (bytes.size() < expected) throw FormatError(path + ": truncated payload");
    if (bytes.size() > expected) throw FormatError(path + ": trailing bytes after payload");

    Dataset ds;
    ds.features = Matrix(n, d);
    std::size_t at = kHeaderBytes;
    for (std::size_t i = 0; i < n * d; ++i, at += 4) {
        const float v = get_f32le(bytes, at);
        if (!std::isfinite(v)) throw NonFiniteInput(path + ": NaN/Inf feature value");
        ds.features.data()[i] = static_cast<double>(v);
    }

    if (has_labels) {
        ds.labels.resize(n);
        std::uint32_t max_label = 0;
        for (std::size_t i = 0; i < n; ++i, at += 4) {
            const std::uint32_t label = get_u32le(bytes, at);
            if (label > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
                throw FormatError(path + ": label does not fit a class index");
            ds.labels[i] = static_cast<int>(label);
            max_label = std::max(max_label, label);
        }
        ds.class_count = static_cast<std::size_t>(max_label) + 1;
    }

    ds.provenance.kind = Provenance::Kind::file;
    ds.provenance.path = path;
    return ds;
}

void write_binary(const Dataset& ds, const std::string& path) {
    std::string bytes;
    bytes.reserve(kHeaderBytes + 4 * ds.sample_count() * ds.dim() +
                  (ds.has_labels() ? 4 * ds.sample_count() : 0));
    bytes.append("SALN");
    bytes.push_back(1); // version
    bytes.push_back(ds.has_labels() ? 1 : 0);
    put_u64le(bytes, ds.sample_count());
    put_u64le(bytes, ds.dim());
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        put_f32le(bytes, static_cast<float>(ds.features.data()[i]));
    if (ds.has_labels())
        for (int label : ds.labels) put_u32le(bytes, static_cast<std::uint32_t>(label));
    write_file_bytes(path, bytes);
}

// ---- CSV feature format ------------------------------------------------------

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double_field(const std::string& field, const std::string& path) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw FormatError(path + ": bad numeric field '" + field + "'");
    if (!std::isfinite(v)) throw NonFiniteInput(path + ": NaN/Inf feature value");
    return v;
}

int parse_label_field(const std::string& field, const std::string& path) {
    int v = 0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || v < 0)
        throw FormatError(path + ": bad label field '" + field + "'");
    return v;
}

Dataset load_csv(const std::string& path) {
    const std::string bytes = read_file_bytes(path);

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= bytes.size()) {
        std::size_t nl = bytes.find('\n', start);
        if (nl == std::string::npos) nl = bytes.size();
        std::string line = bytes.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw FormatError(path + ": missing header");

    const std::vector<std::string> header = split_fields(lines[0]);
    const bool labeled = header.back() == "label";
    const std::size_t d = header.size() - (labeled ? 1 : 0);
    if (d == 0) throw FormatError(path + ": no feature columns");
    for (std::size_t j = 0; j < d; ++j)
        if (header[j] != "feat_" + std::to_string(j))
            throw FormatError(path + ": unexpected header column '" + header[j] + "'");

    const std::size_t n = lines.size() - 1;
    if (n == 0) throw FormatError(path + ": no data rows");

    Dataset ds;
    ds.features = Matrix(n, d);
    if (labeled) ds.labels.resize(n);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<std::string> fields = split_fields(lines[i + 1]);
        if (fields.size() != header.size())
            throw FormatError(path + ": row " + std::to_string(i + 1) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(header.size()));
        double* row = ds.features.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = parse_double_field(fields[j], path);
        if (labeled) {
            ds.labels[i] = parse_label_field(fields[d], path);
            max_label = std::max(max_label, ds.labels[i]);
        }
    }
    if (labeled) ds.class_count = static_cast<std::size_t>(max_label) + 1;

    ds.provenance.kind = Provenance::Kind::file;
    ds.provenance.path = path;
    return ds;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::string out;
    for (std::size_t j = 0; j < ds.dim(); ++j) {
        if (j) out.push_back(',');
        out += "feat_" + std::to_string(j);
    }
    if (ds.has_labels()) out += ",label";
    out.push_back('\n');

    for (std::size_t i = 0; i < ds.sample_count(); ++i) {
        const double* row = ds.features.row(i);
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            if (j) out.push_back(',');
            out += format_double(row[j]);
        }
        if (ds.has_labels()) {
            out.push_back(',');
            out += std::to_string(ds.labels[i]);
        }
        out.push_back('\n');
    }
    write_file_bytes(path, out);
}

// ---- shared helpers ----------------------------------------------------------

void fisher_yates(std::vector<std::size_t>& perm, std::mt19937_64& rng) {
    for (std::size_t i = perm.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
}

Dataset take(const Dataset& ds, const std::vector<std::size_t>& perm, std::size_t first,
             std::size_t count) {
    Dataset out;
    out.features = Matrix(count, ds.dim());
    if (ds.has_labels()) out.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = perm[first + i];
        std::memcpy(out.features.row(i), ds.features.row(src), ds.dim() * sizeof(double));
        if (ds.has_labels()) out.labels[i] = ds.labels[src];
    }
    out.class_count = ds.class_count;
    out.provenance = ds.provenance;
    return out;
}

} // namespace

Dataset generate_blobs(std::size_t n, std::size_t d, std::size_t classes, double separation,
                       std::uint64_t seed) {
    if (classes < 2) throw InvalidParams("generate_blobs: need at least 2 classes");
    if (n < classes) throw InvalidParams("generate_blobs: need at least one sample per class");
    if (d < 1) throw InvalidParams("generate_blobs: need at least 1 dimension");
    if (!(separation > 0.0) || !std::isfinite(separation))
        throw InvalidParams("generate_blobs: separation must be positive and finite");

    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    ds.class_count = classes;
    ds.provenance.kind = Provenance::Kind::synthetic;
    ds.provenance.seed = seed;
    ds.provenance.params = BlobParams{n, d, classes, separation};

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % classes; // round robin keeps classes balanced
        ds.labels[i] = static_cast<int>(label);
        double* row = ds.features.row(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = normal01(rng);
        // Class mean: separation * (label/d + 1) along axis label%d.
        row[label % d] += separation * static_cast<double>(label / d + 1);
    }
    return ds;
}

Dataset generate_blobs(const BlobParams& params, std::uint64_t seed) {
    return generate_blobs(params.n, params.d, params.classes, params.separation, seed);
}

Dataset load_features(const std::string& path, FileFormat format) {
    return format == FileFormat::binary ? load_binary(path) : load_csv(path);
}

void write_features(const Dataset& ds, const std::string& path, FileFormat format) {
    if (ds.sample_count() == 0 || ds.dim() == 0)
        throw InvalidParams("write_features: empty dataset");
    if (ds.has_labels() && ds.labels.size() != ds.sample_count())
        throw LengthMismatch("write_features: labels do not match the row count");
    if (format == FileFormat::binary)
        write_binary(ds, path);
    else
        write_csv(ds, path);
}

Splits split(const Dataset& ds, const SplitSpec& spec) {
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (spec.train_fraction < 0.0 || spec.val_fraction < 0.0 || spec.test_fraction < 0.0)
        throw InvalidParams("split: negative fraction");
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidParams("split: fractions must sum to 1");
    const std::size_t n = ds.sample_count();
    if (n < 3) throw InvalidParams("split: need at least 3 samples");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(spec.shuffle_seed);
    fisher_yates(perm, rng);

    // Floor allocation for val and test; whatever is left (the floors'
    // remainder) goes to train. The epsilon absorbs cases like 10 * 0.2
    // landing just below the integer.
    const auto n_val = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * spec.val_fraction + 1e-9));
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * spec.test_fraction + 1e-9));
    const std::size_t n_train = n - n_val - n_test;

    Splits out;
    out.train = take(ds, perm, 0, n_train);
    out.val = take(ds, perm, n_train, n_val);
    out.test = take(ds, perm, n_train + n_val, n_test);
    return out;
}

std::vector<TrainBatch> batches(const Dataset& ds, std::size_t batch_size,
                                std::uint64_t shuffle_seed, std::uint64_t epoch_index) {
    if (batch_size < 2) throw InvalidParams("batches: batch_size must be at least 2");
    const std::size_t n = ds.sample_count();
    if (n < 2) throw InvalidParams("batches: need at least 2 samples");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(shuffle_seed, epoch_index));
    fisher_yates(perm, rng);

    // Sizes: full batches of batch_size, then the remainder as its own batch
    // if it can stand alone (>= 2 samples) or folded into the last one. With
    // n >= 2 the remainder-of-1 case always has a previous batch to fold into.
    std::vector<std::size_t> sizes(n / batch_size, batch_size);
    const std::size_t rem = n % batch_size;
    if (rem >= 2)
        sizes.push_back(rem);
    else if (rem == 1)
        sizes.back() += 1;

    std::vector<TrainBatch> out;
    out.reserve(sizes.size());
    std::size_t at = 0;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        TrainBatch batch;
        batch.features.batch_id = static_cast<int>(b);
        batch.features.data = Matrix(sizes[b], ds.dim());
        batch.features.global_ids.resize(sizes[b]);
        if (ds.has_labels()) batch.labels.resize(sizes[b]);
        for (std::size_t i = 0; i < sizes[b]; ++i, ++at) {
            const std::size_t src = perm[at];
            std::memcpy(batch.features.data.row(i), ds.features.row(src),
                        ds.dim() * sizeof(double));
            batch.features.global_ids[i] = src;
            if (ds.has_labels()) batch.labels[i] = ds.labels[src];
        }
        out.push_back(std::move(batch));
    }
    return out;
}

} // namespace saln
