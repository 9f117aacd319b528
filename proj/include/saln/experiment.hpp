#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saln/data.hpp"
#include "saln/model.hpp"
#include "saln/selection.hpp"

namespace saln {

/// The four independent random streams of one experiment. `data` fixes the
/// dataset (generation and the train/val/test partition), `init` the weight
/// initialization, `shuffle` the per-epoch batch order, `selection` the
/// random-strategy draws.
struct Seeds {
    std::uint64_t data = 1;
    std::uint64_t init = 2;
    std::uint64_t shuffle = 3;
    std::uint64_t selection = 4;
};

/// Where the training data comes from: the synthetic blob generator or a
/// feature file on disk.
struct DatasetSource {
    enum class Kind { blobs, file };
    Kind kind = Kind::blobs;
    BlobParams blobs{};
    std::string path;                         // file only
    FileFormat format = FileFormat::binary;   // file only
};

/// Everything a training run depends on. Two runs with equal configs produce
/// identical metrics (timing aside).
struct TrainingConfig {
    std::size_t epochs = 25;
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    double momentum = 0.9;
    SelectionConfig selection{};
    Architecture architecture = Architecture::linear;
    std::size_t hidden_width = 64; // mlp only
    Seeds seeds{};
    DatasetSource source{};
    double train_fraction = 0.7;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
};

/// One epoch of metrics. Train loss/accuracy are running averages over the
/// samples actually processed (scored before each update); val metrics use
/// the full validation split. Wall time covers selection + training compute.
struct EpochRow {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double epoch_wall_time_s = 0.0;
    std::uint64_t samples_processed = 0;
};

/// Full result of run_experiment: per-epoch rows plus the run summary and
/// the trained model.
struct ExperimentRecord {
    TrainingConfig config;
    std::vector<EpochRow> rows;
    double initial_val_accuracy = 0.0; // before any update; shared-init witness
    double initial_val_loss = 0.0;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double total_wall_time_s = 0.0;
    std::uint64_t total_samples_processed = 0;
    std::uint64_t selection_history_size = 0; // jest only; 0 otherwise
    Classifier final_model;
};

/// Train one model under the configured selection strategy: each epoch's
/// batches are filtered by the selector and only the kept rows take part in
/// the forward/backward/update. JEST scores batches with the current model
/// against a frozen copy of the initialization and accumulates selected
/// global ids in its history. Deterministic in the config seeds.
ExperimentRecord run_experiment(const TrainingConfig& cfg);

struct ComparisonRow {
    Strategy strategy = Strategy::standard;
    double train_accuracy = 0.0; // final epoch
    double val_accuracy = 0.0;   // final epoch
    double test_accuracy = 0.0;
    double total_wall_time_s = 0.0;
    std::uint64_t total_samples_processed = 0;
};

struct ComparisonReport {
    TrainingConfig base_config;
    std::vector<ComparisonRow> rows;               // one per strategy, input order
    std::vector<ExperimentRecord> records;         // aligned with rows
};

/// Run one experiment per strategy with identical data/init/shuffle seeds so
/// every metric difference is attributable to selection alone. Requires at
/// least two distinct strategies.
ComparisonReport compare_strategies(const TrainingConfig& base_cfg,
                                    const std::vector<Strategy>& strategies);

enum class MetricsFormat { csv, json };

/// CSV columns exactly `epoch,train_loss,train_acc,val_loss,val_acc,
/// epoch_time_s,samples_processed`; JSON mirrors the record (config echo,
/// epoch rows, summary fields). Re-export of the same record is
/// byte-identical.
void export_metrics(const ExperimentRecord& rec, const std::string& path, MetricsFormat format);

/// The JSON document export_metrics writes, as a string.
std::string metrics_to_json(const ExperimentRecord& rec);

/// The CSV document export_metrics writes, as a string.
std::string metrics_to_csv(const ExperimentRecord& rec);

/// Comparison report JSON: the full config echo plus one row per strategy.
std::string comparison_to_json(const ComparisonReport& report);

/// Final fully connected layer weight distribution: raw weights
/// (output-unit-major, shape [units, fan_in]), a 64-bin histogram over
/// [min, max], and min/max/mean/population-std stats.
void export_weight_summary(const Classifier& model, const std::string& path);

/// The JSON document export_weight_summary writes, as a string.
std::string weight_summary_to_json(const Classifier& model);

} // namespace saln
