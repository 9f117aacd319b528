#include "saln/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "saln/errors.hpp"
#include "saln/rng.hpp"

namespace saln {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate(const TrainingConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (cfg.batch_size < 2) throw ConfigError("batch_size must be at least 2");
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        throw ConfigError("learning_rate must be positive");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (cfg.architecture == Architecture::mlp && cfg.hidden_width < 1)
        throw ConfigError("hidden_width must be at least 1 for the mlp");
    if (cfg.train_fraction < 0.0 || cfg.val_fraction < 0.0 || cfg.test_fraction < 0.0 ||
        std::abs(cfg.train_fraction + cfg.val_fraction + cfg.test_fraction - 1.0) > 1e-9)
        throw ConfigError("split fractions must be non-negative and sum to 1");
}

Dataset build_dataset(const TrainingConfig& cfg) {
    if (cfg.source.kind == DatasetSource::Kind::blobs)
        return generate_blobs(cfg.source.blobs, cfg.seeds.data);
    return load_features(cfg.source.path, cfg.source.format);
}

// Copy the selected rows (and labels) out of a batch.
void subset_batch(const TrainBatch& batch, const std::vector<std::size_t>& indices, Matrix& xs,
                  std::vector<int>& ls) {
    const std::size_t d = batch.features.data.cols();
    xs = Matrix(indices.size(), d);
    ls.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        std::memcpy(xs.row(i), batch.features.data.row(indices[i]), d * sizeof(double));
        ls[i] = batch.labels[indices[i]];
    }
}

std::size_t count_correct(const Matrix& logits, const std::vector<int>& labels) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (row[j] > row[best]) best = j;
        if (best == static_cast<std::size_t>(labels[i])) ++correct;
    }
    return correct;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("write failed on " + path);
}

nlohmann::ordered_json config_to_json(const TrainingConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["epochs"] = cfg.epochs;
    doc["batch_size"] = cfg.batch_size;
    doc["learning_rate"] = cfg.learning_rate;
    doc["momentum"] = cfg.momentum;
    doc["strategy"] = strategy_name(cfg.selection.strategy);
    doc["filter_ratio"] = cfg.selection.filter_ratio;
    doc["chunk_count"] = cfg.selection.chunk_count;
    doc["history_suppression_weight"] = cfg.selection.history_suppression_weight;
    doc["redundancy_weight"] = cfg.selection.redundancy_weight;
    doc["architecture"] = cfg.architecture == Architecture::linear ? "linear" : "mlp";
    doc["hidden_width"] = cfg.hidden_width;
    doc["seeds"] = {{"data", cfg.seeds.data},
                    {"init", cfg.seeds.init},
                    {"shuffle", cfg.seeds.shuffle},
                    {"selection", cfg.seeds.selection}};
    if (cfg.source.kind == DatasetSource::Kind::blobs) {
        doc["source"] = {{"kind", "blobs"},
                         {"n", cfg.source.blobs.n},
                         {"d", cfg.source.blobs.d},
                         {"classes", cfg.source.blobs.classes},
                         {"separation", cfg.source.blobs.separation}};
    } else {
        doc["source"] = {{"kind", "file"},
                         {"path", cfg.source.path},
                         {"format", cfg.source.format == FileFormat::binary ? "binary" : "csv"}};
    }
    doc["split"] = {{"train_fraction", cfg.train_fraction},
                    {"val_fraction", cfg.val_fraction},
                    {"test_fraction", cfg.test_fraction}};
    return doc;
}

} // namespace

ExperimentRecord run_experiment(const TrainingConfig& cfg) {
    validate(cfg);

    const Dataset ds = build_dataset(cfg);
    if (!ds.has_labels()) throw ConfigError("training requires a labeled dataset");

    SplitSpec split_spec;
    split_spec.train_fraction = cfg.train_fraction;
    split_spec.val_fraction = cfg.val_fraction;
    split_spec.test_fraction = cfg.test_fraction;
    // The partition is part of the dataset's identity, so it derives from the
    // data seed; the shuffle seed only reorders batches within the train set.
    split_spec.shuffle_seed = mix_seed(cfg.seeds.data, 1);
    const Splits splits = split(ds, split_spec);

    Classifier model = make_classifier(cfg.architecture, ds.dim(), ds.class_count,
                                       cfg.hidden_width, cfg.seeds.init);
    OptimizerState opt = make_optimizer(model, cfg.learning_rate, cfg.momentum);

    // JEST scores against a frozen copy of the initialization.
    const bool is_jest = cfg.selection.strategy == Strategy::jest;
    const Classifier reference = model;
    JestState jest_state;

    ExperimentRecord rec;
    rec.config = cfg;

    const Evaluation ev0 = evaluate(model, splits.val.features, splits.val.labels);
    rec.initial_val_accuracy = ev0.accuracy;
    rec.initial_val_loss = ev0.loss;

    Matrix xs;
    std::vector<int> ls;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<TrainBatch> epoch_batches =
            batches(splits.train, cfg.batch_size, cfg.seeds.shuffle, epoch);

        double loss_total = 0.0;
        std::size_t correct_total = 0;
        std::uint64_t processed = 0;

        const Clock::time_point t0 = Clock::now();
        for (const TrainBatch& batch : epoch_batches) {
            const std::size_t nb = batch.sample_count();

            SelectionConfig sel = cfg.selection;
            SelectionResult res;
            switch (sel.strategy) {
                case Strategy::standard:
                    res = standard_select(nb);
                    break;
                case Strategy::saln:
                    res = saln_select(batch.features, sel);
                    break;
                case Strategy::jest:
                    jest_state.learner_losses =
                        per_sample_loss(forward(model, batch.features.data), batch.labels);
                    jest_state.reference_losses =
                        per_sample_loss(forward(reference, batch.features.data), batch.labels);
                    res = jest_select(batch.features, jest_state, sel);
                    break;
                case Strategy::random:
                    sel.seed = mix_seed(cfg.seeds.selection, epoch, batch.features.batch_id);
                    res = random_select(nb, sel);
                    break;
            }

            subset_batch(batch, res.indices, xs, ls);
            const Matrix logits = forward(model, xs);
            const LossAndGrad lg = cross_entropy(logits, ls);
            loss_total += lg.loss * static_cast<double>(xs.rows());
            correct_total += count_correct(logits, ls);
            const Gradients grads = backward(model, xs, lg.grad_logits);
            sgd_momentum_step(model, opt, grads);

            if (is_jest)
                for (std::size_t idx : res.indices)
                    jest_state.selection_history.insert(batch.features.global_id(idx));
            processed += xs.rows();
        }
        const double epoch_time = seconds_since(t0);

        const Evaluation val = evaluate(model, splits.val.features, splits.val.labels);
        EpochRow row;
        row.epoch = epoch + 1;
        row.train_loss = loss_total / static_cast<double>(processed);
        row.train_accuracy = static_cast<double>(correct_total) / static_cast<double>(processed);
        row.val_loss = val.loss;
        row.val_accuracy = val.accuracy;
        row.epoch_wall_time_s = epoch_time;
        row.samples_processed = processed;
        rec.rows.push_back(row);

        rec.total_wall_time_s += epoch_time;
        rec.total_samples_processed += processed;
    }

    const Evaluation test = evaluate(model, splits.test.features, splits.test.labels);
    rec.test_accuracy = test.accuracy;
    rec.test_loss = test.loss;
    rec.selection_history_size = jest_state.selection_history.size();
    rec.final_model = std::move(model);
    return rec;
}

ComparisonReport compare_strategies(const TrainingConfig& base_cfg,
                                    const std::vector<Strategy>& strategies) {
    if (strategies.size() < 2) throw ConfigError("compare_strategies needs at least 2 strategies");
    for (std::size_t i = 0; i < strategies.size(); ++i)
        for (std::size_t j = i + 1; j < strategies.size(); ++j)
            if (strategies[i] == strategies[j])
                throw ConfigError("duplicate strategy: " + strategy_name(strategies[i]));

    ComparisonReport report;
    report.base_config = base_cfg;
    for (Strategy s : strategies) {
        TrainingConfig cfg = base_cfg;
        cfg.selection.strategy = s;
        ExperimentRecord rec = run_experiment(cfg);

        ComparisonRow row;
        row.strategy = s;
        row.train_accuracy = rec.rows.back().train_accuracy;
        row.val_accuracy = rec.rows.back().val_accuracy;
        row.test_accuracy = rec.test_accuracy;
        row.total_wall_time_s = rec.total_wall_time_s;
        row.total_samples_processed = rec.total_samples_processed;
        report.rows.push_back(row);
        report.records.push_back(std::move(rec));
    }
    return report;
}

std::string metrics_to_csv(const ExperimentRecord& rec) {
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,epoch_time_s,samples_processed\n";
    for (const EpochRow& row : rec.rows) {
        out += std::to_string(row.epoch);
        out.push_back(',');
        out += format_double(row.train_loss);
        out.push_back(',');
        out += format_double(row.train_accuracy);
        out.push_back(',');
        out += format_double(row.val_loss);
        out.push_back(',');
        out += format_double(row.val_accuracy);
        out.push_back(',');
        out += format_double(row.epoch_wall_time_s);
        out.push_back(',');
        out += std::to_string(row.samples_processed);
        out.push_back('\n');
    }
    return out;
}

std::string metrics_to_json(const ExperimentRecord& rec) {
    nlohmann::ordered_json doc;
    doc["config"] = config_to_json(rec.config);
    doc["epochs"] = nlohmann::ordered_json::array();
    for (const EpochRow& row : rec.rows)
        doc["epochs"].push_back({{"epoch", row.epoch},
                                 {"train_loss", row.train_loss},
                                 {"train_acc", row.train_accuracy},
                                 {"val_loss", row.val_loss},
                                 {"val_acc", row.val_accuracy},
                                 {"epoch_time_s", row.epoch_wall_time_s},
                                 {"samples_processed", row.samples_processed}});
    doc["initial_val_accuracy"] = rec.initial_val_accuracy;
    doc["initial_val_loss"] = rec.initial_val_loss;
    doc["test_accuracy"] = rec.test_accuracy;
    doc["test_loss"] = rec.test_loss;
    doc["total_wall_time_s"] = rec.total_wall_time_s;
    doc["total_samples_processed"] = rec.total_samples_processed;
    doc["selection_history_size"] = rec.selection_history_size;
    return doc.dump(2);
}

void export_metrics(const ExperimentRecord& rec, const std::string& path, MetricsFormat format) {
    write_text_file(path, format == MetricsFormat::csv ? metrics_to_csv(rec)
                                                       : metrics_to_json(rec));
}

std::string comparison_to_json(const ComparisonReport& report) {
    nlohmann::ordered_json doc;
    doc["config"] = config_to_json(report.base_config);
    doc["rows"] = nlohmann::ordered_json::array();
    for (const ComparisonRow& row : report.rows)
        doc["rows"].push_back({{"strategy", strategy_name(row.strategy)},
                               {"train_acc", row.train_accuracy},
                               {"val_acc", row.val_accuracy},
                               {"test_acc", row.test_accuracy},
                               {"total_time_s", row.total_wall_time_s},
                               {"samples_processed", row.total_samples_processed}});
    return doc.dump(2);
}

std::string weight_summary_to_json(const Classifier& model) {
    const Layer& fc = model.final_layer();
    const std::size_t fan_in = fc.weight.rows();
    const std::size_t units = fc.weight.cols();

    std::vector<double> weights(units * fan_in);
    for (std::size_t u = 0; u < units; ++u)
        for (std::size_t i = 0; i < fan_in; ++i) weights[u * fan_in + i] = fc.weight(i, u);

    double lo = weights[0], hi = weights[0], mean = 0.0;
    for (double w : weights) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
        mean += w;
    }
    mean /= static_cast<double>(weights.size());
    double var = 0.0;
    for (double w : weights) var += (w - mean) * (w - mean);
    var /= static_cast<double>(weights.size());

    constexpr int kBins = 64;
    std::vector<std::uint64_t> counts(kBins, 0);
    const double width = hi - lo;
    for (double w : weights) {
        int bin = 0;
        if (width > 0.0) bin = std::min(kBins - 1, static_cast<int>((w - lo) / width * kBins));
        ++counts[bin];
    }

    nlohmann::ordered_json doc;
    doc["layer"] = "fc";
    doc["shape"] = {units, fan_in};
    doc["weights"] = weights;
    doc["stats"] = {{"min", lo}, {"max", hi}, {"mean", mean}, {"std", std::sqrt(var)}};
    doc["histogram"] = {{"bin_count", kBins}, {"min", lo}, {"max", hi}, {"counts", counts}};
    return doc.dump(2);
}

void export_weight_summary(const Classifier& model, const std::string& path) {
    write_text_file(path, weight_summary_to_json(model));
}

} // namespace saln
