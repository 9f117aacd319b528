#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saln/data.hpp"
#include "saln/errors.hpp"
#include "saln/experiment.hpp"

using saln::ExperimentRecord;
using saln::Strategy;
using saln::TrainingConfig;

namespace {

TrainingConfig blob_config(std::size_t n, std::size_t epochs, Strategy strategy,
                           double filter_ratio) {
    TrainingConfig cfg;
    cfg.epochs = epochs;
    cfg.source.blobs = {n, 6, 2, 6.0};
    cfg.selection.strategy = strategy;
    cfg.selection.filter_ratio = filter_ratio;
    return cfg;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool same_metrics(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& ra = a.rows[i];
        const auto& rb = b.rows[i];
        if (ra.epoch != rb.epoch || ra.train_loss != rb.train_loss ||
            ra.train_accuracy != rb.train_accuracy || ra.val_loss != rb.val_loss ||
            ra.val_accuracy != rb.val_accuracy || ra.samples_processed != rb.samples_processed)
            return false;
    }
    return a.initial_val_accuracy == b.initial_val_accuracy &&
           a.initial_val_loss == b.initial_val_loss && a.test_accuracy == b.test_accuracy &&
           a.test_loss == b.test_loss &&
           a.total_samples_processed == b.total_samples_processed &&
           a.selection_history_size == b.selection_history_size;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("run_experiment validates its configuration") {
    TrainingConfig cfg = blob_config(300, 1, Strategy::standard, 0.0);

    TrainingConfig bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.batch_size = 1;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.momentum = 1.0;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.momentum = -0.1;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.architecture = saln::Architecture::mlp;
    bad.hidden_width = 0;
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);

    bad = cfg;
    bad.train_fraction = 0.5; // fractions now sum to 0.8
    CHECK_THROWS_AS(saln::run_experiment(bad), saln::ConfigError);
}

TEST_CASE("standard strategy processes every training sample each epoch") {
    // 500 samples split 0.7/0.15/0.15 leave 350 training rows.
    const auto rec = saln::run_experiment(blob_config(500, 2, Strategy::standard, 0.0));
    REQUIRE(rec.rows.size() == 2);
    CHECK(rec.rows[0].epoch == 1);
    CHECK(rec.rows[1].epoch == 2);
    for (const auto& row : rec.rows) CHECK(row.samples_processed == 350);
    CHECK(rec.total_samples_processed == 700);
    CHECK(rec.selection_history_size == 0);
    for (const auto& row : rec.rows) {
        CHECK(row.epoch_wall_time_s >= 0.0);
        CHECK(std::isfinite(row.train_loss));
        CHECK(row.train_accuracy >= 0.0);
        CHECK(row.train_accuracy <= 1.0);
    }
}

TEST_CASE("filtering strategies process exactly the kept-count arithmetic") {
    // 350 training rows at batch 64 give batches [64x5, 30]; at r=0.8 each
    // batch keeps floor(0.2*b): 12*5 + 6 = 66 samples per epoch.
    for (Strategy s : {Strategy::saln, Strategy::jest, Strategy::random}) {
        const auto rec = saln::run_experiment(blob_config(500, 2, s, 0.8));
        for (const auto& row : rec.rows) CHECK(row.samples_processed == 66);
        CHECK(rec.total_samples_processed == 132);
    }
}

TEST_CASE("identical configs reproduce identical metrics and weights") {
    const TrainingConfig cfg = blob_config(400, 2, Strategy::saln, 0.5);
    const auto a = saln::run_experiment(cfg);
    const auto b = saln::run_experiment(cfg);
    CHECK(same_metrics(a, b));
    CHECK(saln::weights_to_json(a.final_model) == saln::weights_to_json(b.final_model));

    // A different init seed must actually change the run.
    TrainingConfig other = cfg;
    other.seeds.init = 99;
    const auto c = saln::run_experiment(other);
    CHECK(a.initial_val_loss != c.initial_val_loss);
}

TEST_CASE("strategies share initialization when seeds match") {
    const auto standard = saln::run_experiment(blob_config(400, 1, Strategy::standard, 0.0));
    const auto filtered = saln::run_experiment(blob_config(400, 1, Strategy::saln, 0.8));
    CHECK(standard.initial_val_accuracy == filtered.initial_val_accuracy);
    CHECK(standard.initial_val_loss == filtered.initial_val_loss);
}

TEST_CASE("jest accumulates a bounded selection history") {
    // Epoch 1 selects 66 distinct rows; later epochs can only add. The
    // history can never exceed the 350-row training set.
    const auto rec = saln::run_experiment(blob_config(500, 2, Strategy::jest, 0.8));
    CHECK(rec.selection_history_size >= 66);
    CHECK(rec.selection_history_size <= 132); // at most two epochs' worth
    CHECK(rec.selection_history_size <= 350);
}

TEST_CASE("mlp training runs end to end") {
    TrainingConfig cfg = blob_config(300, 1, Strategy::saln, 0.5);
    cfg.architecture = saln::Architecture::mlp;
    cfg.hidden_width = 8;
    const auto rec = saln::run_experiment(cfg);
    REQUIRE(rec.rows.size() == 1);
    CHECK(std::isfinite(rec.rows[0].train_loss));
    CHECK(std::isfinite(rec.test_loss));
    CHECK(rec.final_model.layers.size() == 2);
}

TEST_CASE("training from a feature file matches the labeled-data contract") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "saln_experiment_source.bin";
    const auto blobs = saln::generate_blobs(120, 5, 2, 6.0, 21);
    saln::write_features(blobs, path.string(), saln::FileFormat::binary);

    TrainingConfig cfg = blob_config(0, 1, Strategy::standard, 0.0);
    cfg.source.kind = saln::DatasetSource::Kind::file;
    cfg.source.path = path.string();
    const auto rec = saln::run_experiment(cfg);
    CHECK(rec.rows[0].samples_processed == 84); // 0.7 * 120

    // Unlabeled files cannot train.
    auto unlabeled = blobs;
    unlabeled.labels.clear();
    saln::write_features(unlabeled, path.string(), saln::FileFormat::binary);
    CHECK_THROWS_AS(saln::run_experiment(cfg), saln::ConfigError);
    fs::remove(path);
}

TEST_CASE("saln training reaches the pinned validation accuracy") {
    // Reference configuration: 2000-sample blobs, separation 6, linear model,
    // filter ratio 0.5, 25 epochs at the default seeds.
    TrainingConfig cfg;
    cfg.selection.strategy = Strategy::saln;
    cfg.selection.filter_ratio = 0.5;
    const auto rec = saln::run_experiment(cfg);
    REQUIRE(rec.rows.size() == 25);
    CHECK(rec.rows.back().val_accuracy >= 0.90);
    // Work reduction: 1400 training rows -> batches [64x21, 56] -> 700 kept.
    CHECK(rec.rows.back().samples_processed == 700);
}

TEST_CASE("compare_strategies isolates selection as the only difference") {
    const TrainingConfig base = blob_config(400, 2, Strategy::standard, 0.8);
    const std::vector<Strategy> strategies = {Strategy::standard, Strategy::saln,
                                              Strategy::jest, Strategy::random};
    const auto report = saln::compare_strategies(base, strategies);
    REQUIRE(report.rows.size() == 4);
    REQUIRE(report.records.size() == 4);

    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(report.rows[i].strategy == strategies[i]);
        CHECK(report.records[i].config.selection.strategy == strategies[i]);
        // Shared data/init/shuffle seeds: identical starting point everywhere.
        CHECK(report.records[i].initial_val_accuracy ==
              report.records[0].initial_val_accuracy);
    }

    // 280 training rows: standard sees all 560 over 2 epochs; the filtering
    // strategies see 52 per epoch (4*12 + 4).
    CHECK(report.rows[0].total_samples_processed == 560);
    for (std::size_t i = 1; i < 4; ++i) CHECK(report.rows[i].total_samples_processed == 104);
}

TEST_CASE("compare_strategies rejects short or duplicated strategy lists") {
    const TrainingConfig base = blob_config(300, 1, Strategy::standard, 0.5);
    CHECK_THROWS_AS(saln::compare_strategies(base, {Strategy::saln}), saln::ConfigError);
    CHECK_THROWS_AS(saln::compare_strategies(base, {Strategy::saln, Strategy::saln}),
                    saln::ConfigError);
}

TEST_CASE("metrics CSV has the exact documented layout and round-trips") {
    const auto rec = saln::run_experiment(blob_config(300, 2, Strategy::random, 0.5));
    const std::string csv = saln::metrics_to_csv(rec);

    std::vector<std::string> lines;
    std::istringstream stream(csv);
    for (std::string line; std::getline(stream, line);) lines.push_back(line);
    REQUIRE(lines.size() == 3); // header + one line per epoch
    CHECK(lines[0] == "epoch,train_loss,train_acc,val_loss,val_acc,epoch_time_s,"
                      "samples_processed");

    // Parse a data line back and compare against the record.
    for (std::size_t e = 0; e < 2; ++e) {
        std::istringstream row(lines[1 + e]);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 7);
        CHECK(std::stoull(cells[0]) == rec.rows[e].epoch);
        CHECK(std::abs(std::stod(cells[1]) - rec.rows[e].train_loss) <= 1e-9);
        CHECK(std::abs(std::stod(cells[2]) - rec.rows[e].train_accuracy) <= 1e-9);
        CHECK(std::abs(std::stod(cells[3]) - rec.rows[e].val_loss) <= 1e-9);
        CHECK(std::abs(std::stod(cells[4]) - rec.rows[e].val_accuracy) <= 1e-9);
        CHECK(std::stoull(cells[6]) == rec.rows[e].samples_processed);
    }

    // Re-export is byte-identical.
    CHECK(saln::metrics_to_csv(rec) == csv);

    namespace fs = std::filesystem;
    const fs::path p1 = fs::temp_directory_path() / "saln_metrics_1.csv";
    const fs::path p2 = fs::temp_directory_path() / "saln_metrics_2.csv";
    saln::export_metrics(rec, p1.string(), saln::MetricsFormat::csv);
    saln::export_metrics(rec, p2.string(), saln::MetricsFormat::csv);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1) == csv);
    fs::remove(p1);
    fs::remove(p2);

    CHECK_THROWS_AS(
        saln::export_metrics(rec, "/nonexistent_dir_saln/metrics.csv",
                             saln::MetricsFormat::csv),
        saln::IoError);
}

TEST_CASE("metrics JSON mirrors the record and echoes the config") {
    TrainingConfig cfg = blob_config(300, 2, Strategy::jest, 0.5);
    cfg.seeds = {10, 20, 30, 40};
    const auto rec = saln::run_experiment(cfg);
    const auto doc = nlohmann::json::parse(saln::metrics_to_json(rec));

    CHECK(doc.contains("test_accuracy"));
    CHECK(doc.contains("total_wall_time_s"));
    CHECK(doc["test_accuracy"].get<double>() == rec.test_accuracy);
    CHECK(doc["initial_val_accuracy"].get<double>() == rec.initial_val_accuracy);
    CHECK(doc["total_samples_processed"].get<std::uint64_t>() == rec.total_samples_processed);
    CHECK(doc["selection_history_size"].get<std::uint64_t>() == rec.selection_history_size);

    REQUIRE(doc["epochs"].size() == 2);
    CHECK(doc["epochs"][0]["epoch"] == 1);
    CHECK(doc["epochs"][1]["val_acc"].get<double>() == rec.rows[1].val_accuracy);
    CHECK(doc["epochs"][1]["samples_processed"].get<std::uint64_t>() ==
          rec.rows[1].samples_processed);

    const auto& conf = doc["config"];
    CHECK(conf["strategy"] == "jest");
    CHECK(conf["filter_ratio"] == 0.5);
    CHECK(conf["epochs"] == 2);
    CHECK(conf["batch_size"] == 64);
    CHECK(conf["seeds"]["data"] == 10);
    CHECK(conf["seeds"]["init"] == 20);
    CHECK(conf["seeds"]["shuffle"] == 30);
    CHECK(conf["seeds"]["selection"] == 40);

    CHECK(saln::metrics_to_json(rec) == saln::metrics_to_json(rec));
}

TEST_CASE("comparison JSON contains one row per strategy plus the config") {
    const TrainingConfig base = blob_config(300, 1, Strategy::standard, 0.8);
    const auto report =
        saln::compare_strategies(base, {Strategy::standard, Strategy::saln});
    const auto doc = nlohmann::json::parse(saln::comparison_to_json(report));

    CHECK(doc.contains("config"));
    REQUIRE(doc["rows"].size() == 2);
    CHECK(doc["rows"][0]["strategy"] == "standard");
    CHECK(doc["rows"][1]["strategy"] == "saln");
    for (const auto& row : doc["rows"]) {
        CHECK(row.contains("train_acc"));
        CHECK(row.contains("val_acc"));
        CHECK(row.contains("test_acc"));
        CHECK(row.contains("total_time_s"));
        CHECK(row.contains("samples_processed"));
    }
}

TEST_CASE("weight summary reports stats, shape, and a conserving histogram") {
    const auto rec = saln::run_experiment(blob_config(300, 1, Strategy::standard, 0.0));
    const auto doc = nlohmann::json::parse(saln::weight_summary_to_json(rec.final_model));

    CHECK(doc["layer"] == "fc");
    REQUIRE(doc["shape"].size() == 2);
    const auto units = doc["shape"][0].get<std::size_t>();
    const auto fan_in = doc["shape"][1].get<std::size_t>();
    CHECK(units == 2);
    CHECK(fan_in == 6);
    CHECK(doc["weights"].size() == units * fan_in);

    CHECK(doc["histogram"]["bin_count"] == 64);
    REQUIRE(doc["histogram"]["counts"].size() == 64);
    std::uint64_t total = 0;
    for (const auto& c : doc["histogram"]["counts"]) total += c.get<std::uint64_t>();
    CHECK(total == units * fan_in); // every weight lands in exactly one bin

    const double lo = doc["stats"]["min"].get<double>();
    const double hi = doc["stats"]["max"].get<double>();
    const double mean = doc["stats"]["mean"].get<double>();
    CHECK(lo <= mean);
    CHECK(mean <= hi);
    CHECK(doc["stats"]["std"].get<double>() >= 0.0);
}

TEST_CASE("weight summary of an all-zero layer collapses to one bin") {
    saln::Classifier zero = saln::make_classifier(saln::Architecture::linear, 4, 3, 0, 1);
    for (double& v : zero.layers[0].weight.values()) v = 0.0;
    const auto doc = nlohmann::json::parse(saln::weight_summary_to_json(zero));

    CHECK(doc["stats"]["std"] == 0.0);
    CHECK(doc["stats"]["min"] == 0.0);
    CHECK(doc["stats"]["max"] == 0.0);
    CHECK(doc["histogram"]["counts"][0] == 12);
    for (std::size_t b = 1; b < 64; ++b) CHECK(doc["histogram"]["counts"][b] == 0);

    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "saln_weights.json";
    saln::export_weight_summary(zero, path.string());
    CHECK(slurp(path) == saln::weight_summary_to_json(zero));
    fs::remove(path);
}

} // TEST_SUITE
