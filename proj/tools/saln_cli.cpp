// Command-line front end: run selections on feature files, train and compare
// models, and generate synthetic datasets.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O or format error,
// 4 numerical failure.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saln/data.hpp"
#include "saln/errors.hpp"
#include "saln/experiment.hpp"
#include "saln/rng.hpp"
#include "saln/selection.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

saln::FileFormat parse_format(const std::string& name) {
    return name == "csv" ? saln::FileFormat::csv : saln::FileFormat::binary;
}

// Shared flags for the train and compare subcommands.
struct TrainFlags {
    std::string dataset = "blobs";
    std::string input_format = "binary";
    std::string strategy = "standard";
    double filter_ratio = 0.8;
    std::size_t epochs = 25;
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    double momentum = 0.9;
    std::string arch = "linear";
    std::size_t hidden_width = 64;
    int chunk_count = 4;
    double history_weight = 0.001;
    double redundancy_weight = 0.5;
    std::uint64_t master_seed = 0;
    bool seed_given = false;
    std::size_t blob_n = 2000;
    std::size_t blob_d = 20;
    std::size_t blob_classes = 2;
    double blob_separation = 6.0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--dataset", f.dataset, "blobs or file:<path>");
    cmd->add_option("--input-format", f.input_format, "feature file format")
        ->check(CLI::IsMember({"binary", "csv"}));
    cmd->add_option("--filter-ratio", f.filter_ratio, "fraction of each batch to discard");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--batch-size", f.batch_size, "samples per batch");
    cmd->add_option("--lr", f.learning_rate, "SGD learning rate");
    cmd->add_option("--momentum", f.momentum, "SGD momentum");
    cmd->add_option("--arch", f.arch, "classifier architecture")
        ->check(CLI::IsMember({"linear", "mlp"}));
    cmd->add_option("--hidden-width", f.hidden_width, "MLP hidden layer width");
    cmd->add_option("--chunk-count", f.chunk_count, "JEST greedy rounds per batch");
    cmd->add_option("--history-weight", f.history_weight, "JEST history suppression weight");
    cmd->add_option("--redundancy-weight", f.redundancy_weight, "JEST redundancy penalty weight");
    cmd->add_option("--seed", f.master_seed, "master seed; derives the four stream seeds");
    cmd->add_option("--blob-n", f.blob_n, "blob sample count");
    cmd->add_option("--blob-d", f.blob_d, "blob feature dimension");
    cmd->add_option("--blob-classes", f.blob_classes, "blob class count");
    cmd->add_option("--blob-separation", f.blob_separation, "blob class mean separation");
}

saln::TrainingConfig config_from_flags(const TrainFlags& f) {
    saln::TrainingConfig cfg;
    cfg.epochs = f.epochs;
    cfg.batch_size = f.batch_size;
    cfg.learning_rate = f.learning_rate;
    cfg.momentum = f.momentum;
    cfg.selection.strategy = saln::strategy_from_name(f.strategy);
    cfg.selection.filter_ratio = f.filter_ratio;
    cfg.selection.chunk_count = f.chunk_count;
    cfg.selection.history_suppression_weight = f.history_weight;
    cfg.selection.redundancy_weight = f.redundancy_weight;
    cfg.architecture = f.arch == "mlp" ? saln::Architecture::mlp : saln::Architecture::linear;
    cfg.hidden_width = f.hidden_width;
    if (f.seed_given) {
        cfg.seeds.data = saln::mix_seed(f.master_seed, 1);
        cfg.seeds.init = saln::mix_seed(f.master_seed, 2);
        cfg.seeds.shuffle = saln::mix_seed(f.master_seed, 3);
        cfg.seeds.selection = saln::mix_seed(f.master_seed, 4);
    }
    if (f.dataset == "blobs") {
        cfg.source.kind = saln::DatasetSource::Kind::blobs;
        cfg.source.blobs = saln::BlobParams{f.blob_n, f.blob_d, f.blob_classes, f.blob_separation};
    } else if (f.dataset.rfind("file:", 0) == 0) {
        cfg.source.kind = saln::DatasetSource::Kind::file;
        cfg.source.path = f.dataset.substr(5);
        cfg.source.format = parse_format(f.input_format);
        if (cfg.source.path.empty()) throw saln::ConfigError("--dataset file: needs a path");
    } else {
        throw saln::ConfigError("--dataset must be 'blobs' or 'file:<path>'");
    }
    return cfg;
}

std::string sibling_json_path(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension(".json");
    return p.string();
}

int cmd_select(const std::string& input, const std::string& format, const std::string& strategy,
               double filter_ratio, std::uint64_t seed, const std::string& output) {
    const saln::Dataset ds = saln::load_features(input, parse_format(format));
    saln::FeatureBatch batch;
    batch.data = ds.features; // the whole file is one batch
    batch.batch_id = 0;

    saln::SelectionConfig cfg;
    cfg.filter_ratio = filter_ratio;
    cfg.seed = seed;

    saln::SelectionResult result;
    if (strategy == "saln") {
        cfg.strategy = saln::Strategy::saln;
        result = saln::saln_select(batch, cfg);
    } else {
        cfg.strategy = saln::Strategy::random;
        result = saln::random_select(batch.sample_count(), cfg);
    }

    const std::string doc = saln::to_json(result);
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw saln::IoError("cannot open " + output + " for writing");
    out << doc << '\n';
    out.flush();
    if (!out) throw saln::IoError("write failed on " + output);

    std::cout << "kept " << result.indices.size() << " of " << batch.sample_count()
              << " samples -> " << output << "\n";
    return 0;
}

int cmd_train(const TrainFlags& flags, const std::string& metrics_out) {
    const saln::TrainingConfig cfg = config_from_flags(flags);
    const saln::ExperimentRecord rec = saln::run_experiment(cfg);

    saln::export_metrics(rec, metrics_out, saln::MetricsFormat::csv);
    saln::export_metrics(rec, sibling_json_path(metrics_out), saln::MetricsFormat::json);

    std::cout << "strategy=" << saln::strategy_name(cfg.selection.strategy)
              << " test_acc=" << format_double(rec.test_accuracy)
              << " total_time_s=" << format_double(rec.total_wall_time_s) << "\n";
    return 0;
}

int cmd_compare(const TrainFlags& flags, const std::string& strategies_csv,
                const std::string& report_out) {
    std::vector<saln::Strategy> strategies;
    std::size_t start = 0;
    while (start <= strategies_csv.size()) {
        std::size_t comma = strategies_csv.find(',', start);
        if (comma == std::string::npos) comma = strategies_csv.size();
        strategies.push_back(saln::strategy_from_name(strategies_csv.substr(start, comma - start)));
        start = comma + 1;
    }

    const saln::TrainingConfig base = config_from_flags(flags);
    const saln::ComparisonReport report = saln::compare_strategies(base, strategies);

    std::ofstream out(report_out, std::ios::binary | std::ios::trunc);
    if (!out) throw saln::IoError("cannot open " + report_out + " for writing");
    out << saln::comparison_to_json(report) << '\n';
    out.flush();
    if (!out) throw saln::IoError("write failed on " + report_out);

    std::printf("%-10s %11s %11s %11s %14s %18s\n", "strategy", "train_acc", "val_acc",
                "test_acc", "total_time_s", "samples_processed");
    for (const saln::ComparisonRow& row : report.rows)
        std::printf("%-10s %11.4f %11.4f %11.4f %14.3f %18llu\n",
                    saln::strategy_name(row.strategy).c_str(), row.train_accuracy,
                    row.val_accuracy, row.test_accuracy, row.total_wall_time_s,
                    static_cast<unsigned long long>(row.total_samples_processed));
    std::cout << "report -> " << report_out << "\n";
    return 0;
}

int cmd_gen_data(std::size_t n, std::size_t d, std::size_t classes, double separation,
                 std::uint64_t seed, const std::string& output, const std::string& format) {
    const saln::Dataset ds = saln::generate_blobs(n, d, classes, separation, seed);
    saln::write_features(ds, output, parse_format(format));
    std::cout << "wrote " << n << "x" << d << " features (" << classes << " classes) -> "
              << output << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral and learnability-based joint batch selection for classifier training"};
    app.require_subcommand(1);

    // The filter ratio is the fraction discarded; 1.0 would keep nothing.
    const CLI::Validator ratio_check(
        [](std::string& s) -> std::string {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || !(v >= 0.0 && v < 1.0))
                return "must be in [0, 1)";
            return {};
        },
        "RATIO");

    // select ------------------------------------------------------------------
    std::string sel_input, sel_output = "selection.json", sel_strategy = "saln";
    std::string sel_format = "binary";
    double sel_ratio = 0.8;
    std::uint64_t sel_seed = 0;
    CLI::App* select = app.add_subcommand("select", "Select samples from one feature file");
    select->add_option("--input", sel_input, "feature file")->required();
    select->add_option("--output", sel_output, "selection JSON path");
    select->add_option("--strategy", sel_strategy, "selection strategy")
        ->check(CLI::IsMember({"saln", "random"}));
    select->add_option("--format", sel_format, "input file format")
        ->check(CLI::IsMember({"binary", "csv"}));
    select->add_option("--filter-ratio", sel_ratio, "fraction to discard")->check(ratio_check);
    select->add_option("--seed", sel_seed, "seed for the random strategy");

    // train -------------------------------------------------------------------
    TrainFlags train_flags;
    std::string metrics_out = "metrics.csv";
    CLI::App* train = app.add_subcommand("train", "Train one classifier under one strategy");
    add_train_flags(train, train_flags);
    train->add_option("--strategy", train_flags.strategy, "selection strategy")
        ->check(CLI::IsMember({"standard", "saln", "jest", "random"}));
    train->get_option("--filter-ratio")->check(ratio_check);
    train->add_option("--metrics-out", metrics_out, "metrics CSV path (JSON lands next to it)");

    // compare -----------------------------------------------------------------
    TrainFlags compare_flags;
    std::string strategies_csv = "standard,saln";
    std::string report_out = "comparison.json";
    CLI::App* compare = app.add_subcommand("compare", "Train once per strategy and tabulate");
    add_train_flags(compare, compare_flags);
    compare->add_option("--strategies", strategies_csv, "comma-separated strategy list");
    compare->get_option("--filter-ratio")->check(ratio_check);
    compare->add_option("--report-out", report_out, "comparison JSON path");

    // gen-data ----------------------------------------------------------------
    std::size_t gen_n = 2000, gen_d = 20, gen_classes = 2;
    double gen_separation = 6.0;
    std::uint64_t gen_seed = 0;
    std::string gen_output = "features.bin", gen_format = "binary";
    CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic blob feature file");
    gen->add_option("--n", gen_n, "sample count");
    gen->add_option("--d", gen_d, "feature dimension");
    gen->add_option("--classes", gen_classes, "class count");
    gen->add_option("--separation", gen_separation, "class mean separation");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--output", gen_output, "output path")->required();
    gen->add_option("--format", gen_format, "output format")
        ->check(CLI::IsMember({"binary", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return kExitConfig;
    }

    train_flags.seed_given = train->count("--seed") > 0;
    compare_flags.seed_given = compare->count("--seed") > 0;

    try {
        if (select->parsed())
            return cmd_select(sel_input, sel_format, sel_strategy, sel_ratio, sel_seed, sel_output);
        if (train->parsed()) return cmd_train(train_flags, metrics_out);
        if (compare->parsed()) return cmd_compare(compare_flags, strategies_csv, report_out);
        return cmd_gen_data(gen_n, gen_d, gen_classes, gen_separation, gen_seed, gen_output,
                            gen_format);
    } catch (const saln::ConvergenceFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const saln::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const saln::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const saln::NonFiniteInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const saln::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
