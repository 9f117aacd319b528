#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "saln/spectral.hpp"

namespace saln {

enum class Strategy { standard, saln, jest, random };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

/// Knobs shared by the selection strategies. `filter_ratio` is the fraction
/// of each batch DISCARDED; the kept count is max(1, floor(n * (1 - r))).
struct SelectionConfig {
    Strategy strategy = Strategy::saln;
    double filter_ratio = 0.8;
    int chunk_count = 4;                       // jest: number of greedy rounds
    double history_suppression_weight = 0.001; // jest: multiplier for previously selected
    double redundancy_weight = 0.5;            // jest: weight of the similarity penalty
    std::uint64_t seed = 0;                    // random only
};

/// Per-batch inputs for JEST scoring. Loss vectors are aligned with batch
/// rows; `selection_history` holds global sample ids chosen in earlier
/// batches. The selector never mutates the state.
struct JestState {
    std::vector<double> learner_losses;   // current model, per sample
    std::vector<double> reference_losses; // frozen reference model, per sample
    std::unordered_set<std::uint64_t> selection_history;
};

/// Outcome of one selection: kept indices (ascending), per-sample scores, and
/// the configuration echo needed to serialize the result on its own.
struct SelectionResult {
    int batch_id = 0;
    Strategy strategy = Strategy::standard;
    double filter_ratio = 0.0;
    std::vector<std::size_t> indices;
    std::vector<double> scores;
    bool degenerate_spectrum = false;
};

/// max(1, floor(n * (1 - filter_ratio))). Throws InvalidFilterRatio outside
/// [0, 1). A 1e-9 nudge before the floor keeps decimal ratios exact: with
/// r = 0.8 and n = 10 the product rounds to 1.9999999999999996, which must
/// still count as 2 kept samples.
std::size_t kept_count(std::size_t n, double filter_ratio);

/// Keep the samples with the largest |Fiedler component| of the batch's
/// similarity Laplacian. Ties go to the lower index.
SelectionResult saln_select(const FeatureBatch& batch, const SelectionConfig& cfg);

/// Greedy chunked selection by history-suppressed learnability
/// (learner loss - reference loss) minus a cosine-redundancy penalty against
/// everything already selected. The penalty refreshes between chunks and is
/// frozen within one, so chunk_count = kept count degenerates to one-at-a-time
/// greedy and chunk_count = 1 to a plain top-k.
SelectionResult jest_select(const FeatureBatch& batch, const JestState& state,
                            const SelectionConfig& cfg);

/// Seeded uniform sample without replacement.
SelectionResult random_select(std::size_t n, const SelectionConfig& cfg);

/// Keep everything (the no-curation baseline).
SelectionResult standard_select(std::size_t n);

/// JSON document {"batch_id", "strategy", "filter_ratio", "indices",
/// "scores", "degenerate_spectrum"}.
std::string to_json(const SelectionResult& result);

} // namespace saln
