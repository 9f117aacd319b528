#include "saln/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "saln/errors.hpp"
#include "saln/rng.hpp"

namespace saln {

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::standard: return "standard";
        case Strategy::saln: return "saln";
        case Strategy::jest: return "jest";
        case Strategy::random: return "random";
    }
    return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "standard") return Strategy::standard;
    if (name == "saln") return Strategy::saln;
    if (name == "jest") return Strategy::jest;
    if (name == "random") return Strategy::random;
    throw ConfigError("unknown strategy: " + name);
}

std::size_t kept_count(std::size_t n, double filter_ratio) {
    if (!(filter_ratio >= 0.0 && filter_ratio < 1.0))
        throw InvalidFilterRatio("filter_ratio must be in [0, 1)");
    const double raw = static_cast<double>(n) * (1.0 - filter_ratio);
    auto kept = static_cast<std::size_t>(std::floor(raw + 1e-9));
    if (kept < 1) kept = 1;
    if (kept > n) kept = n;
    return kept;
}

namespace {

// Top-k indices by score, ties to the lower index; returned ascending.
std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

SelectionResult saln_select(const FeatureBatch& batch, const SelectionConfig& cfg) {
    const std::size_t n = batch.sample_count();
    if (n < 2) throw BatchTooSmall("saln_select: need at least 2 samples");
    const std::size_t kept = kept_count(n, cfg.filter_ratio);

    const SimilarityGraph graph = similarity_graph(batch);
    const FiedlerResult f = fiedler(graph.laplacian);

    SelectionResult result;
    result.batch_id = batch.batch_id;
    result.strategy = Strategy::saln;
    result.filter_ratio = cfg.filter_ratio;
    result.degenerate_spectrum = f.degenerate_spectrum;
    result.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.scores[i] = std::abs(f.vector[i]);
    result.indices = top_k_indices(result.scores, kept);
    return result;
}

SelectionResult jest_select(const FeatureBatch& batch, const JestState& state,
                            const SelectionConfig& cfg) {
    const std::size_t n = batch.sample_count();
    if (n < 1) throw BatchTooSmall("jest_select: empty batch");
    if (state.learner_losses.size() != n || state.reference_losses.size() != n)
        throw LengthMismatch("jest_select: loss vectors must match the batch size");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(state.learner_losses[i]) || !std::isfinite(state.reference_losses[i]))
            throw NonFiniteInput("jest_select: non-finite loss");
    if (cfg.chunk_count < 1) throw InvalidParams("jest_select: chunk_count must be >= 1");
    if (!(cfg.history_suppression_weight > 0.0 && cfg.history_suppression_weight <= 1.0))
        throw InvalidParams("jest_select: history_suppression_weight must be in (0, 1]");

    const std::size_t kept = kept_count(n, cfg.filter_ratio);

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double learnability = state.learner_losses[i] - state.reference_losses[i];
        const bool seen = state.selection_history.count(batch.global_id(i)) > 0;
        scores[i] = learnability * (seen ? cfg.history_suppression_weight : 1.0);
    }

    // The similarity matrix only matters when the redundancy penalty is on.
    Matrix similarity;
    if (cfg.redundancy_weight != 0.0) similarity = cosine_similarity_matrix(batch);

    const std::size_t chunks = std::min<std::size_t>(cfg.chunk_count, kept);
    std::vector<bool> selected(n, false);
    std::vector<std::size_t> picked;
    picked.reserve(kept);

    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
        std::size_t chunk_size = kept / chunks + (chunk < kept % chunks ? 1 : 0);

        // Marginal score against the selection from the previous chunks.
        std::vector<double> adjusted(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            double penalty = 0.0;
            if (cfg.redundancy_weight != 0.0 && !picked.empty()) {
                double max_sim = -1.0;
                for (std::size_t j : picked) max_sim = std::max(max_sim, similarity(i, j));
                penalty = cfg.redundancy_weight * max_sim;
            }
            adjusted[i] = scores[i] - penalty;
        }

        for (std::size_t step = 0; step < chunk_size; ++step) {
            std::size_t best = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (selected[i]) continue;
                if (best == n || adjusted[i] > adjusted[best]) best = i;
            }
            selected[best] = true;
            picked.push_back(best);
        }
    }

    SelectionResult result;
    result.batch_id = batch.batch_id;
    result.strategy = Strategy::jest;
    result.filter_ratio = cfg.filter_ratio;
    result.scores = std::move(scores);
    result.indices = std::move(picked);
    std::sort(result.indices.begin(), result.indices.end());
    return result;
}

SelectionResult random_select(std::size_t n, const SelectionConfig& cfg) {
    if (n < 1) throw BatchTooSmall("random_select: empty batch");
    const std::size_t kept = kept_count(n, cfg.filter_ratio);

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < kept; ++i) {
        const std::size_t j = i + bounded(rng, n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(kept);
    std::sort(pool.begin(), pool.end());

    SelectionResult result;
    result.strategy = Strategy::random;
    result.filter_ratio = cfg.filter_ratio;
    result.indices = std::move(pool);
    result.scores.assign(n, 1.0);
    return result;
}

SelectionResult standard_select(std::size_t n) {
    if (n < 1) throw BatchTooSmall("standard_select: empty batch");
    SelectionResult result;
    result.strategy = Strategy::standard;
    result.filter_ratio = 0.0;
    result.indices.resize(n);
    std::iota(result.indices.begin(), result.indices.end(), 0);
    result.scores.assign(n, 1.0);
    return result;
}

std::string to_json(const SelectionResult& result) {
    nlohmann::json doc;
    doc["batch_id"] = result.batch_id;
    doc["strategy"] = strategy_name(result.strategy);
    doc["filter_ratio"] = result.filter_ratio;
    doc["indices"] = result.indices;
    doc["scores"] = result.scores;
    doc["degenerate_spectrum"] = result.degenerate_spectrum;
    return doc.dump(2);
}

} // namespace saln
