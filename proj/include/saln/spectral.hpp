#pragma once

#include <cstdint>
#include <vector>

#include "saln/matrix.hpp"

namespace saln {

/// One batch of feature rows, the unit of selection. `global_ids` maps each
/// row back to its index in the source dataset; empty means rows are their
/// own ids.
struct FeatureBatch {
    Matrix data;          // n rows (samples) x d columns (features)
    int batch_id = 0;
    std::vector<std::uint64_t> global_ids;

    std::size_t sample_count() const { return data.rows(); }
    std::uint64_t global_id(std::size_t row) const {
        return global_ids.empty() ? row : global_ids[row];
    }
};

/// Cosine similarity graph of a batch: S, its row sums, and L = D - S.
struct SimilarityGraph {
    Matrix similarity;
    std::vector<double> degrees;
    Matrix laplacian;
};

/// Full symmetric eigendecomposition. Eigenvalues ascending; column k of
/// `eigenvectors` pairs with eigenvalue k; columns orthonormal, sign-fixed so
/// the first component of magnitude > 1e-12 is positive.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;

    double fiedler_value() const { return eigenvalues[1]; }
    std::vector<double> fiedler_vector() const {
        std::vector<double> v(eigenvectors.rows());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = eigenvectors(i, 1);
        return v;
    }
};

/// Fiedler vector plus the degeneracy signal callers may want to surface.
struct FiedlerResult {
    std::vector<double> vector;
    double value = 0.0;
    bool degenerate_spectrum = false; // eigenvalues[2] - eigenvalues[1] < 1e-9
};

/// S[i][j] = cos(x_i, x_j). Zero-norm rows get similarity 0 against
/// everything; the diagonal is 1 for every row. Entries clamped to [-1, 1],
/// output exactly symmetric.
Matrix cosine_similarity_matrix(const FeatureBatch& batch);

/// Row sums of S, diagonal included.
std::vector<double> degree_vector(const Matrix& similarity);

/// L = diag(degree_vector(S)) - S.
Matrix laplacian(const Matrix& similarity);

/// Convenience: similarity, degrees and Laplacian of one batch.
SimilarityGraph similarity_graph(const FeatureBatch& batch);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Converged when the
/// off-diagonal Frobenius norm falls below 1e-10 * ||M||_F; throws
/// ConvergenceFailure if that has not happened after `max_sweeps` sweeps.
/// Bit-deterministic: identical input gives identical output.
SpectralDecomposition eig_sym_with_budget(const Matrix& m, int max_sweeps);

/// eig_sym_with_budget with the standard budget of 100 sweeps.
SpectralDecomposition eig_sym(const Matrix& m);

/// Second-smallest eigenpair of a Laplacian (n >= 2). The degenerate flag is
/// raised when the eigenvalue above the Fiedler value is within 1e-9 of it,
/// i.e. the Fiedler vector is not unique.
FiedlerResult fiedler(const Matrix& lap);

/// Just the vector; see fiedler().
std::vector<double> fiedler_vector(const Matrix& lap);

} // namespace saln
