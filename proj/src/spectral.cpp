#include "saln/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saln/errors.hpp"

namespace saln {

namespace {

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * m(i, j);
    return std::sqrt(acc);
}

double offdiag_frobenius(const Matrix& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j) acc += m(i, j) * m(i, j);
    return std::sqrt(acc);
}

void check_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) throw DimensionMismatch("eig_sym: matrix not square");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol)
                throw InvalidParams("eig_sym: matrix not symmetric within tolerance");
}

// One Jacobi rotation on rows/columns (p, q), eigenvectors accumulated in v.
// Uses the tau form, which keeps the update numerically stable for any angle.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const std::size_t n = a.rows();
    const double apq = a(p, q);
    if (std::abs(apq) < 1e-300) return;

    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 1.0 / (2.0 * theta); // asymptotic form, avoids theta^2 overflow
    } else {
        const double sgn = (theta < 0.0) ? -1.0 : 1.0;
        t = sgn / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    const double app = a(p, p);
    const double aqq = a(q, q);
    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (std::size_t r = 0; r < n; ++r) {
        if (r != p && r != q) {
            const double arp = a(r, p);
            const double arq = a(r, q);
            a(r, p) = arp - s * (arq + tau * arp);
            a(p, r) = a(r, p);
            a(r, q) = arq + s * (arp - tau * arq);
            a(q, r) = a(r, q);
        }
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + tau * vrp);
        v(r, q) = vrq + s * (vrp - tau * vrq);
    }
}

// First component of magnitude > 1e-12 is made positive.
void fix_column_signs(Matrix& v) {
    const std::size_t n = v.rows();
    for (std::size_t k = 0; k < v.cols(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v(i, k)) > 1e-12) {
                if (v(i, k) < 0.0)
                    for (std::size_t r = 0; r < n; ++r) v(r, k) = -v(r, k);
                break;
            }
        }
    }
}

} // namespace

Matrix cosine_similarity_matrix(const FeatureBatch& batch) {
    const Matrix& x = batch.data;
    if (!x.all_finite()) throw NonFiniteInput("cosine_similarity_matrix: batch contains NaN/Inf");

    const std::size_t n = x.rows();
    const std::size_t d = x.cols();

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const double* r = x.row(i);
        for (std::size_t k = 0; k < d; ++k) acc += r[k] * r[k];
        norms[i] = std::sqrt(acc);
    }

    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        const double* ri = x.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            double value = 0.0;
            if (norms[i] != 0.0 && norms[j] != 0.0) {
                const double* rj = x.row(j);
                double dot = 0.0;
                for (std::size_t k = 0; k < d; ++k) dot += ri[k] * rj[k];
                value = dot / (norms[i] * norms[j]);
                value = std::clamp(value, -1.0, 1.0);
            }
            s(i, j) = value;
            s(j, i) = value;
        }
    }
    return s;
}

std::vector<double> degree_vector(const Matrix& similarity) {
    if (similarity.rows() != similarity.cols())
        throw DimensionMismatch("degree_vector: matrix not square");
    if (!similarity.all_finite()) throw NonFiniteInput("degree_vector: NaN/Inf entry");

    std::vector<double> deg(similarity.rows());
    for (std::size_t i = 0; i < similarity.rows(); ++i) {
        double acc = 0.0;
        const double* r = similarity.row(i);
        for (std::size_t j = 0; j < similarity.cols(); ++j) acc += r[j];
        deg[i] = acc;
    }
    return deg;
}

Matrix laplacian(const Matrix& similarity) {
    const std::vector<double> deg = degree_vector(similarity);
    const std::size_t n = similarity.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) l(i, j) = -similarity(i, j);
        l(i, i) = deg[i] - similarity(i, i);
    }
    return l;
}

SimilarityGraph similarity_graph(const FeatureBatch& batch) {
    SimilarityGraph g;
    g.similarity = cosine_similarity_matrix(batch);
    g.degrees = degree_vector(g.similarity);
    const std::size_t n = g.similarity.rows();
    g.laplacian = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) g.laplacian(i, j) = -g.similarity(i, j);
        g.laplacian(i, i) = g.degrees[i] - g.similarity(i, i);
    }
    return g;
}

SpectralDecomposition eig_sym_with_budget(const Matrix& m, int max_sweeps) {
    if (m.rows() == 0) throw InvalidParams("eig_sym: empty matrix");
    if (!m.all_finite()) throw NonFiniteInput("eig_sym: NaN/Inf entry");
    check_symmetric(m, 1e-10);

    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);

    const double tol = 1e-10 * frobenius_norm(m);
    bool converged = offdiag_frobenius(a) <= tol;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
        converged = offdiag_frobenius(a) <= tol;
    }
    if (!converged)
        throw ConvergenceFailure("eig_sym: off-diagonal norm above tolerance after sweep budget");

    // Ascending eigenvalue order; stable so equal eigenvalues keep sweep order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SpectralDecomposition dec;
    dec.eigenvalues.resize(n);
    dec.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        dec.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) dec.eigenvectors(r, k) = v(r, order[k]);
    }
    fix_column_signs(dec.eigenvectors);
    return dec;
}

SpectralDecomposition eig_sym(const Matrix& m) {
    return eig_sym_with_budget(m, 100);
}

FiedlerResult fiedler(const Matrix& lap) {
    if (lap.rows() < 2) throw BatchTooSmall("fiedler: need at least 2 samples");
    const SpectralDecomposition dec = eig_sym(lap);

    FiedlerResult result;
    result.vector = dec.fiedler_vector();
    result.value = dec.fiedler_value();
    // Non-unique Fiedler vector: zero gap to the eigenvalue above it, or --
    // when n == 2 and no higher eigenvalue exists -- to the kernel below it.
    result.degenerate_spectrum =
        dec.eigenvalues.size() >= 3
            ? dec.eigenvalues[2] - dec.eigenvalues[1] < 1e-9
            : dec.eigenvalues[1] - dec.eigenvalues[0] < 1e-9;
    return result;
}

std::vector<double> fiedler_vector(const Matrix& lap) {
    return fiedler(lap).vector;
}

} // namespace saln
