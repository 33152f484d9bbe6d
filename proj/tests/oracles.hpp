#pragma once

// Direct dense evaluations of the model and metric formulas, written
// without any of the library's kernels. Used as ground truth in tests.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Complement NB weights, one row per class.
inline Matrix cnb_weights(const Matrix& x, const std::vector<int>& y, int n_classes, double alpha, bool normalize) {
    const std::size_t n_terms = x.empty() ? 0 : x[0].size();
    Matrix w(n_classes, std::vector<double>(n_terms, 0.0));
    for (int c = 0; c < n_classes; ++c) {
        std::vector<double> comp(n_terms, 0.0);
        double comp_total = 0.0;
        for (std::size_t i = 0; i < n_terms; ++i) {
            for (std::size_t d = 0; d < x.size(); ++d)
                if (y[d] != c) comp[i] += x[d][i];
            comp_total += comp[i];
        }
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n_terms; ++i) {
            const double theta = (alpha + comp[i]) / (alpha * static_cast<double>(n_terms) + comp_total);
            w[c][i] = std::log(theta);
            abs_sum += std::fabs(w[c][i]);
        }
        if (normalize)
            for (auto& v : w[c]) v /= abs_sum;
    }
    return w;
}

/// argmin_c sum_i t_i w_{c,i}; the first minimum wins.
inline int cnb_predict(const Matrix& w, const std::vector<double>& t) {
    int best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * w[c][i];
        if (c == 0 || s < best_score) {
            best = static_cast<int>(c);
            best_score = s;
        }
    }
    return best;
}

/// count * (ln((1+N)/(1+df)) + 1), then unit L2 norm per nonzero row.
inline Matrix tfidf(const Matrix& counts) {
    const double n = static_cast<double>(counts.size());
    const std::size_t n_terms = counts.empty() ? 0 : counts[0].size();
    std::vector<double> idf(n_terms);
    for (std::size_t i = 0; i < n_terms; ++i) {
        double df = 0.0;
        for (const auto& row : counts) df += row[i] > 0 ? 1.0 : 0.0;
        idf[i] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    }
    Matrix out = counts;
    for (auto& row : out) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n_terms; ++i) {
            row[i] *= idf[i];
            norm += row[i] * row[i];
        }
        norm = std::sqrt(norm);
        if (norm > 0)
            for (auto& v : row) v /= norm;
    }
    return out;
}

struct ClassScores {
    double precision, recall, f1;
};

/// Per-class scores of a square confusion matrix (rows true, columns predicted).
inline std::vector<ClassScores> per_class(const std::vector<std::vector<long>>& m) {
    std::vector<ClassScores> out;
    for (std::size_t c = 0; c < m.size(); ++c) {
        long tp = m[c][c], row = 0, col = 0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            row += m[c][k];
            col += m[k][c];
        }
        double p = col ? double(tp) / double(col) : 0.0;
        double r = row ? double(tp) / double(row) : 0.0;
        double f = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
        out.push_back({p, r, f});
    }
    return out;
}

}  // namespace oracle
