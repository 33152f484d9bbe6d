#include <curlog/error.hpp>
#include <curlog/kernels.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace curlog::kernels::omp {

DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms) {
    const auto n = static_cast<std::ptrdiff_t>(doc_terms.size());
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(doc_terms.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t d = 0; d < n; ++d) {
        std::vector<std::uint32_t> ids(doc_terms[d].begin(), doc_terms[d].end());
        std::sort(ids.begin(), ids.end());
        auto& row = rows[d];
        for (std::size_t i = 0; i < ids.size();) {
            std::size_t j = i;
            while (j < ids.size() && ids[j] == ids[i]) ++j;
            row.emplace_back(ids[i], static_cast<double>(j - i));
            i = j;
        }
    }
    DocTermMatrix m;
    m.n_terms = n_terms;
    m.weighting = Weighting::counts;
    m.row_ptr.resize(doc_terms.size() + 1);
    for (std::size_t d = 0; d < rows.size(); ++d) m.row_ptr[d + 1] = m.row_ptr[d] + rows[d].size();
    m.cols.resize(m.row_ptr.back());
    m.vals.resize(m.row_ptr.back());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t d = 0; d < n; ++d) {
        std::size_t k = m.row_ptr[d];
        for (const auto& [c, v] : rows[d]) {
            m.cols[k] = c;
            m.vals[k] = v;
            ++k;
        }
    }
    return m;
}

void tfidf_rows(DocTermMatrix& m, std::span<const double> idf) {
    const auto n = static_cast<std::ptrdiff_t>(m.n_docs());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        double norm2 = 0.0;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            m.vals[k] *= idf[m.cols[k]];
            norm2 += m.vals[k] * m.vals[k];
        }
        if (norm2 > 0.0) {
            const double norm = std::sqrt(norm2);
            for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) m.vals[k] /= norm;
        }
    }
    m.weighting = Weighting::tfidf;
}

Dense linear_scores(const DocTermMatrix& x, const Dense& weights, std::span<const double> bias) {
    if (weights.cols != x.n_terms) throw Error("weight matrix width differs from feature count");
    Dense out(x.n_docs(), weights.rows);
    const auto n = static_cast<std::ptrdiff_t>(x.n_docs());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < weights.rows; ++c) {
            const double* w = weights.data.data() + c * weights.cols;
            double s = 0.0;
            for (std::size_t k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) s += x.vals[k] * w[x.cols[k]];
            out(r, c) = bias.empty() ? s : s + bias[c];
        }
    }
    return out;
}

Dense class_term_totals(const DocTermMatrix& x, std::span<const std::size_t> row_class, std::size_t n_classes) {
    if (row_class.size() != x.n_docs()) throw Error("row/class count mismatch");
    // Transpose to column-major with rows ascending inside each column, so
    // every output cell accumulates in the same order as the serial loop.
    std::vector<std::size_t> col_ptr(x.n_terms + 1, 0);
    for (auto c : x.cols) ++col_ptr[c + 1];
    for (std::size_t c = 0; c < x.n_terms; ++c) col_ptr[c + 1] += col_ptr[c];
    std::vector<std::size_t> fill(col_ptr.begin(), col_ptr.end() - 1);
    std::vector<std::size_t> row_of(x.nnz());
    std::vector<double> val_of(x.nnz());
    for (std::size_t r = 0; r < x.n_docs(); ++r)
        for (std::size_t k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) {
            std::size_t dst = fill[x.cols[k]]++;
            row_of[dst] = r;
            val_of[dst] = x.vals[k];
        }

    Dense out(n_classes, x.n_terms);
    const auto n_terms = static_cast<std::ptrdiff_t>(x.n_terms);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t c = 0; c < n_terms; ++c)
        for (std::size_t k = col_ptr[c]; k < col_ptr[c + 1]; ++k)
            out(row_class[row_of[k]], static_cast<std::size_t>(c)) += val_of[k];
    return out;
}

}  // namespace curlog::kernels::omp
