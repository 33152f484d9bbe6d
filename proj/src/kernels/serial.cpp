#include <curlog/error.hpp>
#include <curlog/kernels.hpp>

#include <algorithm>
#include <cmath>

namespace curlog::kernels::serial {

DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms) {
    DocTermMatrix m;
    m.n_terms = n_terms;
    m.weighting = Weighting::counts;
    m.row_ptr.reserve(doc_terms.size() + 1);
    std::vector<std::uint32_t> ids;
    for (const auto& doc : doc_terms) {
        ids.assign(doc.begin(), doc.end());
        std::sort(ids.begin(), ids.end());
        for (std::size_t i = 0; i < ids.size();) {
            std::size_t j = i;
            while (j < ids.size() && ids[j] == ids[i]) ++j;
            m.cols.push_back(ids[i]);
            m.vals.push_back(static_cast<double>(j - i));
            i = j;
        }
        m.row_ptr.push_back(m.cols.size());
    }
    return m;
}

void tfidf_rows(DocTermMatrix& m, std::span<const double> idf) {
    for (std::size_t r = 0; r < m.n_docs(); ++r) {
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
    for (std::size_t r = 0; r < x.n_docs(); ++r) {
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
    Dense out(n_classes, x.n_terms);
    for (std::size_t r = 0; r < x.n_docs(); ++r)
        for (std::size_t k = x.row_ptr[r]; k < x.row_ptr[r + 1]; ++k) out(row_class[r], x.cols[k]) += x.vals[k];
    return out;
}

}  // namespace curlog::kernels::serial
