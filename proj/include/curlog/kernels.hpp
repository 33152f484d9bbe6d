#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// curlog::kernels::serial and an OpenMP version in curlog::kernels::omp.
// The OpenMP versions preserve the serial summation order per output cell,
// so both produce bit-identical results regardless of thread count.

#include <curlog/features.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace curlog::kernels {

enum class Exec { serial, parallel };

/// Dense row-major matrix.
struct Dense {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Dense() = default;
    Dense(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

namespace serial {
/// Sorts and merges each document's term ids into a count matrix.
DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms);
void tfidf_rows(DocTermMatrix& m, std::span<const double> idf);
/// out(r, k) = bias[k] + sum_i X(r, i) * W(k, i)
Dense linear_scores(const DocTermMatrix& x, const Dense& weights, std::span<const double> bias);
/// out(c, i) = sum over rows r with row_class[r] == c of X(r, i)
Dense class_term_totals(const DocTermMatrix& x, std::span<const std::size_t> row_class, std::size_t n_classes);
}  // namespace serial

namespace omp {
DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms);
void tfidf_rows(DocTermMatrix& m, std::span<const double> idf);
Dense linear_scores(const DocTermMatrix& x, const Dense& weights, std::span<const double> bias);
Dense class_term_totals(const DocTermMatrix& x, std::span<const std::size_t> row_class, std::size_t n_classes);
}  // namespace omp

DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms,
                           Exec exec = Exec::parallel);
void tfidf_rows(DocTermMatrix& m, std::span<const double> idf, Exec exec = Exec::parallel);
Dense linear_scores(const DocTermMatrix& x, const Dense& weights, std::span<const double> bias,
                    Exec exec = Exec::parallel);
Dense class_term_totals(const DocTermMatrix& x, std::span<const std::size_t> row_class, std::size_t n_classes,
                        Exec exec = Exec::parallel);

}  // namespace curlog::kernels
