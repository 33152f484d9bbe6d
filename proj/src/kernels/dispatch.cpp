#include <curlog/kernels.hpp>

#include <omp.h>

namespace curlog::kernels {

namespace {

// With one thread available the OpenMP versions only add scheduling overhead.
bool use_omp(Exec exec) { return exec == Exec::parallel && omp_get_max_threads() > 1; }

}  // namespace

DocTermMatrix count_matrix(std::span<const std::vector<std::uint32_t>> doc_terms, std::size_t n_terms, Exec exec) {
    return use_omp(exec) ? omp::count_matrix(doc_terms, n_terms) : serial::count_matrix(doc_terms, n_terms);
}

void tfidf_rows(DocTermMatrix& m, std::span<const double> idf, Exec exec) {
    if (use_omp(exec)) omp::tfidf_rows(m, idf);
    else serial::tfidf_rows(m, idf);
}

Dense linear_scores(const DocTermMatrix& x, const Dense& weights, std::span<const double> bias, Exec exec) {
    return use_omp(exec) ? omp::linear_scores(x, weights, bias) : serial::linear_scores(x, weights, bias);
}

Dense class_term_totals(const DocTermMatrix& x, std::span<const std::size_t> row_class, std::size_t n_classes,
                        Exec exec) {
    return use_omp(exec) ? omp::class_term_totals(x, row_class, n_classes)
                         : serial::class_term_totals(x, row_class, n_classes);
}

}  // namespace curlog::kernels
