#include <curlog/features.hpp>
#include <curlog/kernels.hpp>
#include <curlog/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <map>

using namespace curlog;

namespace {

struct Workload {
    DocTermMatrix x;
    std::vector<std::size_t> row_class;
    kernels::Dense weights;
    std::vector<double> bias;
    std::vector<std::vector<std::uint32_t>> doc_terms;
    std::vector<double> idf;
};

/// Synthetic fragments replicated to `docs` rows.
const Workload& workload(std::size_t docs) {
    static std::map<std::size_t, Workload> cache;
    auto [it, fresh] = cache.try_emplace(docs);
    if (!fresh) return it->second;
    Workload& w = it->second;
    synthetic::LabelOptions opts;
    opts.count = docs;
    auto labels = synthetic::labels(opts);
    auto space = fit_feature_space(labels.texts(), FeatureConfig{});
    w.x = transform(labels.texts(), space);
    for (auto a : labels.labels()) w.row_class.push_back(index_of(a));
    w.weights = kernels::Dense(kActionCount, w.x.n_terms);
    for (std::size_t i = 0; i < w.weights.data.size(); ++i) w.weights.data[i] = double(i % 17) / 17.0 - 0.5;
    w.bias.assign(kActionCount, 0.1);
    for (std::size_t r = 0; r < w.x.n_docs(); ++r) {
        auto cols = w.x.row_cols(r);
        w.doc_terms.emplace_back(cols.begin(), cols.end());
    }
    for (std::size_t i = 0; i < space.vocab.size(); ++i) w.idf.push_back(space.vocab.idf(i));
    return w;
}

bool omp_of(const benchmark::State& state) { return state.range(1) != 0; }

void BM_LinearScores(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(omp_of(state) ? kernels::omp::linear_scores(w.x, w.weights, w.bias)
                                                                 : kernels::serial::linear_scores(w.x, w.weights, w.bias));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ClassTermTotals(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(omp_of(state) ? kernels::omp::class_term_totals(w.x, w.row_class, kActionCount)
                                               : kernels::serial::class_term_totals(w.x, w.row_class, kActionCount));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CountMatrix(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(omp_of(state) ? kernels::omp::count_matrix(w.doc_terms, w.x.n_terms)
                                               : kernels::serial::count_matrix(w.doc_terms, w.x.n_terms));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TfidfRows(benchmark::State& state) {
    const auto& w = workload(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        state.PauseTiming();
        DocTermMatrix m = w.x;
        state.ResumeTiming();
        if (omp_of(state)) kernels::omp::tfidf_rows(m, w.idf);
        else kernels::serial::tfidf_rows(m, w.idf);
        benchmark::DoNotOptimize(m.vals.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Second argument: 0 serial, 1 OpenMP.
void sizes(benchmark::internal::Benchmark* b) {
    for (long docs : {1000L, 20000L})
        for (long exec : {0L, 1L}) b->Args({docs, exec});
}

}  // namespace

BENCHMARK(BM_LinearScores)->Apply(sizes);
BENCHMARK(BM_ClassTermTotals)->Apply(sizes);
BENCHMARK(BM_CountMatrix)->Apply(sizes);
BENCHMARK(BM_TfidfRows)->Apply(sizes);

BENCHMARK_MAIN();
