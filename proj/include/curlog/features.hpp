#pragma once

#include <curlog/error.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace curlog {

enum class Weighting { counts, tfidf };
std::string_view to_string(Weighting w);
Weighting weighting_from_string(std::string_view s);

/// Bundled English stopword list (data/stopwords_en.txt).
const std::set<std::string>& default_stopwords();
std::set<std::string> parse_stopwords(std::string_view text);

struct FeatureConfig {
    int ngram_min = 1;
    int ngram_max = 2;
    bool lowercase = true;
    std::set<std::string> stopwords = default_stopwords();
    Weighting weighting = Weighting::tfidf;
    int min_token_len = 2;

    void validate() const;
    /// Stable text form; part of every feature fingerprint.
    std::string canonical() const;
};

/// Maximal alphanumeric runs, optionally lower-cased, of at least
/// min_token_len bytes.
std::vector<std::string> tokenize(std::string_view text, const FeatureConfig& config);
std::vector<std::string> remove_stopwords(std::vector<std::string> tokens, const FeatureConfig& config);
/// All 1-grams first, then 2-grams, ... each in positional order.
std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int ngram_min, int ngram_max);
/// tokenize -> stopword filter -> n-grams
std::vector<std::string> analyze(std::string_view text, const FeatureConfig& config);

/// Lexicographically sorted term list with document frequencies.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::pair<std::string, std::size_t>> terms_with_df, std::size_t n_docs);

    std::size_t size() const { return terms_.size(); }
    std::size_t n_docs() const { return n_docs_; }
    const std::string& term(std::size_t index) const { return terms_[index]; }
    std::size_t df(std::size_t index) const { return df_[index]; }
    std::optional<std::uint32_t> index_of(std::string_view term) const;

    /// ln((1 + n_docs) / (1 + df)) + 1
    double idf(std::size_t index) const;
    std::vector<double> idf_vector() const;

    /// "#curlog-vocabulary v1 n_docs=N" followed by term\tindex\tdf lines.
    std::string serialize() const;
    static Vocabulary deserialize(std::string_view text);

    bool operator==(const Vocabulary& other) const {
        return terms_ == other.terms_ && df_ == other.df_ && n_docs_ == other.n_docs_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::size_t> df_;
    std::size_t n_docs_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

Vocabulary fit_vocabulary(std::span<const std::string> docs, const FeatureConfig& config);

/// Compressed sparse rows; column indices are strictly increasing per row.
struct DocTermMatrix {
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;
    std::size_t n_terms = 0;
    Weighting weighting = Weighting::counts;
    /// Fingerprint of the feature space that produced the matrix.
    std::string fingerprint;

    std::size_t n_docs() const { return row_ptr.size() - 1; }
    std::size_t nnz() const { return cols.size(); }
    std::span<const std::uint32_t> row_cols(std::size_t r) const {
        return {cols.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
    }
    std::span<const double> row_vals(std::size_t r) const {
        return {vals.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
    }
    bool row_empty(std::size_t r) const { return row_ptr[r] == row_ptr[r + 1]; }
    std::vector<std::size_t> empty_rows() const;
    double at(std::size_t r, std::uint32_t c) const;

    /// doc_id followed by index:weight pairs, one row per line.
    std::string serialize() const;
};

/// Fitted vocabulary plus the configuration that produced it.
struct FeatureSpace {
    FeatureConfig config;
    Vocabulary vocab;

    std::string fingerprint() const;
};

FeatureSpace fit_feature_space(std::span<const std::string> docs, const FeatureConfig& config);

/// Raw occurrence counts against a fitted vocabulary. Out-of-vocabulary
/// n-grams are ignored; docs with none in vocabulary become empty rows.
DocTermMatrix vectorize(std::span<const std::string> docs, const Vocabulary& vocab,
                        const FeatureConfig& config);

/// count * idf, then L2-normalizes every nonzero row.
DocTermMatrix apply_tfidf(const DocTermMatrix& counts, const Vocabulary& vocab);

/// Vectorizes with the configured weighting and stamps the fingerprint.
DocTermMatrix transform(std::span<const std::string> docs, const FeatureSpace& space);

enum class TermAggregate { max, mean };

std::vector<std::pair<std::string, double>> top_terms_by_tfidf(const DocTermMatrix& matrix,
                                                               const Vocabulary& vocab, std::size_t k,
                                                               TermAggregate aggregate = TermAggregate::max);

}  // namespace curlog
