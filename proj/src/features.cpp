#include <curlog/features.hpp>
#include <curlog/kernels.hpp>
#include <curlog/util.hpp>

#include "stopwords_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace curlog {

std::string_view to_string(Weighting w) { return w == Weighting::tfidf ? "tfidf" : "counts"; }

Weighting weighting_from_string(std::string_view s) {
    if (s == "tfidf") return Weighting::tfidf;
    if (s == "counts") return Weighting::counts;
    throw Error("unknown weighting '" + std::string(s) + "' (expected counts or tfidf)");
}

std::set<std::string> parse_stopwords(std::string_view text) {
    std::set<std::string> words;
    for (const auto& line : split_lines(text)) {
        auto w = trim(line);
        if (w.empty() || w.front() == '#') continue;
        words.insert(to_lower(w));
    }
    return words;
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = parse_stopwords(detail::kDefaultStopwords);
    return words;
}

void FeatureConfig::validate() const {
    if (ngram_min < 1 || ngram_max < ngram_min)
        throw Error("invalid n-gram range " + std::to_string(ngram_min) + ".." + std::to_string(ngram_max));
    if (min_token_len < 1) throw Error("min_token_len must be >= 1");
}

std::string FeatureConfig::canonical() const {
    std::string words;
    for (const auto& w : stopwords) words += w + "\n";
    return "ngram=" + std::to_string(ngram_min) + "-" + std::to_string(ngram_max) +
           ";lowercase=" + (lowercase ? "1" : "0") + ";min_token_len=" + std::to_string(min_token_len) +
           ";weighting=" + std::string(to_string(weighting)) + ";stopwords=" + fingerprint(words);
}

// ---- analysis --------------------------------------------------------------

namespace {

// Bytes >= 0x80 are treated as word characters so UTF-8 words stay whole;
// only ASCII letters are case-folded.
bool token_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const FeatureConfig& config) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !token_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && token_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) continue;
        std::string_view tok = text.substr(start, i - start);
        if (code_points(tok) < static_cast<std::size_t>(config.min_token_len)) continue;
        tokens.push_back(config.lowercase ? to_lower(tok) : std::string(tok));
    }
    return tokens;
}

std::vector<std::string> remove_stopwords(std::vector<std::string> tokens, const FeatureConfig& config) {
    if (config.stopwords.empty()) return tokens;
    std::erase_if(tokens, [&](const std::string& t) { return config.stopwords.count(to_lower(t)) > 0; });
    return tokens;
}

std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int ngram_min, int ngram_max) {
    std::vector<std::string> out;
    for (int n = ngram_min; n <= ngram_max; ++n) {
        const auto len = static_cast<std::size_t>(n);
        if (tokens.size() < len) break;
        for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t k = 1; k < len; ++k) {
                gram += ' ';
                gram += tokens[i + k];
            }
            out.push_back(std::move(gram));
        }
    }
    return out;
}

std::vector<std::string> analyze(std::string_view text, const FeatureConfig& config) {
    auto tokens = remove_stopwords(tokenize(text, config), config);
    return extract_ngrams(tokens, config.ngram_min, config.ngram_max);
}

// ---- vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::pair<std::string, std::size_t>> terms_with_df, std::size_t n_docs)
    : n_docs_(n_docs) {
    std::sort(terms_with_df.begin(), terms_with_df.end());
    for (auto& [term, df] : terms_with_df) {
        if (!terms_.empty() && terms_.back() == term) throw Error("duplicate vocabulary term '" + term + "'");
        index_.emplace(term, static_cast<std::uint32_t>(terms_.size()));
        terms_.push_back(std::move(term));
        df_.push_back(df);
    }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(std::size_t index) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[index]))) + 1.0;
}

std::vector<double> Vocabulary::idf_vector() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = idf(i);
    return out;
}

std::string Vocabulary::serialize() const {
    std::string out = "#curlog-vocabulary v1 n_docs=" + std::to_string(n_docs_) + "\n";
    for (std::size_t i = 0; i < terms_.size(); ++i)
        out += terms_[i] + "\t" + std::to_string(i) + "\t" + std::to_string(df_[i]) + "\n";
    return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
    auto lines = split_lines(text);
    const std::string prefix = "#curlog-vocabulary v1 n_docs=";
    if (lines.empty() || lines[0].rfind(prefix, 0) != 0) throw Error("not a vocabulary file");
    std::size_t n_docs = 0;
    try {
        n_docs = std::stoull(lines[0].substr(prefix.size()));
    } catch (...) {
        throw Error("vocabulary header has no document count");
    }
    std::vector<std::pair<std::string, std::size_t>> terms;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto t1 = lines[i].find('\t');
        auto t2 = t1 == std::string::npos ? t1 : lines[i].find('\t', t1 + 1);
        if (t2 == std::string::npos) throw Error("vocabulary line " + std::to_string(i + 1) + " is malformed");
        std::size_t index = 0, df = 0;
        try {
            index = std::stoull(lines[i].substr(t1 + 1, t2 - t1 - 1));
            df = std::stoull(lines[i].substr(t2 + 1));
        } catch (...) {
            throw Error("vocabulary line " + std::to_string(i + 1) + " is malformed");
        }
        if (index != terms.size()) throw Error("vocabulary indices are not contiguous at line " + std::to_string(i + 1));
        terms.emplace_back(lines[i].substr(0, t1), df);
    }
    Vocabulary v(std::move(terms), n_docs);
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v.term(i - 1) < v.term(i))) throw Error("vocabulary terms are not sorted");
    return v;
}

namespace {

std::vector<std::vector<std::string>> analyze_all(std::span<const std::string> docs, const FeatureConfig& config) {
    std::vector<std::vector<std::string>> grams(docs.size());
    const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t d = 0; d < n; ++d) grams[d] = analyze(docs[d], config);
    return grams;
}

}  // namespace

Vocabulary fit_vocabulary(std::span<const std::string> docs, const FeatureConfig& config) {
    config.validate();
    if (docs.empty()) throw Error("cannot fit a vocabulary on zero documents");
    auto grams = analyze_all(docs, config);
    std::map<std::string, std::size_t> df;
    for (auto& g : grams) {
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        for (auto& term : g) ++df[term];
    }
    if (df.empty()) throw Error("empty vocabulary");
    std::vector<std::pair<std::string, std::size_t>> terms(df.begin(), df.end());
    return Vocabulary(std::move(terms), docs.size());
}

// ---- matrices --------------------------------------------------------------

std::vector<std::size_t> DocTermMatrix::empty_rows() const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < n_docs(); ++r)
        if (row_empty(r)) out.push_back(r);
    return out;
}

double DocTermMatrix::at(std::size_t r, std::uint32_t c) const {
    auto cs = row_cols(r);
    auto it = std::lower_bound(cs.begin(), cs.end(), c);
    if (it == cs.end() || *it != c) return 0.0;
    return vals[row_ptr[r] + static_cast<std::size_t>(it - cs.begin())];
}

std::string DocTermMatrix::serialize() const {
    std::string out = "#curlog-matrix v1 weighting=" + std::string(to_string(weighting)) +
                      " n_docs=" + std::to_string(n_docs()) + " n_terms=" + std::to_string(n_terms) + "\n";
    for (std::size_t r = 0; r < n_docs(); ++r) {
        out += std::to_string(r);
        auto cs = row_cols(r);
        auto vs = row_vals(r);
        for (std::size_t k = 0; k < cs.size(); ++k) out += " " + std::to_string(cs[k]) + ":" + format_double(vs[k]);
        out += '\n';
    }
    return out;
}

std::string FeatureSpace::fingerprint() const { return curlog::fingerprint(config.canonical() + "\n" + vocab.serialize()); }

FeatureSpace fit_feature_space(std::span<const std::string> docs, const FeatureConfig& config) {
    return {config, fit_vocabulary(docs, config)};
}

DocTermMatrix vectorize(std::span<const std::string> docs, const Vocabulary& vocab, const FeatureConfig& config) {
    config.validate();
    auto grams = analyze_all(docs, config);
    std::vector<std::vector<std::uint32_t>> ids(docs.size());
    for (std::size_t d = 0; d < grams.size(); ++d) {
        ids[d].reserve(grams[d].size());
        for (const auto& g : grams[d])
            if (auto idx = vocab.index_of(g)) ids[d].push_back(*idx);
    }
    return kernels::count_matrix(ids, vocab.size());
}

DocTermMatrix apply_tfidf(const DocTermMatrix& counts, const Vocabulary& vocab) {
    if (counts.weighting != Weighting::counts) throw Error("apply_tfidf expects a count matrix");
    if (counts.n_terms != vocab.size()) throw Error("matrix and vocabulary sizes differ");
    DocTermMatrix out = counts;
    auto idf = vocab.idf_vector();
    kernels::tfidf_rows(out, idf);
    return out;
}

DocTermMatrix transform(std::span<const std::string> docs, const FeatureSpace& space) {
    DocTermMatrix m = vectorize(docs, space.vocab, space.config);
    if (space.config.weighting == Weighting::tfidf) m = apply_tfidf(m, space.vocab);
    m.fingerprint = space.fingerprint();
    return m;
}

std::vector<std::pair<std::string, double>> top_terms_by_tfidf(const DocTermMatrix& matrix, const Vocabulary& vocab,
                                                               std::size_t k, TermAggregate aggregate) {
    if (matrix.weighting != Weighting::tfidf) throw Error("top_terms_by_tfidf expects a tf-idf matrix");
    if (matrix.n_terms != vocab.size()) throw Error("matrix and vocabulary sizes differ");
    std::vector<double> score(vocab.size(), 0.0);
    for (std::size_t r = 0; r < matrix.n_docs(); ++r) {
        auto cs = matrix.row_cols(r);
        auto vs = matrix.row_vals(r);
        for (std::size_t j = 0; j < cs.size(); ++j) {
            if (aggregate == TermAggregate::max) score[cs[j]] = std::max(score[cs[j]], vs[j]);
            else score[cs[j]] += vs[j];
        }
    }
    if (aggregate == TermAggregate::mean && matrix.n_docs() > 0)
        for (auto& s : score) s /= static_cast<double>(matrix.n_docs());

    std::vector<std::size_t> order(vocab.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Vocabulary order is lexicographic, so a stable sort breaks ties by term.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    order.resize(std::min(k, order.size()));
    std::vector<std::pair<std::string, double>> out;
    for (auto i : order) out.emplace_back(vocab.term(i), score[i]);
    return out;
}

}  // namespace curlog
