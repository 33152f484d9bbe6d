#pragma once

#include <curlog/corpus.hpp>

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace curlog {

/// Half-open byte range [start, end) into a source string.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
};

struct Segment {
    Span span;
    std::string text;
};

/// Splits at newline / carriage return and at a period followed by
/// whitespace or end of text. Fragments are trimmed; empty ones dropped.
std::vector<Segment> segment_entry(std::string_view description);

struct Fragment {
    std::string fragment_id;  // <ticket_id>:<entry_index>:<ordinal>
    std::string ticket_id;
    std::string study_id;
    std::size_t entry_index = 0;
    Span span;
    std::string text;
    double apportioned_hours = 0.0;
};

struct UnattributedEntry {
    std::string ticket_id;
    std::size_t entry_index = 0;
    double hours = 0.0;
};

struct FragmentSet {
    std::vector<Fragment> fragments;
    std::vector<UnattributedEntry> empty_entries;
    double unattributable_hours = 0.0;

    /// Fragment hours plus unattributable hours: every logged hour.
    double total_hours() const;
};

/// Divides an entry's hours over its segments.
using Apportioner = std::function<std::vector<double>(double hours, std::span<const Segment>)>;

std::vector<double> equal_apportion(double hours, std::span<const Segment> segments);

FragmentSet segment_corpus(const Corpus& corpus, const Apportioner& apportion = equal_apportion);

std::string fragments_to_jsonl(const FragmentSet& set);
/// Reads fragments written by fragments_to_jsonl. Unattributed entries are
/// not part of the line format and come back empty.
FragmentSet fragments_from_jsonl(std::string_view text);

}  // namespace curlog
