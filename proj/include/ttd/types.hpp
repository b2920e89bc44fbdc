#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttd {

/// How a year got attached to an extraction: the document's generation
/// time ("post") or a year tag in the sentence itself ("tag").
enum class SignalType : std::uint8_t { post = 0, tag = 1 };

inline constexpr int kNumSignals = 2;

inline std::optional<SignalType> parse_signal(std::string_view s) {
    if (s == "post") return SignalType::post;
    if (s == "tag") return SignalType::tag;
    return std::nullopt;
}

inline std::string_view to_string(SignalType s) {
    return s == SignalType::post ? "post" : "tag";
}

/// An (entity, value, time) tuple; the unit of truth inference.
struct Fact {
    std::string entity;
    std::string value;
    int time = 0;  // year

    friend bool operator==(const Fact&, const Fact&) = default;
};

/// A textual pattern paired with one time-signal type. The same pattern
/// text under the two signals is two distinct sources.
struct PatternSource {
    std::string pattern;
    SignalType signal = SignalType::post;

    friend bool operator==(const PatternSource&, const PatternSource&) = default;
};

/// One observation: source `source` extracted fact `fact` with total
/// frequency `count` (>= 1).
struct Extraction {
    std::uint32_t fact = 0;
    std::uint32_t source = 0;
    std::uint64_t count = 0;

    friend bool operator==(const Extraction&, const Extraction&) = default;
};

/// Raw wire-form record, one per input line. Validated and merged by
/// build_dataset; `line` is carried along for error reporting only.
struct ExtractionRecord {
    std::string entity;
    std::string value;
    long long time = 0;
    std::string pattern;
    std::string signal;
    long long count = 0;
    std::size_t line = 0;
};

/// Commonsense uniqueness rules over true facts.
enum class Rule : std::uint8_t {
    c1 = 0,  // one value matches only one entity
    c2 = 1,  // one entity matches only one value
    c3 = 2,  // one value matches only one entity at a time
    c4 = 3,  // one entity matches only one value at a time
};

inline constexpr int kNumRules = 4;

struct ConstraintSpec {
    bool c1 = false;
    bool c2 = false;
    bool c3 = false;
    bool c4 = false;

    bool active(Rule r) const {
        switch (r) {
            case Rule::c1: return c1;
            case Rule::c2: return c2;
            case Rule::c3: return c3;
            case Rule::c4: return c4;
        }
        return false;
    }

    bool any() const { return c1 || c2 || c3 || c4; }

    friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

/// One boolean label per fact, indexed like Dataset::facts.
using Labeling = std::vector<std::uint8_t>;

/// Compressed row storage for the dataset's adjacency and group indices.
struct Csr {
    std::vector<std::uint32_t> offsets;  // size = rows + 1
    std::vector<std::uint32_t> items;

    std::size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }

    std::pair<const std::uint32_t*, const std::uint32_t*> row(std::uint32_t r) const {
        return {items.data() + offsets[r], items.data() + offsets[r + 1]};
    }

    std::uint32_t row_size(std::uint32_t r) const { return offsets[r + 1] - offsets[r]; }
};

/// Builds a CSR from (row, item) pairs, preserving per-row insertion order.
inline Csr make_csr(std::size_t rows, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
    Csr csr;
    csr.offsets.assign(rows + 1, 0);
    for (const auto& [r, _] : pairs) csr.offsets[r + 1]++;
    for (std::size_t r = 1; r <= rows; ++r) csr.offsets[r] += csr.offsets[r - 1];
    csr.items.resize(pairs.size());
    std::vector<std::uint32_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
    for (const auto& [r, item] : pairs) csr.items[cursor[r]++] = item;
    return csr;
}

}  // namespace ttd
