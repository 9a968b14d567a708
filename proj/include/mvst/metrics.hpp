#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mvst {

/// Counts from one minimum-cost alignment of a hypothesis to a reference.
struct EditSummary {
    std::size_t substitutions = 0;
    std::size_t insertions = 0;
    std::size_t deletions = 0;
    std::size_t reference_length = 0;

    std::size_t errors() const { return substitutions + insertions + deletions; }
    /// (S + I + D) / N; empty for an empty reference.
    std::optional<double> wer() const
    {
        if (reference_length == 0) {
            return std::nullopt;
        }
        return static_cast<double>(errors()) / static_cast<double>(reference_length);
    }
};

/// Unit-cost Levenshtein alignment. Backtracking prefers substitution (or
/// match), then insertion, then deletion, so the counts are deterministic.
template <typename Token>
EditSummary edit_align(const std::vector<Token>& reference, const std::vector<Token>& hypothesis)
{
    const std::size_t n = reference.size(), m = hypothesis.size();
    std::vector<std::size_t> cost((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) {
        at(i, 0) = i;
    }
    for (std::size_t j = 0; j <= m; ++j) {
        at(0, j) = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t diag = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
            at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
        }
    }

    EditSummary s;
    s.reference_length = n;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const bool match = reference[i - 1] == hypothesis[j - 1];
            if (at(i, j) == at(i - 1, j - 1) + (match ? 0 : 1)) {
                s.substitutions += match ? 0 : 1;
                --i;
                --j;
                continue;
            }
        }
        if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
            ++s.insertions;
            --j;
        } else {
            ++s.deletions;
            --i;
        }
    }
    return s;
}

struct SentenceScore {
    std::string id;
    std::vector<std::string> reference;
    std::vector<std::string> hypothesis;
    EditSummary summary;
};

/// Pooled corpus scoring: sum of errors over sum of reference lengths.
struct CorpusScore {
    std::vector<SentenceScore> sentences;
    EditSummary totals;
    double wer = 0.0;

    nlohmann::json to_json() const;
    static CorpusScore from_json(const nlohmann::json& doc);
    std::string to_text() const;
};

using TokenPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

/// Throws ConfigError for an empty corpus or when every reference is empty.
CorpusScore corpus_wer(const std::vector<TokenPair>& pairs, const std::vector<std::string>& ids = {});

std::vector<std::string> split_tokens(std::string_view line);
/// One sentence per line, whitespace-separated tokens.
std::vector<std::vector<std::string>> read_token_file(const std::string& path);
void write_token_file(const std::string& path, const std::vector<std::vector<std::string>>& lines);

} // namespace mvst
