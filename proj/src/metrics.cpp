#include "mvst/metrics.hpp"

#include "mvst/binary_io.hpp"
#include "mvst/error.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace mvst {

CorpusScore corpus_wer(const std::vector<TokenPair>& pairs, const std::vector<std::string>& ids)
{
    if (pairs.empty()) {
        throw ConfigError("corpus_wer: no sentence pairs");
    }
    if (!ids.empty() && ids.size() != pairs.size()) {
        throw ConfigError("corpus_wer: id list does not match the number of pairs");
    }
    CorpusScore score;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [ref, hyp] = pairs[i];
        SentenceScore s{ids.empty() ? std::to_string(i) : ids[i], ref, hyp, edit_align(ref, hyp)};
        score.totals.substitutions += s.summary.substitutions;
        score.totals.insertions += s.summary.insertions;
        score.totals.deletions += s.summary.deletions;
        score.totals.reference_length += s.summary.reference_length;
        score.sentences.push_back(std::move(s));
    }
    if (score.totals.reference_length == 0) {
        throw ConfigError("corpus_wer: every reference is empty");
    }
    score.wer = *score.totals.wer();
    return score;
}

namespace {

nlohmann::json summary_json(const EditSummary& s)
{
    nlohmann::json j = {{"substitutions", s.substitutions},
                        {"insertions", s.insertions},
                        {"deletions", s.deletions},
                        {"reference_length", s.reference_length}};
    auto wer = s.wer();
    j["wer"] = wer ? nlohmann::json(*wer) : nlohmann::json(nullptr);
    return j;
}

EditSummary summary_from_json(const nlohmann::json& j)
{
    EditSummary s;
    s.substitutions = j.at("substitutions").get<std::size_t>();
    s.insertions = j.at("insertions").get<std::size_t>();
    s.deletions = j.at("deletions").get<std::size_t>();
    s.reference_length = j.at("reference_length").get<std::size_t>();
    return s;
}

std::string join(const std::vector<std::string>& tokens)
{
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) {
            out += ' ';
        }
        out += t;
    }
    return out;
}

} // namespace

nlohmann::json CorpusScore::to_json() const
{
    nlohmann::json sentences_json = nlohmann::json::array();
    for (const auto& s : sentences) {
        sentences_json.push_back({{"id", s.id},
                                  {"reference", s.reference},
                                  {"hypothesis", s.hypothesis},
                                  {"summary", summary_json(s.summary)}});
    }
    return {{"schema_version", 1},
            {"totals", summary_json(totals)},
            {"wer", wer},
            {"sentences", std::move(sentences_json)}};
}

CorpusScore CorpusScore::from_json(const nlohmann::json& doc)
{
    if (doc.at("schema_version").get<int>() != 1) {
        throw DataError(DataError::Kind::version_mismatch, "score report: unsupported schema version");
    }
    CorpusScore score;
    score.totals = summary_from_json(doc.at("totals"));
    score.wer = doc.at("wer").get<double>();
    for (const auto& s : doc.at("sentences")) {
        score.sentences.push_back({s.at("id").get<std::string>(),
                                   s.at("reference").get<std::vector<std::string>>(),
                                   s.at("hypothesis").get<std::vector<std::string>>(),
                                   summary_from_json(s.at("summary"))});
    }
    return score;
}

std::string CorpusScore::to_text() const
{
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    for (const auto& s : sentences) {
        out << s.id << "  S=" << s.summary.substitutions << " I=" << s.summary.insertions
            << " D=" << s.summary.deletions << " N=" << s.summary.reference_length;
        if (auto w = s.summary.wer()) {
            out << " WER=" << *w;
        } else {
            out << " WER=n/a";
        }
        out << "\n  REF: " << join(s.reference) << "\n  HYP: " << join(s.hypothesis) << '\n';
    }
    out << "TOTAL S=" << totals.substitutions << " I=" << totals.insertions
        << " D=" << totals.deletions << " N=" << totals.reference_length << " WER=" << wer << '\n';
    return out.str();
}

std::vector<std::string> split_tokens(std::string_view line)
{
    std::vector<std::string> tokens;
    std::istringstream in{std::string(line)};
    for (std::string t; in >> t;) {
        tokens.push_back(t);
    }
    return tokens;
}

std::vector<std::vector<std::string>> read_token_file(const std::string& path)
{
    auto bytes = binio::read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<std::vector<std::string>> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(split_tokens(line));
    }
    return lines;
}

void write_token_file(const std::string& path, const std::vector<std::vector<std::string>>& lines)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError(DataError::Kind::missing_file, "cannot write file: " + path);
    }
    for (const auto& l : lines) {
        out << join(l) << '\n';
    }
}

} // namespace mvst
