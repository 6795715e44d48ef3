#pragma once

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2v/data/stopwords.hpp"
#include "t2v/text/vocab.hpp"

namespace t2v {

struct MetadataRecord {
    std::string source_id;
    std::string title;
    std::string description;
    double duration_seconds = 0.0;
    std::vector<std::string> tags;
    std::string language;
};

struct CurationRules {
    i64 top_tags = 10;
    i64 min_tag_matches = 3;
    double min_duration = 10.0;
    double max_duration = 400.0;
    i64 min_meaningful_words = 5;
};

struct CurationOutcome {
    bool accepted = false;
    std::vector<std::string> reasons;  // subset of {"tags","duration","language","title"}
};

struct CurationResult {
    std::vector<i64> accepted;  // indices into the input record list
    std::vector<CurationOutcome> outcomes;
    std::vector<std::string> selected_tags;
};

inline i64 meaningful_word_count(const std::string& text, const std::set<std::string>& stopwords) {
    i64 count = 0;
    for (const auto& tok : tokenize(text)) {
        const bool numeric =
            std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); });
        if (!numeric && stopwords.count(tok) == 0) ++count;
    }
    return count;
}

// Language-code prefix check; records without a code fall back to a
// heuristic: mostly-ASCII text containing at least one English stopword.
inline bool is_english(const MetadataRecord& rec, const std::set<std::string>& stopwords) {
    if (!rec.language.empty()) {
        std::string code = rec.language;
        for (auto& c : code) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return code.rfind("en", 0) == 0;
    }
    const std::string text = rec.title + " " + rec.description;
    i64 ascii = 0, total = 0;
    for (unsigned char c : text) {
        ++total;
        if (c < 128) ++ascii;
    }
    if (total == 0 || static_cast<double>(ascii) < 0.9 * static_cast<double>(total)) return false;
    for (const auto& tok : tokenize(text))
        if (stopwords.count(tok)) return true;
    return false;
}

// Most frequent tags across the corpus (frequency desc, name asc),
// intersected with the allowlist.
inline std::vector<std::string> select_tags(const std::vector<MetadataRecord>& records,
                                            const std::set<std::string>& allowlist, i64 top_tags) {
    std::map<std::string, i64> freq;
    for (const auto& rec : records)
        for (const auto& tag : rec.tags) ++freq[tag];
    std::vector<std::pair<std::string, i64>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<i64>(ranked.size()) > top_tags) ranked.resize(static_cast<size_t>(top_tags));
    std::vector<std::string> selected;
    for (const auto& [tag, n] : ranked)
        if (allowlist.count(tag)) selected.push_back(tag);
    return selected;
}

inline CurationResult curate_metadata(const std::vector<MetadataRecord>& records,
                                      const std::set<std::string>& allowlist,
                                      const CurationRules& rules = {},
                                      const std::set<std::string>& stopwords = default_stopwords()) {
    if (records.empty()) throw std::invalid_argument("curate_metadata: no records");
    CurationResult res;
    res.selected_tags = select_tags(records, allowlist, rules.top_tags);
    const std::set<std::string> selected(res.selected_tags.begin(), res.selected_tags.end());
    res.outcomes.resize(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        auto& out = res.outcomes[i];
        i64 matches = 0;
        for (const auto& tag : rec.tags)
            if (selected.count(tag)) ++matches;
        if (matches < rules.min_tag_matches) out.reasons.push_back("tags");
        if (rec.duration_seconds < rules.min_duration || rec.duration_seconds > rules.max_duration)
            out.reasons.push_back("duration");
        if (!is_english(rec, stopwords)) out.reasons.push_back("language");
        if (meaningful_word_count(rec.title, stopwords) < rules.min_meaningful_words)
            out.reasons.push_back("title");
        out.accepted = out.reasons.empty();
        if (out.accepted) res.accepted.push_back(static_cast<i64>(i));
    }
    return res;
}

// Line-delimited JSON, one record per line; absent fields default.
inline std::vector<MetadataRecord> read_metadata_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open metadata file: " + path);
    std::vector<MetadataRecord> records;
    std::string line;
    i64 lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": bad metadata record: " + e.what());
        }
        MetadataRecord rec;
        rec.source_id = j.value("source_id", std::string{});
        rec.title = j.value("title", std::string{});
        rec.description = j.value("description", std::string{});
        rec.duration_seconds = j.value("duration_seconds", 0.0);
        rec.language = j.value("language", std::string{});
        if (j.contains("tags"))
            for (const auto& t : j.at("tags")) rec.tags.push_back(t.get<std::string>());
        records.push_back(std::move(rec));
    }
    return records;
}

// One tag per line; '#' lines are comments.
inline std::set<std::string> load_allowlist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open allowlist file: " + path);
    std::set<std::string> tags;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        tags.insert(line);
    }
    return tags;
}

}  // namespace t2v
