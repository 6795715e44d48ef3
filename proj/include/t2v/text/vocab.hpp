#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "t2v/core/tensor.hpp"

namespace t2v {

constexpr i64 kPadId = 0;
constexpr i64 kUnkId = 1;

inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// Token ids ordered by descending corpus frequency (ties alphabetical),
// after the reserved <pad>/<unk> ids.
class Vocabulary {
public:
    Vocabulary() : id_to_token_{"<pad>", "<unk>"} { rebuild_index(); }

    static Vocabulary build(const std::vector<std::string>& corpus) {
        if (corpus.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");
        std::unordered_map<std::string, i64> freq;
        for (const auto& line : corpus)
            for (auto& tok : tokenize(line)) ++freq[tok];
        std::vector<std::pair<std::string, i64>> items(freq.begin(), freq.end());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        Vocabulary v;
        for (auto& [tok, n] : items) v.id_to_token_.push_back(tok);
        v.rebuild_index();
        return v;
    }

    static Vocabulary from_tokens(std::vector<std::string> toks) {
        if (toks.size() < 2 || toks[0] != "<pad>" || toks[1] != "<unk>")
            throw std::invalid_argument("vocabulary missing reserved <pad>/<unk> entries");
        Vocabulary v;
        v.id_to_token_ = std::move(toks);
        v.rebuild_index();
        return v;
    }

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    i64 size() const { return static_cast<i64>(id_to_token_.size()); }

    i64 id_of(const std::string& token) const {
        auto it = token_to_id_.find(token);
        return it == token_to_id_.end() ? kUnkId : it->second;
    }

    const std::string& token_of(i64 id) const {
        if (id < 0 || id >= size()) throw std::invalid_argument("vocabulary: id out of range");
        return id_to_token_[static_cast<size_t>(id)];
    }

    std::vector<i64> encode(const std::string& text) const {
        std::vector<i64> ids;
        for (auto& tok : tokenize(text)) ids.push_back(id_of(tok));
        return ids;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write vocabulary file " + path);
        for (i64 i = 0; i < size(); ++i) f << id_to_token_[static_cast<size_t>(i)] << '\t' << i << '\n';
    }

    static Vocabulary load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot read vocabulary file " + path);
        std::map<i64, std::string> rows;
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::invalid_argument("malformed vocabulary line: " + line);
            rows[std::stoll(line.substr(tab + 1))] = line.substr(0, tab);
        }
        Vocabulary v;
        v.id_to_token_.clear();
        i64 expect = 0;
        for (auto& [id, tok] : rows) {
            if (id != expect++) throw std::invalid_argument("vocabulary ids are not contiguous");
            v.id_to_token_.push_back(tok);
        }
        if (v.id_to_token_.size() < 2 || v.id_to_token_[0] != "<pad>" || v.id_to_token_[1] != "<unk>")
            throw std::invalid_argument("vocabulary missing reserved <pad>/<unk> entries");
        v.rebuild_index();
        return v;
    }

    bool operator==(const Vocabulary& o) const { return id_to_token_ == o.id_to_token_; }

private:
    void rebuild_index() {
        token_to_id_.clear();
        for (i64 i = 0; i < size(); ++i) token_to_id_[id_to_token_[static_cast<size_t>(i)]] = i;
    }

    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, i64> token_to_id_;
};

}  // namespace t2v
