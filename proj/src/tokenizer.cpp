#include "chartcast/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "chartcast/errors.hpp"

namespace chartcast::clip {

namespace {

std::string codepoint_utf8(int cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

std::vector<std::string> build_byte_units() {
    // GPT-2 byte-to-unicode table: printable ranges map to themselves, the
    // remaining bytes get codepoints 256+n.
    std::vector<int> cps(256, -1);
    for (int b = '!'; b <= '~'; ++b) cps[b] = b;
    for (int b = 0xA1; b <= 0xAC; ++b) cps[b] = b;
    for (int b = 0xAE; b <= 0xFF; ++b) cps[b] = b;
    int next = 256;
    for (int b = 0; b < 256; ++b) {
        if (cps[b] < 0) cps[b] = next++;
    }
    std::vector<std::string> units(256);
    for (int b = 0; b < 256; ++b) units[b] = codepoint_utf8(cps[b]);
    return units;
}

bool is_ascii_letter(unsigned char c) { return std::isalpha(c) != 0; }
bool is_ascii_digit(unsigned char c) { return std::isdigit(c) != 0; }

// CLIP-style word splitting for ASCII text: contractions, letter runs,
// single digits, punctuation runs.
std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == ' ') {
            ++i;
            continue;
        }
        if (c == '\'') {
            static const char* suffixes[] = {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"};
            bool matched = false;
            for (const char* s : suffixes) {
                const std::size_t len = std::char_traits<char>::length(s);
                if (text.compare(i, len, s) == 0) {
                    words.emplace_back(text.substr(i, len));
                    i += len;
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }
        if (is_ascii_letter(c)) {
            std::size_t j = i;
            while (j < text.size() && is_ascii_letter(static_cast<unsigned char>(text[j]))) ++j;
            words.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        if (is_ascii_digit(c)) {
            words.emplace_back(1, text[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size()) {
            const unsigned char cj = static_cast<unsigned char>(text[j]);
            if (cj == ' ' || is_ascii_letter(cj) || is_ascii_digit(cj)) break;
            ++j;
        }
        words.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

std::string clean(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;  // also trims leading whitespace
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(c)));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

const std::vector<std::string>& BpeTokenizer::byte_units() {
    static const std::vector<std::string> units = build_byte_units();
    return units;
}

BpeTokenizer::BpeTokenizer(const TokenizerData& data) {
    for (std::size_t i = 0; i < data.vocab.size(); ++i) {
        id_of_.emplace(data.vocab[i], static_cast<int>(i));
    }
    for (std::size_t i = 0; i < data.merges.size(); ++i) {
        merge_rank_.emplace(data.merges[i], static_cast<int>(i));
    }
    const auto sot = id_of_.find("<|startoftext|>");
    const auto eot = id_of_.find("<|endoftext|>");
    if (sot == id_of_.end() || eot == id_of_.end()) {
        throw ConfigError("tokenizer vocab lacks the start/end markers");
    }
    start_id_ = sot->second;
    end_id_ = eot->second;
}

std::vector<std::string> BpeTokenizer::word_pieces(const std::string& word) const {
    const auto& units = byte_units();
    std::vector<std::string> pieces;
    pieces.reserve(word.size());
    for (unsigned char b : word) pieces.push_back(units[b]);
    if (pieces.empty()) return pieces;
    pieces.back() += "</w>";

    while (pieces.size() > 1) {
        int best_rank = std::numeric_limits<int>::max();
        std::size_t best_at = 0;
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
            const auto it = merge_rank_.find(pieces[i] + " " + pieces[i + 1]);
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best_at = i;
            }
        }
        if (best_rank == std::numeric_limits<int>::max()) break;
        pieces[best_at] += pieces[best_at + 1];
        pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(best_at) + 1);
    }
    return pieces;
}

TokenizeResult BpeTokenizer::encode(const std::string& text, int max_len) const {
    TokenizeResult result;
    result.ids.push_back(start_id_);
    for (const auto& word : split_words(clean(text))) {
        for (const auto& piece : word_pieces(word)) {
            const auto it = id_of_.find(piece);
            if (it == id_of_.end()) {
                throw ValidationError("token piece '" + piece + "' missing from the vocab");
            }
            result.ids.push_back(it->second);
        }
    }
    result.ids.push_back(end_id_);
    if (max_len > 1 && static_cast<int>(result.ids.size()) > max_len) {
        result.truncated = static_cast<std::int64_t>(result.ids.size()) - max_len;
        result.ids.resize(static_cast<std::size_t>(max_len));
        result.ids.back() = end_id_;
    }
    return result;
}

}  // namespace chartcast::clip
