#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace chartcast::clip {

struct TokenizerData {
    std::vector<std::string> vocab;    // id -> token string (byte-unit alphabet)
    std::vector<std::string> merges;   // "left right" pairs in rank order
};

struct TokenizeResult {
    std::vector<int> ids;          // includes start/end markers
    std::int64_t truncated = 0;    // tokens dropped to fit the context
};

// Byte-pair tokenizer over the GPT-2 byte-to-unicode alphabet with "</w>"
// end-of-word markers, the convention the pretrained text encoder uses.
// Input is lowercased and whitespace-collapsed; the splitter covers ASCII
// letter runs, single digits, contractions and punctuation runs.
class BpeTokenizer {
public:
    explicit BpeTokenizer(const TokenizerData& data);

    TokenizeResult encode(const std::string& text, int max_len) const;

    int start_id() const { return start_id_; }
    int end_id() const { return end_id_; }
    int vocab_size() const { return static_cast<int>(id_of_.size()); }

    static const std::vector<std::string>& byte_units();  // 256 unit strings

private:
    std::vector<std::string> word_pieces(const std::string& word) const;

    std::unordered_map<std::string, int> id_of_;
    std::unordered_map<std::string, int> merge_rank_;
    int start_id_ = -1;
    int end_id_ = -1;
};

}  // namespace chartcast::clip
