#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace chartcast {

// Compact SHA-256, used for embedding-cache keys, config hashes and the
// frozen-encoder parameter hash. One-shot and incremental interfaces.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    // Finalizes and returns the 64-char lowercase hex digest.
    std::string hex_digest();

    static std::string hash_hex(std::string_view data) {
        Sha256 h;
        h.update(data);
        return h.hex_digest();
    }

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t bit_count_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
};

}  // namespace chartcast
