#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace autoform {

// Streaming SHA-256 (FIPS 180-4). Used for record ids, cache keys and
// prompt-asset checksums; kept in-repo so the toolchain has no crypto
// dependency.
class Sha256 {
public:
    Sha256();

    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    // Finalizes the hash; the object must not be updated afterwards.
    std::array<std::uint8_t, 32> digest();

    // One-shot convenience: lowercase hex digest of `s`.
    static std::string hex(std::string_view s);

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buf_len_ = 0;
    std::uint64_t total_len_ = 0;
};

std::string to_hex(const std::array<std::uint8_t, 32>& digest);

} // namespace autoform
