#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace autoform {

// Seeded splitmix64 stream with explicit sampling primitives. The
// pipeline promises byte-identical outputs for identical seeds, so we
// avoid <random> distributions (their sequences are implementation
// defined) and fix the algorithms here.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) by rejection; n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0) {
            throw std::invalid_argument("DetRng::below: n must be positive");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next();
        while (v >= limit) {
            v = next();
        }
        return v % n;
    }

    double unit()
    {
        return double(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    // k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k)
    {
        if (k > n) {
            throw std::invalid_argument("DetRng::sample_indices: k > n");
        }
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + below(n - i)]);
        }
        idx.resize(k);
        return idx;
    }

    // Independent child stream for a named pipeline stage.
    DetRng fork(std::string_view label) const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : label) {
            h ^= std::uint64_t(static_cast<unsigned char>(c));
            h *= 0x100000001b3ULL;
        }
        return DetRng(state_ ^ h);
    }

private:
    std::uint64_t state_;
};

} // namespace autoform
