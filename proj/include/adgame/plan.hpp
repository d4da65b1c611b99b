#pragma once

#include <adgame/error.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adgame {

/// Defender genotype: one bit per block-worthy edge, 1 = blocked. The budget
/// is the number of ones; every variation operator preserves it.
class BlockingPlan {
public:
    BlockingPlan() = default;
    explicit BlockingPlan(std::size_t n_bw) : bits_(n_bw, 0) {}

    static BlockingPlan from_indices(std::size_t n_bw, const std::vector<std::size_t>& blocked) {
        BlockingPlan p(n_bw);
        for (std::size_t i : blocked) p.set(i, true);
        return p;
    }

    static BlockingPlan from_string(std::string_view s) {
        BlockingPlan p(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1') throw ParseError("blocking plan must be a 0/1 string");
            p.bits_[i] = s[i] == '1';
        }
        return p;
    }

    std::size_t size() const noexcept { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool v) { bits_.at(i) = v ? 1 : 0; }
    void flip(std::size_t i) { bits_.at(i) ^= 1; }

    std::size_t budget() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

    std::vector<std::size_t> indices(bool value) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if ((bits_[i] != 0) == value) out.push_back(i);
        return out;
    }
    std::vector<std::size_t> blocked() const { return indices(true); }

    std::string to_string() const {
        std::string s(bits_.size(), '0');
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i]) s[i] = '1';
        return s;
    }

    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    bool operator==(const BlockingPlan&) const = default;
    auto operator<=>(const BlockingPlan&) const = default;  // lexicographic on the bit vector

private:
    std::vector<std::uint8_t> bits_;
};

struct BlockingPlanHash {
    std::size_t operator()(const BlockingPlan& p) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto b : p.bits()) h = (h ^ b) * 1099511628211ULL;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace adgame
