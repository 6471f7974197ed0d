#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace fracper {

/// Subset of the points of a finite metric measure space, stored as a bitset
/// together with its cached mass (sum of member weights) and a sorted member
/// index list. Sets are built through mm_space helpers so the cached mass is
/// always consistent with the weights.
class point_set {
  public:
    point_set() = default;

    point_set(std::size_t n, std::vector<std::uint64_t> bits,
              std::vector<std::uint32_t> members, double mass)
        : n_(n), bits_(std::move(bits)), members_(std::move(members)), mass_(mass) {}

    static point_set empty(std::size_t n) {
        return point_set(n, std::vector<std::uint64_t>((n + 63) / 64, 0), {}, 0.0);
    }

    std::size_t space_size() const { return n_; }
    std::size_t size() const { return members_.size(); }
    bool is_empty() const { return members_.empty(); }
    double mass() const { return mass_; }

    bool contains(std::uint32_t i) const {
        return (bits_[i >> 6] >> (i & 63)) & 1u;
    }

    const std::vector<std::uint32_t>& members() const& { return members_; }
    std::vector<std::uint32_t> members() && { return std::move(members_); }
    const std::vector<std::uint64_t>& blocks() const { return bits_; }

    bool intersects(const point_set& other) const {
        assert(n_ == other.n_);
        const std::size_t nb = bits_.size();
        for (std::size_t b = 0; b < nb; ++b)
            if (bits_[b] & other.bits_[b]) return true;
        return false;
    }

    bool subset_of(const point_set& other) const {
        assert(n_ == other.n_);
        const std::size_t nb = bits_.size();
        for (std::size_t b = 0; b < nb; ++b)
            if (bits_[b] & ~other.bits_[b]) return false;
        return true;
    }

    bool operator==(const point_set& other) const {
        return n_ == other.n_ && bits_ == other.bits_;
    }

    std::uint64_t bits_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::uint64_t b : bits_) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return h;
    }

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint32_t> members_;
    double mass_ = 0.0;
};

} // namespace fracper
