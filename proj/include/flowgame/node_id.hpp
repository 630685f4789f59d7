#pragma once

#include "flowgame/rational.hpp"

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flowgame {

/// A vertex of the binary tree, i.e. a finite bit string (the path from the
/// root). Bits are packed MSB-first so that word-wise comparison is
/// lexicographic order with prefixes first; unused trailing bits stay zero.
class NodeId {
public:
    NodeId() = default;

    static NodeId root() { return {}; }

    static NodeId parse(std::string_view bits) {
        NodeId id;
        for (char c : bits) {
            if (c != '0' && c != '1')
                throw std::invalid_argument("node address must be a bit string: " + std::string(bits));
            id.push_back(c == '1');
        }
        return id;
    }

    /// b repeated `count` times.
    static NodeId repeat(bool b, std::size_t count) {
        NodeId id;
        id.append_run(b, count);
        return id;
    }

    std::size_t depth() const { return depth_; }
    bool is_root() const { return depth_ == 0; }

    bool bit(std::size_t i) const {
        return (words_[i / 64] >> (63 - i % 64)) & 1U;
    }

    void push_back(bool b) {
        if (depth_ % 64 == 0) words_.push_back(0);
        if (b) words_.back() |= std::uint64_t{1} << (63 - depth_ % 64);
        ++depth_;
    }

    void append_run(bool b, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) push_back(b);
    }

    NodeId child(bool b) const {
        NodeId c = *this;
        c.push_back(b);
        return c;
    }

    NodeId parent() const {
        if (depth_ == 0) throw std::logic_error("root has no parent");
        return prefix(depth_ - 1);
    }

    NodeId sibling() const {
        NodeId s = parent();
        s.push_back(!bit(depth_ - 1));
        return s;
    }

    NodeId prefix(std::size_t len) const {
        if (len > depth_) throw std::out_of_range("prefix longer than node");
        NodeId p;
        p.depth_ = len;
        p.words_.assign(words_.begin(), words_.begin() + static_cast<std::ptrdiff_t>((len + 63) / 64));
        if (len % 64 != 0) p.words_.back() &= ~std::uint64_t{0} << (64 - len % 64);
        return p;
    }

    NodeId concat(const NodeId& tail) const {
        NodeId out = *this;
        for (std::size_t i = 0; i < tail.depth_; ++i) out.push_back(tail.bit(i));
        return out;
    }

    /// The address of this node relative to `ancestor` (which must be a prefix).
    NodeId relative_to(const NodeId& ancestor) const {
        if (!ancestor.is_prefix_of(*this)) throw std::logic_error("relative_to: not an ancestor");
        NodeId out;
        for (std::size_t i = ancestor.depth_; i < depth_; ++i) out.push_back(bit(i));
        return out;
    }

    /// Extends with `fill` bits up to `depth` (no-op if already that deep).
    NodeId padded(std::size_t depth, bool fill = false) const {
        NodeId out = *this;
        if (depth > depth_) out.append_run(fill, depth - depth_);
        return out;
    }

    bool is_prefix_of(const NodeId& other) const {
        if (depth_ > other.depth_) return false;
        const std::size_t full = depth_ / 64;
        for (std::size_t i = 0; i < full; ++i)
            if (words_[i] != other.words_[i]) return false;
        if (depth_ % 64 != 0) {
            std::uint64_t mask = ~std::uint64_t{0} << (64 - depth_ % 64);
            if ((other.words_[full] & mask) != words_[full]) return false;
        }
        return true;
    }

    /// Positions holding a 1 (as used by marked branches).
    std::vector<std::size_t> ones() const {
        std::vector<std::size_t> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word != 0) {
                int lead = std::countl_zero(word);
                out.push_back(w * 64 + static_cast<std::size_t>(lead));
                word &= ~(std::uint64_t{1} << (63 - lead));
            }
        }
        return out;
    }

    std::optional<std::size_t> last_one() const {
        for (std::size_t w = words_.size(); w-- > 0;) {
            if (words_[w] != 0)
                return w * 64 + 63 - static_cast<std::size_t>(std::countr_zero(words_[w]));
        }
        return std::nullopt;
    }

    std::string str() const {
        std::string s;
        s.reserve(depth_);
        for (std::size_t i = 0; i < depth_; ++i) s.push_back(bit(i) ? '1' : '0');
        return s;
    }

    std::uint64_t hash(std::uint64_t h = 0xcbf29ce484222325ULL) const {
        h = fnv1a(&depth_, sizeof depth_, h);
        return words_.empty() ? h : fnv1a(words_.data(), words_.size() * sizeof(std::uint64_t), h);
    }

    friend bool operator==(const NodeId&, const NodeId&) = default;

    /// Lexicographic order; a proper prefix sorts before its extensions.
    friend std::strong_ordering operator<=>(const NodeId& x, const NodeId& y) {
        const std::size_t n = std::min(x.words_.size(), y.words_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (x.words_[i] != y.words_[i])
                return x.words_[i] < y.words_[i] ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        if (x.words_.size() != y.words_.size()) {
            // The longer one has extra words; if all zero, compare on depth.
            const auto& longer = x.words_.size() > y.words_.size() ? x.words_ : y.words_;
            for (std::size_t i = n; i < longer.size(); ++i) {
                if (longer[i] != 0)
                    return x.words_.size() > y.words_.size() ? std::strong_ordering::greater
                                                             : std::strong_ordering::less;
            }
        }
        return x.depth_ <=> y.depth_;
    }

    /// Compares the infinite sequences obtained by appending trailing zeros.
    friend std::strong_ordering compare_zero_padded(const NodeId& x, const NodeId& y) {
        const std::size_t n = std::max(x.words_.size(), y.words_.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t a = i < x.words_.size() ? x.words_[i] : 0;
            std::uint64_t b = i < y.words_.size() ? y.words_[i] : 0;
            if (a != b) return a < b ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        return std::strong_ordering::equal;
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t depth_ = 0;
};

}  // namespace flowgame
