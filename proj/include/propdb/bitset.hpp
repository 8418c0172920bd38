#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

namespace propdb {

/// Small fixed-capacity set of indices in [0, 64), stored as a bit mask.
/// Used for variable sets and atom sets; queries are tiny, so 64 is ample.
template <typename Tag>
class IndexSet {
public:
    constexpr IndexSet() = default;
    static constexpr IndexSet from_mask(std::uint64_t m) { IndexSet s; s.mask_ = m; return s; }
    static constexpr IndexSet single(int i) { return from_mask(std::uint64_t{1} << i); }
    static constexpr IndexSet range(int n) {
        return from_mask(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
    }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr int size() const { return std::popcount(mask_); }
    constexpr bool contains(int i) const { return (mask_ >> i) & 1u; }
    constexpr void insert(int i) { mask_ |= std::uint64_t{1} << i; }
    constexpr void erase(int i) { mask_ &= ~(std::uint64_t{1} << i); }

    constexpr bool subset_of(IndexSet o) const { return (mask_ & ~o.mask_) == 0; }
    constexpr bool intersects(IndexSet o) const { return (mask_ & o.mask_) != 0; }

    constexpr IndexSet operator|(IndexSet o) const { return from_mask(mask_ | o.mask_); }
    constexpr IndexSet operator&(IndexSet o) const { return from_mask(mask_ & o.mask_); }
    constexpr IndexSet operator-(IndexSet o) const { return from_mask(mask_ & ~o.mask_); }
    constexpr IndexSet& operator|=(IndexSet o) { mask_ |= o.mask_; return *this; }
    constexpr IndexSet& operator&=(IndexSet o) { mask_ &= o.mask_; return *this; }
    constexpr IndexSet& operator-=(IndexSet o) { mask_ &= ~o.mask_; return *this; }

    constexpr bool operator==(const IndexSet&) const = default;
    constexpr auto operator<=>(const IndexSet&) const = default;

    /// Smallest member; undefined on the empty set.
    constexpr int first() const { return std::countr_zero(mask_); }

    std::vector<int> elements() const {
        std::vector<int> out;
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
        return out;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) f(std::countr_zero(m));
    }

private:
    std::uint64_t mask_ = 0;
};

struct VarTag {};
struct AtomTag {};

using VarSet = IndexSet<VarTag>;
using AtomSet = IndexSet<AtomTag>;

} // namespace propdb

template <typename Tag>
struct std::hash<propdb::IndexSet<Tag>> {
    std::size_t operator()(propdb::IndexSet<Tag> s) const noexcept {
        return std::hash<std::uint64_t>{}(s.mask());
    }
};
