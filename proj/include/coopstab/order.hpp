#pragma once

// Componentwise partial-order predicates on R^r (standard orthant order) and
// order-interval geometry. Everything here is pure and thread-safe.

#include <cstddef>
#include <vector>

#include "coopstab/types.hpp"

namespace coopstab {

namespace detail {
inline void require_same_dim(const Vec& x, const Vec& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("order predicate: dimension mismatch");
}
}  // namespace detail

/// x <= y componentwise. `tol` widens the comparison for flow-propagated
/// points; exact comparison is the default.
inline bool leq(const Vec& x, const Vec& y, double tol = 0.0) {
    detail::require_same_dim(x, y);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] > y[i] + tol) return false;
    return true;
}

/// x < y: ordered and not equal (equality tested up to `tol`).
inline bool strictly_less(const Vec& x, const Vec& y, double tol = 0.0) {
    if (!leq(x, y, tol)) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (y[i] - x[i] > tol) return true;
    return false;
}

/// x << y: strict in every component.
inline bool strongly_less(const Vec& x, const Vec& y, double tol = 0.0) {
    detail::require_same_dim(x, y);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] >= y[i] - tol) return false;
    return true;
}

/// True iff no two points of S are related by <. A singleton is unordered.
inline bool is_unordered_set(const std::vector<Vec>& s, double tol = 0.0) {
    if (s.empty()) throw std::invalid_argument("is_unordered_set: empty set");
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
            if (strictly_less(s[i], s[j], tol) || strictly_less(s[j], s[i], tol))
                return false;
    return true;
}

/// Closed [lo, hi] or open [[lo, hi]] order interval.
struct OrderInterval {
    Vec lo;
    Vec hi;
    bool open = false;

    OrderInterval(Vec lo_, Vec hi_, bool open_ = false)
        : lo(std::move(lo_)), hi(std::move(hi_)), open(open_) {
        if (open ? !strongly_less(lo, hi) : !leq(lo, hi))
            throw std::invalid_argument("OrderInterval: endpoints not ordered");
    }

    bool contains(const Vec& x) const {
        return open ? (strongly_less(lo, x) && strongly_less(x, hi))
                    : (leq(lo, x) && leq(x, hi));
    }
};

}  // namespace coopstab
