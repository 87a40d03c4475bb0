#pragma once

#include <cstdint>
#include <vector>

namespace finq {

// Sorted, duplicate-free variable indices; empty = constant term.
using Monomial = std::vector<uint16_t>;

struct MonomialHash {
  size_t operator()(const Monomial& m) const noexcept {
    size_t h = 1469598103934665603ull;
    for (uint16_t v : m) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Union of two sorted index sets (multilinear product: repeated index folds).
Monomial monomial_union(const Monomial& a, const Monomial& b);

}  // namespace finq
