#pragma once

#include <initializer_list>
#include <map>
#include <vector>

namespace near {

// Multiset over an ordered value type. Equality compares the underlying
// (value, multiplicity) map, so it is invariant under element permutation.
template <typename T>
class Multiset {
 public:
  Multiset() = default;
  Multiset(std::initializer_list<T> items) {
    for (const T& x : items) add(x);
  }

  void add(const T& x, int count = 1) {
    counts_[x] += count;
    total_ += count;
  }

  bool remove_one(const T& x) {
    auto it = counts_.find(x);
    if (it == counts_.end()) return false;
    if (--it->second == 0) counts_.erase(it);
    --total_;
    return true;
  }

  int multiplicity(const T& x) const {
    auto it = counts_.find(x);
    return it == counts_.end() ? 0 : it->second;
  }

  int total_size() const { return total_; }
  int distinct_size() const { return static_cast<int>(counts_.size()); }
  bool empty() const { return total_ == 0; }

  // Unique elements in ascending order.
  std::vector<T> distinct_values() const {
    std::vector<T> out;
    out.reserve(counts_.size());
    for (const auto& [value, count] : counts_) out.push_back(value);
    return out;
  }

  // All elements with repetition, ascending.
  std::vector<T> elements() const {
    std::vector<T> out;
    out.reserve(total_);
    for (const auto& [value, count] : counts_)
      for (int i = 0; i < count; ++i) out.push_back(value);
    return out;
  }

  bool operator==(const Multiset&) const = default;

 private:
  std::map<T, int> counts_;
  int total_ = 0;
};

}  // namespace near
