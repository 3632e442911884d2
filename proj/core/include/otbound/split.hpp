#pragma once

#include <cstdint>
#include <vector>

namespace otb {

// A random partition of node indices into train and test sides.
struct Split {
  int m = 0;  // train count
  int u = 0;  // test count
  std::vector<int> train_indices;  // sorted ascending
  std::vector<int> test_indices;   // sorted ascending
  std::uint64_t seed = 0;
};

// Seeded Fisher-Yates shuffle of 0..n-1; the first floor(train_fraction*n)
// indices become the train side. Throws if either side would be empty.
Split sample_split(int n, double train_fraction, std::uint64_t seed);

// Per-class view of a split: index lists and counts conditioned on label.
struct ClassSplitView {
  std::vector<std::vector<int>> train_by_class;  // size K
  std::vector<std::vector<int>> test_by_class;   // size K
  std::vector<int> m_c;
  std::vector<int> u_c;
};

ClassSplitView class_split_view(const Split& split, const std::vector<int>& labels,
                                int num_classes);

}  // namespace otb
