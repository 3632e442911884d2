#include "otbound/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "otbound/rng.hpp"

namespace otb {

Split sample_split(int n, double train_fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_split: need at least two nodes");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("sample_split: train_fraction must be in (0, 1)");
  const int m = static_cast<int>(std::floor(train_fraction * n));
  if (m < 1 || n - m < 1)
    throw std::invalid_argument("sample_split: fraction yields an empty side");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  Split s;
  s.m = m;
  s.u = n - m;
  s.seed = seed;
  s.train_indices.assign(perm.begin(), perm.begin() + m);
  s.test_indices.assign(perm.begin() + m, perm.end());
  std::sort(s.train_indices.begin(), s.train_indices.end());
  std::sort(s.test_indices.begin(), s.test_indices.end());
  return s;
}

ClassSplitView class_split_view(const Split& split, const std::vector<int>& labels,
                                int num_classes) {
  ClassSplitView v;
  v.train_by_class.resize(num_classes);
  v.test_by_class.resize(num_classes);
  v.m_c.assign(num_classes, 0);
  v.u_c.assign(num_classes, 0);
  for (int i : split.train_indices) {
    v.train_by_class[labels[i]].push_back(i);
    ++v.m_c[labels[i]];
  }
  for (int i : split.test_indices) {
    v.test_by_class[labels[i]].push_back(i);
    ++v.u_c[labels[i]];
  }
  return v;
}

}  // namespace otb
