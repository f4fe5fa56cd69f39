#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "teig/rng.hpp"
#include "teig/vecmat.hpp"

namespace teig {

namespace detail {

inline constexpr int kMaxOrder = 16;  // factorials stay exact in a double up to 18!

inline double factorial(int k) {
  static const std::array<double, kMaxOrder + 1> table = [] {
    std::array<double, kMaxOrder + 1> t{};
    t[0] = 1.0;
    for (int i = 1; i <= kMaxOrder; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table[k];
}

/// Visit every non-decreasing tuple of length m over {0,...,n-1} in
/// lexicographic order. f receives the tuple as a const std::vector<int>&.
template <class F>
void for_each_canonical(int order, int dim, F&& f) {
  std::vector<int> t(order, 0);
  while (true) {
    f(static_cast<const std::vector<int>&>(t));
    int p = order - 1;
    while (p >= 0 && t[p] == dim - 1) --p;
    if (p < 0) return;
    int v = t[p] + 1;
    for (int q = p; q < order; ++q) t[q] = v;
  }
}

}  // namespace detail

/// Real symmetric tensor of even order in canonical compressed form: one
/// coefficient per non-decreasing index tuple, sorted lexicographically.
/// The stored value is the tensor entry itself; multinomial multiplicities
/// are applied at contraction time. Indices are 0-based throughout the
/// library; the JSON boundary converts to the 1-based convention.
class SymTensor {
 public:
  SymTensor(int order, int dim) : order_(order), dim_(dim) { check_shape(order, dim); }

  /// Builds a tensor from (index tuple, value) pairs. Non-canonical tuples
  /// are sorted and accepted; a duplicate after sorting is an error so that
  /// silent accumulation cannot mask data bugs.
  static SymTensor from_entries(int order, int dim,
                                std::vector<std::pair<std::vector<int>, double>> entries) {
    SymTensor t(order, dim);
    for (auto& [idx, val] : entries) {
      if (static_cast<int>(idx.size()) != order)
        throw std::invalid_argument("SymTensor::from_entries: tuple length != order");
      for (int i : idx)
        if (i < 0 || i >= dim) throw std::invalid_argument("SymTensor::from_entries: index out of range");
      std::sort(idx.begin(), idx.end());
      (void)val;
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k + 1 < entries.size(); ++k)
      if (entries[k].first == entries[k + 1].first)
        throw std::invalid_argument("SymTensor::from_entries: duplicate canonical tuple");
    t.idx_.reserve(entries.size() * order);
    t.val_.reserve(entries.size());
    for (const auto& [idx, val] : entries) {
      t.idx_.insert(t.idx_.end(), idx.begin(), idx.end());
      t.val_.push_back(val);
    }
    return t;
  }

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t entry_count() const { return val_.size(); }

  const std::vector<int>& flat_indices() const { return idx_; }
  const std::vector<double>& values() const { return val_; }

  std::vector<int> entry_index(std::size_t k) const {
    return {idx_.begin() + k * order_, idx_.begin() + (k + 1) * order_};
  }
  double entry_value(std::size_t k) const { return val_[k]; }

  /// Coefficient at any index permutation; unstored entries are zero.
  double entry(std::vector<int> idx) const {
    if (static_cast<int>(idx.size()) != order_)
      throw std::invalid_argument("SymTensor::entry: tuple length != order");
    for (int i : idx)
      if (i < 0 || i >= dim_) throw std::invalid_argument("SymTensor::entry: index out of range");
    std::sort(idx.begin(), idx.end());
    std::size_t pos = find_canonical(idx);
    return pos == npos ? 0.0 : val_[pos];
  }

  /// (Ax^{m-1})_i: each stored orbit contributes to every distinct index it
  /// contains, weighted by the count of permutations led by that index.
  Vector apply_m1(const Vector& x) const {
    check_vec(x);
    const int m = order_;
    Vector out(dim_, 0.0);
    std::vector<int> uniq(m), cnt(m);
    for (std::size_t e = 0; e < val_.size(); ++e) {
      const int* t = &idx_[e * m];
      int u = collect(t, uniq, cnt);
      double perms = orbit_size(uniq, cnt, u);
      for (int j = 0; j < u; ++j) {
        double w = perms * cnt[j] / m;
        out[uniq[j]] += val_[e] * w * product_skipping(x, t, uniq[j], -1);
      }
    }
    return out;
  }

  /// (Ax^{m-2})_{pq} as a symmetric matrix. Satisfies x^T (Ax^{m-2}) x = Ax^m
  /// and (m-1) Ax^{m-2} = d(Ax^{m-1})/dx.
  SymMatrix apply_m2(const Vector& x) const {
    check_vec(x);
    const int m = order_;
    if (m < 2) throw std::logic_error("SymTensor::apply_m2: order < 2");
    SymMatrix out(dim_);
    std::vector<int> uniq(m), cnt(m);
    const double pair_slots = static_cast<double>(m) * (m - 1);
    for (std::size_t e = 0; e < val_.size(); ++e) {
      const int* t = &idx_[e * m];
      int u = collect(t, uniq, cnt);
      double perms = orbit_size(uniq, cnt, u);
      for (int j = 0; j < u; ++j) {
        for (int l = j; l < u; ++l) {
          double w;
          if (j == l) {
            if (cnt[j] < 2) continue;
            w = perms * cnt[j] * (cnt[j] - 1) / pair_slots;
          } else {
            w = perms * cnt[j] * cnt[l] / pair_slots;
          }
          // w is the count of orbit permutations whose leading two slots are
          // (uniq[j], uniq[l]); the mirrored (uniq[l], uniq[j]) count is equal.
          out.add(uniq[j], uniq[l], val_[e] * w * product_skipping(x, t, uniq[j], uniq[l]));
        }
      }
    }
    return out;
  }

  /// Ax^m = x . (Ax^{m-1})
  double value(const Vector& x) const { return dot(x, apply_m1(x)); }

  SymTensor negated() const {
    SymTensor t(*this);
    for (double& v : t.val_) v = -v;
    return t;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static void check_shape(int order, int dim) {
    if (order <= 0 || order % 2 != 0) throw std::invalid_argument("SymTensor: order must be positive and even");
    if (order > detail::kMaxOrder) throw std::invalid_argument("SymTensor: order too large");
    if (dim <= 0) throw std::invalid_argument("SymTensor: dimension must be positive");
  }

  void check_vec(const Vector& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("SymTensor: vector length != tensor dimension");
  }

  // Distinct indices of the canonical tuple t with their multiplicities.
  int collect(const int* t, std::vector<int>& uniq, std::vector<int>& cnt) const {
    int u = 0;
    for (int s = 0; s < order_; ++s) {
      if (u > 0 && t[s] == uniq[u - 1]) {
        ++cnt[u - 1];
      } else {
        uniq[u] = t[s];
        cnt[u] = 1;
        ++u;
      }
    }
    return u;
  }

  // m! / prod(cnt_j!) -- the number of distinct permutations of the tuple.
  double orbit_size(const std::vector<int>&, const std::vector<int>& cnt, int u) const {
    double p = detail::factorial(order_);
    for (int j = 0; j < u; ++j) p /= detail::factorial(cnt[j]);
    return p;
  }

  // Product of x over the tuple with one instance of skip1 (and, when
  // skip2 >= 0, one instance of skip2) left out.
  double product_skipping(const Vector& x, const int* t, int skip1, int skip2) const {
    double prod = 1.0;
    bool s1 = false, s2 = skip2 < 0;
    for (int s = 0; s < order_; ++s) {
      if (!s1 && t[s] == skip1) {
        s1 = true;
        continue;
      }
      if (!s2 && t[s] == skip2) {
        s2 = true;
        continue;
      }
      prod *= x[t[s]];
    }
    return prod;
  }

  std::size_t find_canonical(const std::vector<int>& idx) const {
    // entries are sorted lexicographically; binary search on tuples
    std::size_t lo = 0, hi = val_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      const int* t = &idx_[mid * order_];
      int c = 0;
      for (int s = 0; s < order_; ++s) {
        if (t[s] != idx[s]) {
          c = t[s] < idx[s] ? -1 : 1;
          break;
        }
      }
      if (c == 0) return mid;
      if (c < 0)
        lo = mid + 1;
      else
        hi = mid;
    }
    return npos;
  }

  int order_;
  int dim_;
  std::vector<int> idx_;  // entry_count * order, canonical non-decreasing tuples
  std::vector<double> val_;
};

/// Full n^m coefficient array indexed by unsorted tuples; input form for
/// symmetrize and the brute-force reference used in tests.
struct DenseTensor {
  int order = 0;
  int dim = 0;
  std::vector<double> a;

  DenseTensor(int order_in, int dim_in) : order(order_in), dim(dim_in) {
    if (order <= 0 || dim <= 0) throw std::invalid_argument("DenseTensor: bad shape");
    double cells = std::pow(static_cast<double>(dim), order);
    if (cells > 5e7) throw std::invalid_argument("DenseTensor: n^m too large");
    a.assign(static_cast<std::size_t>(cells + 0.5), 0.0);
  }

  std::size_t flat(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != order) throw std::invalid_argument("DenseTensor: tuple length != order");
    std::size_t f = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim) throw std::invalid_argument("DenseTensor: index out of range");
      f = f * dim + i;
    }
    return f;
  }

  double& at(const std::vector<int>& idx) { return a[flat(idx)]; }
  double at(const std::vector<int>& idx) const { return a[flat(idx)]; }
};

/// Average over all m! index permutations, entry by entry. Averaging the
/// distinct arrangements of a canonical tuple gives the same number, since
/// equal arrangements repeat with equal counts.
inline SymTensor symmetrize(const DenseTensor& d) {
  if (d.order % 2 != 0) throw std::invalid_argument("symmetrize: order must be even");
  std::vector<std::pair<std::vector<int>, double>> entries;
  detail::for_each_canonical(d.order, d.dim, [&](const std::vector<int>& t) {
    std::vector<int> perm(t);
    double sum = 0.0;
    int count = 0;
    do {
      sum += d.at(perm);
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    double mean = sum / count;
    if (mean != 0.0) entries.emplace_back(t, mean);
  });
  return SymTensor::from_entries(d.order, d.dim, std::move(entries));
}

/// The seven benchmark tensors. All are order 4; formulas use the 1-based
/// index convention they are usually stated in. Example 1 is fixed at n=3;
/// Example 7 takes the scalar b and is produced by symmetrizing its raw,
/// non-symmetric listing.
inline SymTensor generate_example(int id, int n, std::optional<double> b = std::nullopt) {
  const int m = 4;
  if (id < 1 || id > 7) throw std::invalid_argument("generate_example: id must be in 1..7");
  if (id == 1 && n != 3) throw std::invalid_argument("generate_example: example 1 requires n = 3");
  if (n < 1) throw std::invalid_argument("generate_example: dimension must be positive");

  auto from_formula = [&](auto&& f) {
    std::vector<std::pair<std::vector<int>, double>> entries;
    detail::for_each_canonical(m, n, [&](const std::vector<int>& t) {
      double v = f(t);
      if (v != 0.0) entries.emplace_back(t, v);
    });
    return SymTensor::from_entries(m, n, std::move(entries));
  };

  switch (id) {
    case 1: {
      // Kofidis-Regalia S^{[4,3]} tensor
      std::vector<std::pair<std::vector<int>, double>> e = {
          {{0, 0, 0, 0}, 0.2883},  {{0, 0, 0, 1}, -0.0031}, {{0, 0, 0, 2}, 0.1973},
          {{0, 0, 1, 1}, -0.2485}, {{0, 0, 1, 2}, -0.2939}, {{0, 0, 2, 2}, 0.3847},
          {{0, 1, 1, 1}, 0.2972},  {{0, 1, 1, 2}, 0.1862},  {{0, 1, 2, 2}, 0.0919},
          {{0, 2, 2, 2}, -0.3619}, {{1, 1, 1, 1}, 0.1241},  {{1, 1, 1, 2}, -0.3420},
          {{1, 1, 2, 2}, 0.2127},  {{1, 2, 2, 2}, 0.2727},  {{2, 2, 2, 2}, -0.3054},
      };
      return SymTensor::from_entries(m, 3, std::move(e));
    }
    case 2:
      return from_formula([](const std::vector<int>& t) {
        int s = 4;  // shift to 1-based: sum (t_k + 1)
        for (int i : t) s += i;
        return std::sin(static_cast<double>(s));
      });
    case 3:
      return from_formula([](const std::vector<int>& t) {
        double v = 0.0;
        for (int i : t) v += std::tan(static_cast<double>(i + 1));
        return v;
      });
    case 4:
      return from_formula([n](const std::vector<int>& t) {
        double v = 0.0;
        for (int i : t) {
          int k = i + 1;
          double sign = (k % 2 == 0) ? 1.0 : -1.0;
          v += std::atan(sign * static_cast<double>(k) / n);
        }
        return v;
      });
    case 5:
      return from_formula([](const std::vector<int>& t) {
        if (t[0] != t[1] || t[1] != t[2] || t[2] != t[3]) return 0.0;
        double k = t[0] + 1;
        return (k - 1.0) / k;
      });
    case 6:
      return from_formula([](const std::vector<int>& t) {
        double v = 0.0;
        for (int i : t) {
          int k = i + 1;
          double sign = (k % 2 == 0) ? 1.0 : -1.0;
          v += sign / k;
        }
        return v;
      });
    case 7: {
      if (!b) throw std::invalid_argument("generate_example: example 7 requires the parameter b");
      if (n < 3) throw std::invalid_argument("generate_example: example 7 requires n >= 3");
      DenseTensor raw(m, n);
      for (int i = 0; i < n; ++i) raw.at({i, i, i, i}) = 2.0 * (i + 1);
      raw.at({0, 0, 1, 2}) = 4.0 * (*b);  // a_1123 in 1-based indices
      return symmetrize(raw);
    }
    default:
      throw std::invalid_argument("generate_example: unreachable");
  }
}

/// Random symmetric tensor: canonical entries i.i.d. uniform [-1,1), drawn
/// in lexicographic tuple order so a fixed stream reproduces it bitwise.
inline SymTensor random_sym(int order, int dim, RandomStream& rng) {
  if (order <= 0 || order % 2 != 0) throw std::invalid_argument("random_sym: order must be positive and even");
  std::vector<std::pair<std::vector<int>, double>> entries;
  detail::for_each_canonical(order, dim, [&](const std::vector<int>& t) {
    entries.emplace_back(t, rng.symmetric());
  });
  return SymTensor::from_entries(order, dim, std::move(entries));
}

}  // namespace teig
