#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace dca::bn {

// Nonnegative table over the joint states of `scope` (variable indices into a
// network). Values are row-major: the last scope variable varies fastest.
struct Factor {
  std::vector<std::size_t> scope;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  static Factor scalar(double v) { return Factor{{}, {}, {v}}; }

  std::size_t size() const noexcept { return values.size(); }

  bool contains(std::size_t var) const {
    return std::find(scope.begin(), scope.end(), var) != scope.end();
  }

  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(scope.size(), 1);
    for (std::size_t i = scope.size(); i-- > 1;) s[i - 1] = s[i] * cards[i];
    return s;
  }

  double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

namespace detail {

// Stride of every `target` variable inside `f`, or 0 when `f` lacks it.
inline std::vector<std::size_t> strides_in(const Factor& f, const std::vector<std::size_t>& target) {
  auto fs = f.strides();
  std::vector<std::size_t> out(target.size(), 0);
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = 0; j < f.scope.size(); ++j)
      if (f.scope[j] == target[i]) out[i] = fs[j];
  return out;
}

}  // namespace detail

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  out.scope = a.scope;
  out.cards = a.cards;
  for (std::size_t j = 0; j < b.scope.size(); ++j)
    if (!a.contains(b.scope[j])) {
      out.scope.push_back(b.scope[j]);
      out.cards.push_back(b.cards[j]);
    }
  std::size_t n = 1;
  for (auto c : out.cards) n *= c;
  out.values.resize(n);

  auto sa = detail::strides_in(a, out.scope);
  auto sb = detail::strides_in(b, out.scope);
  const std::size_t k = out.scope.size();
  std::vector<std::size_t> counter(k, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = a.values[ia] * b.values[ib];
    // odometer increment, last position fastest
    for (std::size_t d = k; d-- > 0;) {
      if (++counter[d] < out.cards[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      ia -= sa[d] * (out.cards[d] - 1);
      ib -= sb[d] * (out.cards[d] - 1);
      counter[d] = 0;
    }
  }
  return out;
}

inline Factor sum_out(const Factor& f, std::size_t var) {
  auto pos = std::find(f.scope.begin(), f.scope.end(), var);
  if (pos == f.scope.end()) return f;
  const auto d = static_cast<std::size_t>(pos - f.scope.begin());
  Factor out;
  for (std::size_t j = 0; j < f.scope.size(); ++j)
    if (j != d) {
      out.scope.push_back(f.scope[j]);
      out.cards.push_back(f.cards[j]);
    }
  auto strides = f.strides();
  const std::size_t inner = strides[d];
  const std::size_t card = f.cards[d];
  const std::size_t outer = f.size() / (inner * card);
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < card; ++s) {
      const double* src = &f.values[(o * card + s) * inner];
      double* dst = &out.values[o * inner];
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  return out;
}

// Restricts `f` to var == state and drops var from the scope.
inline Factor reduce(const Factor& f, std::size_t var, std::size_t state) {
  auto pos = std::find(f.scope.begin(), f.scope.end(), var);
  if (pos == f.scope.end()) return f;
  const auto d = static_cast<std::size_t>(pos - f.scope.begin());
  Factor out;
  for (std::size_t j = 0; j < f.scope.size(); ++j)
    if (j != d) {
      out.scope.push_back(f.scope[j]);
      out.cards.push_back(f.cards[j]);
    }
  auto strides = f.strides();
  const std::size_t inner = strides[d];
  const std::size_t card = f.cards[d];
  const std::size_t outer = f.size() / (inner * card);
  out.values.resize(outer * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = &f.values[(o * card + state) * inner];
    std::copy(src, src + inner, &out.values[o * inner]);
  }
  return out;
}

// Reorders the scope of `f` to `order` (a permutation of f.scope).
inline Factor permute(const Factor& f, const std::vector<std::size_t>& order) {
  Factor out;
  out.scope = order;
  out.cards.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = 0; j < f.scope.size(); ++j)
      if (f.scope[j] == order[i]) out.cards[i] = f.cards[j];
  out.values.resize(f.size());
  auto src_strides = detail::strides_in(f, order);
  std::vector<std::size_t> counter(order.size(), 0);
  std::size_t src = 0;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = f.values[src];
    for (std::size_t d = order.size(); d-- > 0;) {
      if (++counter[d] < out.cards[d]) {
        src += src_strides[d];
        break;
      }
      src -= src_strides[d] * (out.cards[d] - 1);
      counter[d] = 0;
    }
  }
  return out;
}

}  // namespace dca::bn
