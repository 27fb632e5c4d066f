/* Copyright 2026 The fovtok Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Scalar reverse-mode differentiation on a Wengert tape.
//
// Numeric code in this library is written as templates over a scalar type.
// Instantiated with double it is a plain forward pass; instantiated with
// ad::Var every operation also records its local partials on the active tape,
// and Tape::gradient() accumulates adjoints in one reverse sweep.
//
// Constants (Var built from a double) never reach the tape. Dot products and
// sums are recorded as single n-ary nodes to keep the tape small.

#ifndef FOVTOK_AUTODIFF_HPP
#define FOVTOK_AUTODIFF_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "fovtok/error.hpp"

namespace fovtok::ad {

inline constexpr std::uint32_t kConstant = std::numeric_limits<std::uint32_t>::max();

class Tape {
 public:
  struct Edge {
    std::uint32_t parent;
    double partial;
  };

  Tape() { offsets_.push_back(0); }

  std::size_t size() const { return offsets_.size() - 1; }
  std::size_t edge_count() const { return edges_.size(); }

  void clear() {
    offsets_.assign(1, 0);
    edges_.clear();
  }

  std::uint32_t leaf() { return close_node(); }

  /// Opens a node; call add_edge() for each non-constant parent, then close_node().
  void add_edge(std::uint32_t parent, double partial) { edges_.push_back({parent, partial}); }
  std::uint32_t close_node() {
    if (offsets_.size() >= kConstant) throw Error("autodiff tape overflow");
    offsets_.push_back(static_cast<std::uint32_t>(edges_.size()));
    return static_cast<std::uint32_t>(offsets_.size() - 2);
  }

  /// Adjoint of every node with respect to `output`.
  std::vector<double> gradient(std::uint32_t output) const {
    std::vector<double> adj(size(), 0.0);
    if (output == kConstant) return adj;
    adj[output] = 1.0;
    for (std::size_t i = output + 1; i-- > 0;) {
      const double a = adj[i];
      if (a == 0.0) continue;
      for (std::uint32_t e = offsets_[i]; e < offsets_[i + 1]; ++e) {
        adj[edges_[e].parent] += a * edges_[e].partial;
      }
    }
    return adj;
  }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<Edge> edges_;
};

namespace detail {
inline thread_local Tape* active_tape = nullptr;
}  // namespace detail

/// Makes `tape` the recording target on this thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) : previous_(detail::active_tape) { detail::active_tape = &tape; }
  ~TapeScope() { detail::active_tape = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

inline Tape& active() {
  if (detail::active_tape == nullptr) throw Error("no active autodiff tape");
  return *detail::active_tape;
}

struct Var {
  double value = 0.0;
  std::uint32_t id = kConstant;

  Var() = default;
  Var(double v) : value(v) {}  // NOLINT: constants convert implicitly
  Var(double v, std::uint32_t node) : value(v), id(node) {}

  bool is_constant() const { return id == kConstant; }

  /// A new differentiable leaf on the active tape.
  static Var variable(double v) { return {v, active().leaf()}; }
};

namespace detail {

inline Var unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  Tape& t = active();
  t.add_edge(a.id, da);
  return {value, t.close_node()};
}

inline Var binary(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant() && b.is_constant()) return Var(value);
  Tape& t = active();
  if (!a.is_constant()) t.add_edge(a.id, da);
  if (!b.is_constant()) t.add_edge(b.id, db);
  return {value, t.close_node()};
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) { return detail::binary(a.value + b.value, a, 1.0, b, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(a.value - b.value, a, 1.0, b, -1.0); }
inline Var operator*(const Var& a, const Var& b) {
  return detail::binary(a.value * b.value, a, b.value, b, a.value);
}
inline Var operator/(const Var& a, const Var& b) {
  const double q = a.value / b.value;
  return detail::binary(q, a, 1.0 / b.value, b, -q / b.value);
}
inline Var operator-(const Var& a) { return detail::unary(-a.value, a, -1.0); }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.value);
  return detail::unary(e, a, e);
}
inline Var log(const Var& a) { return detail::unary(std::log(a.value), a, 1.0 / a.value); }
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.value);
  return detail::unary(s, a, 0.5 / s);
}
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value);
  return detail::unary(t, a, 1.0 - t * t);
}
inline Var pow(const Var& a, double k) {
  const double p = std::pow(a.value, k);
  const double d = k == 0.0 ? 0.0 : k * std::pow(a.value, k - 1.0);
  return detail::unary(p, a, d);
}

/// sum_i a[i * sa] * b[i * sb] as one node.
inline Var dot(const Var* a, std::ptrdiff_t sa, const Var* b, std::ptrdiff_t sb, std::size_t n) {
  double v = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Var& x = a[static_cast<std::ptrdiff_t>(i) * sa];
    const Var& y = b[static_cast<std::ptrdiff_t>(i) * sb];
    v += x.value * y.value;
    any = any || !x.is_constant() || !y.is_constant();
  }
  if (!any) return Var(v);
  Tape& t = active();
  for (std::size_t i = 0; i < n; ++i) {
    const Var& x = a[static_cast<std::ptrdiff_t>(i) * sa];
    const Var& y = b[static_cast<std::ptrdiff_t>(i) * sb];
    if (!x.is_constant()) t.add_edge(x.id, y.value);
    if (!y.is_constant()) t.add_edge(y.id, x.value);
  }
  return {v, t.close_node()};
}

inline Var sum(std::span<const Var> xs) {
  double v = 0.0;
  bool any = false;
  for (const auto& x : xs) {
    v += x.value;
    any = any || !x.is_constant();
  }
  if (!any) return Var(v);
  Tape& t = active();
  for (const auto& x : xs)
    if (!x.is_constant()) t.add_edge(x.id, 1.0);
  return {v, t.close_node()};
}

}  // namespace fovtok::ad

namespace fovtok {

template <typename T>
inline constexpr bool is_ad_v = std::is_same_v<T, ad::Var>;

inline double value_of(double x) { return x; }
inline double value_of(const ad::Var& x) { return x.value; }

/// Strided dot product for either scalar type.
template <typename T>
T dot_strided(const T* a, std::ptrdiff_t sa, const T* b, std::ptrdiff_t sb, std::size_t n) {
  if constexpr (is_ad_v<T>) {
    return ad::dot(a, sa, b, sb, n);
  } else {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += a[static_cast<std::ptrdiff_t>(i) * sa] * b[static_cast<std::ptrdiff_t>(i) * sb];
    return acc;
  }
}

template <typename T>
T sum_of(std::span<const T> xs) {
  if constexpr (is_ad_v<T>) {
    return ad::sum(xs);
  } else {
    T acc = 0;
    for (const auto& x : xs) acc += x;
    return acc;
  }
}

}  // namespace fovtok

#endif  // FOVTOK_AUTODIFF_HPP
