#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <tuple>

namespace lfcheck {

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
  return a;
}

}  // namespace detail

/// Value carried by a call argument or return: absent, the distinguished
/// EMPTY token, or a small integer (booleans are rendered as 0/1).
class LabelValue {
 public:
  enum class Kind : std::uint8_t { None, Empty, Int };

  constexpr LabelValue() : kind_(Kind::None), n_(0) {}

  static constexpr LabelValue none() { return LabelValue(); }
  static constexpr LabelValue empty() { return LabelValue(Kind::Empty, 0); }
  static constexpr LabelValue integer(int n) { return LabelValue(Kind::Int, n); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_none() const { return kind_ == Kind::None; }
  constexpr bool is_empty() const { return kind_ == Kind::Empty; }
  constexpr bool is_int() const { return kind_ == Kind::Int; }
  constexpr int as_int() const { return n_; }

  friend constexpr bool operator==(LabelValue a, LabelValue b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Int || a.n_ == b.n_);
  }
  friend constexpr bool operator!=(LabelValue a, LabelValue b) { return !(a == b); }
  friend constexpr bool operator<(LabelValue a, LabelValue b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.kind_ == Kind::Int && a.n_ < b.n_;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::None: return "NONE";
      case Kind::Empty: return "EMPTY";
      default: return std::to_string(n_);
    }
  }

 private:
  constexpr LabelValue(Kind k, int n) : kind_(k), n_(n) {}
  Kind kind_;
  int n_;
};

/// Transition label: tau, or a visible call/return of thread `thread`
/// on method `method` with an optional argument/result value.
struct ActionLabel {
  enum class Kind : std::uint8_t { Tau, Call, Ret };

  Kind kind = Kind::Tau;
  int thread = 0;           // 1-based; 0 for tau
  std::string method;       // empty for tau
  LabelValue value;         // call argument / return value

  static ActionLabel tau() { return ActionLabel{}; }
  static ActionLabel call(int t, std::string m, LabelValue arg = LabelValue::none()) {
    return ActionLabel{Kind::Call, t, std::move(m), arg};
  }
  static ActionLabel ret(int t, std::string m, LabelValue val = LabelValue::none()) {
    return ActionLabel{Kind::Ret, t, std::move(m), val};
  }

  bool is_tau() const { return kind == Kind::Tau; }

  friend bool operator==(const ActionLabel& a, const ActionLabel& b) {
    return a.kind == b.kind && a.thread == b.thread && a.value == b.value && a.method == b.method;
  }
  friend bool operator!=(const ActionLabel& a, const ActionLabel& b) { return !(a == b); }
  friend bool operator<(const ActionLabel& a, const ActionLabel& b) {
    return std::tie(a.kind, a.thread, a.method, a.value) < std::tie(b.kind, b.thread, b.method, b.value);
  }

  std::uint64_t hash() const {
    std::uint64_t h = detail::fnv1a(method.data(), method.size());
    h = detail::hash_mix(h, static_cast<std::uint64_t>(kind));
    h = detail::hash_mix(h, static_cast<std::uint64_t>(thread));
    h = detail::hash_mix(h, static_cast<std::uint64_t>(value.kind()));
    if (value.is_int()) h = detail::hash_mix(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(value.as_int())));
    return h;
  }

  /// Human-readable form, e.g. "call(1, push, 1)", "ret(2, pop, EMPTY)", "tau".
  std::string str() const {
    if (kind == Kind::Tau) return "tau";
    std::string s = kind == Kind::Call ? "call(" : "ret(";
    s += std::to_string(thread);
    s += ", ";
    s += method;
    if (!value.is_none()) {
      s += ", ";
      s += value.str();
    }
    s += ")";
    return s;
  }
};

}  // namespace lfcheck

template <>
struct std::hash<lfcheck::ActionLabel> {
  std::size_t operator()(const lfcheck::ActionLabel& a) const { return static_cast<std::size_t>(a.hash()); }
};
