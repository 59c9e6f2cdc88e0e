#pragma once

#include <cmath>
#include <string>

namespace blowup {

/// Truncated exponential F_n: equal to e^u for u <= n and to the plateau e^n
/// above. The bridge on [n, n+1] is the flat piece, the only nondecreasing
/// continuous choice that matches e^u at n and e^n at n + 1.
class Truncation {
 public:
  explicit Truncation(int n);

  int level() const { return n_; }
  double operator()(double u) const { return u <= n_ ? std::exp(u) : plateau_; }
  double plateau() const { return plateau_; }

 private:
  int n_;
  double plateau_;
};

/// Source term F in u_tt = u_xx + F(u).
class SourceTerm {
 public:
  enum class Kind { zero, exponential, truncated, constant };

  static SourceTerm zero() { return SourceTerm(Kind::zero, 0, 0.0); }
  static SourceTerm exponential() { return SourceTerm(Kind::exponential, 0, 0.0); }
  static SourceTerm truncated(int n);
  static SourceTerm constant(double value) { return SourceTerm(Kind::constant, 0, value); }

  Kind kind() const { return kind_; }
  int truncation_level() const { return n_; }
  bool bounded() const { return kind_ != Kind::exponential; }

  double operator()(double u) const {
    switch (kind_) {
      case Kind::zero:
        return 0.0;
      case Kind::exponential:
        return std::exp(u);
      case Kind::truncated:
        return u <= n_ ? std::exp(u) : value_;
      case Kind::constant:
        return value_;
    }
    return 0.0;
  }

  std::string describe() const;

 private:
  SourceTerm(Kind kind, int n, double value) : kind_(kind), n_(n), value_(value) {}

  Kind kind_;
  int n_;
  double value_;
};

}  // namespace blowup
