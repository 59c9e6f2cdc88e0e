#include "blowup/source.hpp"

#include "blowup/error.hpp"

namespace blowup {

Truncation::Truncation(int n) : n_(n), plateau_(std::exp(static_cast<double>(n))) {
  if (n < 0) throw InvalidArgument("truncation level must be >= 0");
}

SourceTerm SourceTerm::truncated(int n) {
  const Truncation t(n);
  return SourceTerm(Kind::truncated, n, t.plateau());
}

std::string SourceTerm::describe() const {
  switch (kind_) {
    case Kind::zero:
      return "zero";
    case Kind::exponential:
      return "exp";
    case Kind::truncated:
      return "F_" + std::to_string(n_);
    case Kind::constant:
      return "constant";
  }
  return "?";
}

}  // namespace blowup
