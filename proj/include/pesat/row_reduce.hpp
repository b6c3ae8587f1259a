#pragma once

// Incremental row echelon forms: exact over the rationals, and a fully
// reduced one modulo the prime 2^61 - 1 used to screen candidates cheaply.
// Independence modulo the prime implies independence over the rationals.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pesat/field.hpp"

namespace pesat {

using SparseRow = std::vector<std::pair<int, Rational>>;
using ModRow = std::vector<std::pair<int, std::uint64_t>>;

/// a + s * b on sorted sparse rows.
SparseRow axpy(const SparseRow& a, const Rational& s, const SparseRow& b);

class RowReducer {
 public:
  /// Remainder after eliminating leading pivots; empty iff v is in the span.
  SparseRow reduce(const SparseRow& v) const;
  bool contains(const SparseRow& v) const { return reduce(v).empty(); }

  /// Returns true when v is independent of the rows already present.
  bool insert(const SparseRow& v);

  int rank() const { return static_cast<int>(rows_.size()); }

 private:
  std::map<int, SparseRow> rows_;  // leading column -> row with unit lead
};

namespace modp {

inline constexpr std::uint64_t kPrime = (std::uint64_t(1) << 61) - 1;

std::uint64_t mul(std::uint64_t a, std::uint64_t b);
std::uint64_t add(std::uint64_t a, std::uint64_t b);
std::uint64_t neg(std::uint64_t a);
std::uint64_t inverse(std::uint64_t a);
/// Image of a rational whose denominator is prime to the modulus.
std::uint64_t from_rational(const Rational& q);
ModRow from_row(const SparseRow& row);

}  // namespace modp

class ModReducer {
 public:
  explicit ModReducer(int dim) : dim_(dim) {}

  /// Canonical remainder for the current span (sparse, sorted).
  ModRow reduce(const ModRow& v) const;
  bool insert(const ModRow& v);
  int rank() const { return static_cast<int>(pivots_.size()); }
  bool full() const { return rank() == dim_; }

 private:
  std::vector<std::uint64_t> dense_reduce(const ModRow& v) const;

  int dim_;
  std::vector<int> pivot_of_col_;                  // -1 when no pivot
  std::vector<int> pivots_;                        // column per row
  std::vector<std::vector<std::uint64_t>> rows_;   // dense, fully reduced
};

}  // namespace pesat
