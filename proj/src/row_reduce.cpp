#include "pesat/row_reduce.hpp"

#include <algorithm>

namespace pesat {

SparseRow axpy(const SparseRow& a, const Rational& s, const SparseRow& b) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->first < j->first)) {
      out.push_back(*i++);
    } else if (i == a.end() || j->first < i->first) {
      out.emplace_back(j->first, Rational(s * j->second));
      ++j;
    } else {
      Rational v = i->second + s * j->second;
      if (!is_zero(v)) out.emplace_back(i->first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

SparseRow RowReducer::reduce(const SparseRow& v) const {
  SparseRow out = v;
  while (!out.empty()) {
    auto it = rows_.find(out.front().first);
    if (it == rows_.end()) break;
    out = axpy(out, Rational(-out.front().second), it->second);
  }
  return out;
}

bool RowReducer::insert(const SparseRow& v) {
  SparseRow r = reduce(v);
  if (r.empty()) return false;
  const Rational inv = 1 / r.front().second;
  for (auto& [col, val] : r) val *= inv;
  const int lead = r.front().first;
  rows_.emplace(lead, std::move(r));
  return true;
}

namespace modp {

std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  std::uint64_t s = static_cast<std::uint64_t>(r & kPrime) + static_cast<std::uint64_t>(r >> 61);
  return s >= kPrime ? s - kPrime : s;
}

std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s >= kPrime ? s - kPrime : s;
}

std::uint64_t neg(std::uint64_t a) { return a == 0 ? 0 : kPrime - a; }

std::uint64_t inverse(std::uint64_t a) {
  std::uint64_t result = 1;
  std::uint64_t e = kPrime - 2;
  while (e) {
    if (e & 1) result = mul(result, a);
    a = mul(a, a);
    e >>= 1;
  }
  return result;
}

std::uint64_t from_rational(const Rational& q) {
  const std::uint64_t num = mpz_fdiv_ui(q.get_num_mpz_t(), kPrime);
  const std::uint64_t den = mpz_fdiv_ui(q.get_den_mpz_t(), kPrime);
  PESAT_DEMAND(den != 0, ErrorKind::PreconditionViolation, "denominator divisible by the modulus");
  return mul(num, inverse(den));
}

ModRow from_row(const SparseRow& row) {
  ModRow out;
  out.reserve(row.size());
  for (const auto& [col, val] : row) {
    const std::uint64_t x = from_rational(val);
    if (x) out.emplace_back(col, x);
  }
  return out;
}

}  // namespace modp

std::vector<std::uint64_t> ModReducer::dense_reduce(const ModRow& v) const {
  std::vector<std::uint64_t> out(dim_, 0);
  for (const auto& [col, val] : v) out[col] = val;
  if (pivot_of_col_.empty()) return out;
  for (const auto& [col, val] : v) {
    const int r = pivot_of_col_[col];
    if (r < 0) continue;
    const std::uint64_t s = modp::neg(val);
    const auto& row = rows_[r];
    for (int c = 0; c < dim_; ++c) {
      if (row[c]) out[c] = modp::add(out[c], modp::mul(s, row[c]));
    }
  }
  return out;
}

ModRow ModReducer::reduce(const ModRow& v) const {
  const auto dense = dense_reduce(v);
  ModRow out;
  for (int c = 0; c < dim_; ++c) {
    if (dense[c]) out.emplace_back(c, dense[c]);
  }
  return out;
}

bool ModReducer::insert(const ModRow& v) {
  auto r = dense_reduce(v);
  int lead = 0;
  while (lead < dim_ && r[lead] == 0) ++lead;
  if (lead == dim_) return false;
  const std::uint64_t inv = modp::inverse(r[lead]);
  for (auto& x : r) x = modp::mul(x, inv);
  for (auto& row : rows_) {
    if (row[lead] == 0) continue;
    const std::uint64_t s = modp::neg(row[lead]);
    for (int c = 0; c < dim_; ++c) {
      if (r[c]) row[c] = modp::add(row[c], modp::mul(s, r[c]));
    }
  }
  if (pivot_of_col_.empty()) pivot_of_col_.assign(dim_, -1);
  pivot_of_col_[lead] = static_cast<int>(rows_.size());
  pivots_.push_back(lead);
  rows_.push_back(std::move(r));
  return true;
}

}  // namespace pesat
