#include "pesat/identities.hpp"

#include <functional>
#include <sstream>
#include <tuple>

#include "pesat/operators.hpp"
#include "pesat/seeds.hpp"

namespace pesat {
namespace {

using Q = Rational;
using SF = RScalarField;
using VF = RVectorField;

constexpr Phase C = Phase::C;
constexpr Phase Sn = Phase::S;

// sin(m.x) sin(n z) style shorthands
SF ss(int m1, int m2, int n, const Q& c = Q(1)) { return sm<Q>(m1, m2, n, Sn, c); }
SF cs(int m1, int m2, int n, const Q& c = Q(1)) { return cm<Q>(m1, m2, n, Sn, c); }
SF sc(int m1, int m2, int n, const Q& c = Q(1)) { return sm<Q>(m1, m2, n, C, c); }
SF cc(int m1, int m2, int n, const Q& c = Q(1)) { return cm<Q>(m1, m2, n, C, c); }
VF vec(long a1, long a2, const SF& s) { return along(Q(a1), Q(a2), s); }

std::string label(std::initializer_list<std::pair<const char*, int>> args) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : args) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  return os.str();
}

class Suite {
 public:
  template <typename F>
  void check(const std::string& name, const std::string& instance, F&& holds) {
    results_.push_back({name, instance, holds()});
  }
  std::vector<IdentityResult> take() { return std::move(results_); }

 private:
  std::vector<IdentityResult> results_;
};

}  // namespace

std::vector<IdentityResult> verify_identities() {
  Suite s;

  s.check("q1_sin_x_sin_z", "", [] { return q1_theta(phi<Q>(2)) == vec(1, 0, cc(1, 0, 1)); });
  s.check("q1_sin_z_vanishes", "", [] { return q1_theta(phi<Q>(5)).empty(); });
  s.check("bracket_sin_x_sin_z_with_sin_z", "", [] {
    return frak_b2(phi<Q>(2), phi<Q>(5)) == ss(1, 0, 2, frac(1, 2)) &&
           op_B2(q1_theta(phi<Q>(2)), phi<Q>(5)) == ss(1, 0, 2, frac(1, 2));
  });
  s.check("q1_sin_x_sin_2z", "", [] { return q1_theta(ss(1, 0, 2)) == vec(1, 0, cc(1, 0, 2, frac(1, 2))); });
  s.check("bracket_sin_x_sin_2z_with_sin_z", "", [] {
    SF expect = ss(1, 0, 1, frac(1, 8)) + ss(1, 0, 3, frac(1, 8));
    return frak_b2(ss(1, 0, 2), phi<Q>(5)) == expect;
  });

  for (int n : {1, 2, 3, 5}) {
    s.check("q1_preimage_cos_x_cos_nz", label({{"n", n}}),
            [n] { return q1_theta(ss(1, 0, n, Q(n))) == vec(1, 0, cc(1, 0, n)); });
    s.check("q1_preimage_sin_x_cos_nz", label({{"n", n}}),
            [n] { return q1_theta(cs(1, 0, n, Q(-n))) == vec(1, 0, sc(1, 0, n)); });
  }

  for (int n : {2, 3, 4, 6}) {
    s.check("bracket_sum_vertical_shift", label({{"n", n}}), [n] {
      SF lhs = frak_b2(cs(1, 0, n, Q(n)), phi<Q>(1)) + frak_b2(ss(1, 0, n, Q(n)), phi<Q>(2));
      const Q c = frac(n * n - 1, 2 * n);
      SF expect = cm<Q>(0, 0, n - 1, Sn, Q(c * (n - 1))) - cm<Q>(0, 0, n + 1, Sn, Q(c * (n + 1)));
      return lhs == expect;
    });
  }

  for (auto [m, n] : {std::pair{2, 2}, {3, 2}, {4, 3}, {5, 4}}) {
    s.check("q1_preimage_cos_mx_cos_nz", label({{"m", m}, {"n", n}}),
            [m, n] { return q1_theta(ss(m, 0, n, frac(n, m))) == vec(1, 0, cc(m, 0, n)); });
    s.check("bracket_horizontal_shift", label({{"m", m}, {"n", n}}), [m, n] {
      const long den = 4L * m * n;
      SF expect = ss(m + 1, 0, n + 1, frac((m - n) * (m + n * n), den)) +
                  ss(m + 1, 0, n - 1, frac((m + n) * (m + n * n), den)) +
                  ss(m - 1, 0, n + 1, frac((m + n) * (m - n * n), den)) +
                  ss(m - 1, 0, n - 1, frac((m - n) * (m - n * n), den));
      return frak_b2(ss(m, 0, n, frac(n, m)), phi<Q>(1)) == expect;
    });
  }

  for (int m : {1, 2, 3, 4}) {
    s.check("bracket_sin_2z_lift", label({{"m", m}}), [m] {
      SF expect = ss(m + 1, 0, 3, frac(m + 1, 4)) + ss(m + 1, 0, 1, frac(m + 1, 4));
      return frak_b2(ss(m + 1, 0, 2, frac(2, m + 1)), phi<Q>(5)) == expect;
    });
  }

  for (auto [m1, m2, n] : {std::tuple{1, 1, 2}, {2, 0, 3}, {3, 2, 2}, {2, -1, 4}}) {
    const SF t1 = cs(m1, m2, n, Q(-n));
    const SF t2 = ss(m1, m2, n, Q(n));
    const std::string inst = label({{"m1", m1}, {"m2", m2}, {"n", n}});
    s.check("q1_preimage_gradient_pair", inst, [=] {
      return q1_theta(t1) == vec(m1, m2, sc(m1, m2, n)) && q1_theta(t2) == vec(m1, m2, cc(m1, m2, n));
    });
    s.check("bracket_diagonal_shift", inst, [=] {
      const long nn = n;
      const Q a1 = frac(nn * nn * nn - nn * (nn - 1) * m2 - m1 * m1 - m2 * m2, 2 * nn);
      const Q a2 = -frac(nn * nn * nn + nn * (nn + 1) * m2 + m1 * m1 + m2 * m2, 2 * nn);
      SF expect = ss(m1, m2 + 1, n + 1, a1) + ss(m1, m2 + 1, n - 1, a2);
      SF lhs = frak_b2(t1, phi<Q>(4)) - frak_b2(t2, phi<Q>(3));
      bool gap = n != 2 || a1 - a2 == Q(4 + m2);
      return lhs == expect && gap;
    });
    s.check("bracket_diagonal_sin_2z_lift", inst, [=] {
      const Q c = frac(m1 * m1 + (m2 + 1) * (m2 + 1), 4);
      SF expect = ss(m1, m2 + 1, 3, c) + ss(m1, m2 + 1, 1, c);
      return frak_b2(ss(m1, m2 + 1, 2, Q(2)), phi<Q>(5)) == expect;
    });
  }

  for (auto [m1, m2, p] : {std::tuple{1, 0, 1}, {1, 1, 2}, {0, 2, 3}, {2, -1, 1}}) {
    s.check("q1_preimage_general", label({{"m1", m1}, {"m2", m2}, {"p", p}}), [=] {
      return vec(m1, m2, cc(m1, m2, p)) == q1_theta(ss(m1, m2, p, Q(p))) &&
             vec(m1, m2, sc(m1, m2, p)) == q1_theta(cs(m1, m2, p, Q(-p)));
    });
  }

  s.check("self_advection_free_fields", "", [] {
    bool ok = true;
    for (int i = 1; i <= 4; ++i) ok = ok && op_B1(psi_field<Q>(i)).empty();
    for (int i = 5; i <= 6; ++i) ok = ok && op_B1(phi_tilde<Q>(i)).empty();
    return ok;
  });

  // The coefficients below are those of the sin(nz) sin(z) form, rewritten
  // as cosines with the product-to-sum factor 1/2 included.
  for (int n : {1, 2, 3, 4}) {
    s.check("cross_term_cos_x_cos_nz", label({{"n", n}}), [n] {
      VF lhs = op_b1(vec(1, 0, cc(1, 0, n)), psi_field<Q>(2));
      const Q half(frac(1, 2));
      const Q a = frac(1 + n * n, 4 * n);
      const Q b = frac(n * n - 1, 4 * n);
      SF x2 = cc(2, 0, n + 1, half) + cc(2, 0, n - 1, half) + cc(2, 0, n - 1, a) - cc(2, 0, n + 1, a);
      SF flat = cm<Q>(0, 0, n - 1, C, b) - cm<Q>(0, 0, n + 1, C, b);
      return lhs == leray_project(vec(1, 0, x2 + flat));
    });
  }

  for (auto [m1, m2, n] : {std::tuple{1, 1, 2}, {2, 0, 3}, {1, -1, 2}, {0, 1, 3}}) {
    const std::string inst = label({{"m1", m1}, {"m2", m2}, {"n", n}});
    const SF sin_sin = product(ss(m1, m2, n), cm<Q>(0, 0, 1, Sn));
    const SF cos_cos = product(sc(m1, m2, n), cm<Q>(0, 0, 1, C));
    s.check("cross_term_y_shift", inst, [=] {
      const int k1 = m1, k2 = m2 + 1;
      VF lhs = op_b1(vec(k1, k2, sc(k1, k2, n)), psi_field<Q>(4)) + op_b1(vec(k1, k2, cc(k1, k2, n)), psi_field<Q>(3));
      const Q a1 = frac(m1 * n * n, n);
      const Q a2 = frac((m2 + 1) * n * n - m1 * m1 - (m2 + 1) * (m2 + 1), n);
      VF expect = leray_project(Q(-(m2 + 1)) * vec(m1, m2, cos_cos)) + leray_project(along(a1, a2, sin_sin));
      return lhs == expect;
    });
    s.check("cross_term_x_shift", inst, [=] {
      const int k1 = m1 + 1, k2 = m2;
      VF lhs = op_b1(vec(k1, k2, sc(k1, k2, n)), psi_field<Q>(2)) + op_b1(vec(k1, k2, cc(k1, k2, n)), psi_field<Q>(1));
      const Q a1 = frac((m1 + 1) * n * n - m2 * m2 - (m1 + 1) * (m1 + 1), n);
      const Q a2 = frac(m2 * n * n, n);
      VF expect = leray_project(Q(-(m1 + 1)) * vec(m1, m2, cos_cos)) + leray_project(along(a1, a2, sin_sin));
      return lhs == expect;
    });
    s.check("cross_term_flat_directions", inst, [=] {
      const int k1 = m1 + 1, k2 = m2;
      VF lhs = op_b1(vec(k1, k2, sc(k1, k2, n)), phi_tilde<Q>(6)) + op_b1(vec(k1, k2, cc(k1, k2, n)), phi_tilde<Q>(5));
      return lhs == leray_project(vec(-(m1 + 1) * m2, m1 + 1 - m2 * m2, sc(m1, m2, n)));
    });
  }

  for (int p : {1, 2, 3}) {
    s.check("cross_term_diagonal_constant", label({{"p", p}}), [p] {
      // m = (-1, 0): -m_perp sin(m.x) = (0, -1) sin x
      VF lhs = op_b1(vec(1, 1, cc(0, 0, p)), phi_tilde<Q>(5));
      return lhs == vec(0, -1, sc(1, 0, p));
    });
  }

  s.check("commutator_of_moves", "", [] {
    PhysicalParams<Q> prm{frac(3, 2), Q(1), Q(2), frac(1, 3), Q(5), {}};
    RState u{vec(1, 0, cc(1, 0, 1)) + vec(0, 1, cc(0, 0, 2)), ss(1, 1, 1) + cs(0, 1, 2, Q(3))};
    const SF x1 = phi<Q>(2) + Q(2) * phi<Q>(6);
    const SF x2 = phi<Q>(5) - phi<Q>(3);
    RState out = f_map(f_map(f_map(f_map(u, x1, prm), x2, prm), SF(-x1), prm), SF(-x2), prm);
    return out == u + temperature_state(frak_b2(x1, x2));
  });

  return s.take();
}

}  // namespace pesat
