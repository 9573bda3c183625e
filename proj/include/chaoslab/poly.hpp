#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "json.hpp"

namespace chaoslab {

using cplx = std::complex<double>;

inline constexpr int kMaxDegree = 4096;

// Dense univariate polynomial with complex coefficients, constant term first.
// Trailing zero coefficients are trimmed, so the zero polynomial has no
// coefficients at all.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<cplx> coeffs);
  Poly(std::initializer_list<cplx> coeffs);

  static Poly constant(cplx c);
  static Poly monomial(int degree, cplx c = 1.0);
  // (1+z)^n by repeated squaring.
  static Poly one_plus_z_pow(int n);
  static Poly from_roots(const std::vector<cplx>& roots);

  [[nodiscard]] bool is_zero() const { return c_.empty(); }
  // Zero for the zero polynomial; check is_zero() to tell it apart.
  [[nodiscard]] int degree() const { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }
  // Index of the lowest nonzero coefficient; 0 for the zero polynomial.
  [[nodiscard]] int valuation() const;
  [[nodiscard]] const std::vector<cplx>& coeffs() const { return c_; }
  [[nodiscard]] cplx operator[](int j) const {
    return (j >= 0 && j < static_cast<int>(c_.size())) ? c_[j] : cplx(0.0);
  }
  [[nodiscard]] cplx leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }

  [[nodiscard]] cplx eval(cplx z) const;
  [[nodiscard]] Poly derivative() const;
  [[nodiscard]] double l1_norm() const;
  // Sum of j^s |c_j| r^j for s = 0, 1, 2: bounds on |p|, |dp/dθ|, |d²p/dθ²|
  // on the circle of radius r.
  [[nodiscard]] double majorant(double r, int s = 0) const;
  // Coefficients of degree < n.
  [[nodiscard]] Poly truncated(int n) const;
  [[nodiscard]] Poly monic() const;
  // Divides out z^v for v = valuation(); p(0) != 0 afterwards unless zero.
  [[nodiscard]] Poly strip_zero_roots() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(cplx s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, cplx s) { return a *= s; }
  friend Poly operator*(cplx s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void normalize();
  std::vector<cplx> c_;
};

enum class ArithOp { add, sub, mul };
Poly arith(const Poly& p, const Poly& q, ArithOp op);

struct DivMod {
  Poly quotient;
  Poly remainder;
};
// Euclidean division; throws InputError if q is zero.
DivMod divmod(const Poly& f, const Poly& q);

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  // max |p(root)| over the returned roots.
  double residual_bound = 0.0;

  [[nodiscard]] int total_multiplicity() const;
  // Every root repeated according to its multiplicity.
  [[nodiscard]] std::vector<cplx> flat() const;
};

// Companion-matrix eigenvalues (balanced), up to 20 Newton steps per root,
// then roots closer than cluster_tol are merged into one multiple root.
RootSet roots(const Poly& p, double cluster_tol = 1e-7);

// Remainder of f by q has l1 norm at most tol * (1 + |f|_1).
bool divides(const Poly& q, const Poly& f, double tol = 1e-9);

struct CircleMax {
  double sampled = 0.0;  // largest sampled modulus
  double upper = 0.0;    // sampled value plus the curvature slack
};

// Sampled maximum of |p| on |z| = r with a certified slack: |p|^2 as a
// function of the angle has second derivative at most 2(M0 M2 + M1^2), where
// Ms are the coefficient majorants, and the true maximum lies within half a
// sample step of some sample.
CircleMax circle_max(const Poly& p, double r, int samples);
double max_modulus_on_circle(const Poly& p, double r, int samples);
// Default sample count used by the library: 64 (deg + 1), at least 256.
int default_circle_samples(int degree);

// Same bound for any evaluator given its majorants at radius r.
template <class F>
CircleMax circle_max_generic(const F& f, double r, int samples, double m0, double m1, double m2);

void to_json(nlohmann::json& j, const Poly& p);
void from_json(const nlohmann::json& j, Poly& p);
Poly poly_from_json(const nlohmann::json& j);

}  // namespace chaoslab

#include "chaoslab/poly_inl.hpp"
