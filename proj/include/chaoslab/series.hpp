#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chaoslab/poly.hpp"

namespace chaoslab {

using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& e);
std::string index_key(const MultiIndex& e);
MultiIndex parse_index_key(const std::string& key, int k);

// Element of the l1 algebra in k commuting variables u_1..u_k, truncated at
// total degree D. Terms are kept sparse and ordered, so iteration order is
// deterministic.
class TruncatedSeries {
 public:
  TruncatedSeries(int k, int D);

  static TruncatedSeries generator(int k, int D, int j);  // u_j, 1-based
  static TruncatedSeries monomial(int k, int D, const MultiIndex& e, cplx c = 1.0);
  static TruncatedSeries constant(int k, int D, cplx c);

  [[nodiscard]] int k() const { return k_; }
  [[nodiscard]] int D() const { return D_; }
  [[nodiscard]] const std::map<MultiIndex, cplx>& terms() const { return terms_; }
  // Set once any product dropped a term above the truncation degree.
  [[nodiscard]] bool truncation_active() const { return truncated_; }
  [[nodiscard]] size_t size() const { return terms_.size(); }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] cplx coeff(const MultiIndex& e) const;
  [[nodiscard]] int max_total_degree() const;

  // Adds c to the coefficient of u^e; silently drops e above D.
  void add_term(const MultiIndex& e, cplx c);

  TruncatedSeries& operator+=(const TruncatedSeries& o);
  TruncatedSeries& operator-=(const TruncatedSeries& o);
  TruncatedSeries& operator*=(cplx s);
  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator*(TruncatedSeries a, cplx s) { return a *= s; }

 private:
  void check_compatible(const TruncatedSeries& o) const;
  int k_;
  int D_;
  std::map<MultiIndex, cplx> terms_;
  bool truncated_ = false;

  friend TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b);
};

double l1_norm(const TruncatedSeries& a);
// Throws InputError on mismatched k or D.
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries pow(const TruncatedSeries& a, int n);
// p(u_1); throws InputError if deg p > D.
TruncatedSeries embed_poly(const Poly& p, int k, int D);

void to_json(nlohmann::json& j, const TruncatedSeries& a);
TruncatedSeries series_from_json(const nlohmann::json& j, int k, int D);

// mant * 2^exp2 * z^shift * (1+z)^power. The binary exponent keeps stage
// components such as c z^n with c far beyond double range exact.
struct ScaledBinomial {
  int shift = 1;
  int power = 0;
  cplx mant = 1.0;
  int exp2 = 0;
  friend bool operator==(const ScaledBinomial&, const ScaledBinomial&) = default;
};

// A polynomial in P_0 stored as body + optional scaled binomial term.
class XiComponent {
 public:
  XiComponent() = default;
  explicit XiComponent(Poly body);
  XiComponent(Poly body, ScaledBinomial extra);

  static XiComponent identity();

  [[nodiscard]] const Poly& body() const { return body_; }
  [[nodiscard]] const std::optional<ScaledBinomial>& extra() const { return extra_; }
  [[nodiscard]] int degree() const;
  [[nodiscard]] int valuation() const;

  [[nodiscard]] cplx eval(cplx z) const;
  // Coefficient majorant sum_j j^s |c_j| r^j.
  [[nodiscard]] double majorant(double r, int s) const;
  // Taylor coefficients of degree < n; throws Error on overflow.
  [[nodiscard]] std::vector<cplx> taylor(int n) const;
  // Local expansion at lambda: coefficients of h^0..h^{order-1} in f(lambda + h).
  [[nodiscard]] std::vector<cplx> jet(cplx lambda, int order) const;
  // Remainder modulo a monic polynomial q, as deg(q) coefficients.
  [[nodiscard]] std::vector<cplx> residue(const Poly& monic_q) const;
  // Full expansion; throws Error when a coefficient overflows.
  [[nodiscard]] Poly to_poly() const;
  [[nodiscard]] bool expandable() const;

  friend bool operator==(const XiComponent&, const XiComponent&) = default;

 private:
  Poly body_;
  std::optional<ScaledBinomial> extra_;
};

void to_json(nlohmann::json& j, const XiComponent& x);
XiComponent xi_component_from_json(const nlohmann::json& j);

// The tuple (xi_1, ..., xi_k) with xi_1 = z, plus a cached lower bound for
// gamma(xi) and a memo of truncated Taylor powers.
class SubstTuple {
 public:
  explicit SubstTuple(std::vector<XiComponent> xi);
  SubstTuple(const SubstTuple& o);
  SubstTuple& operator=(const SubstTuple& o);

  static SubstTuple from_polys(const std::vector<Poly>& xi);

  [[nodiscard]] int k() const { return static_cast<int>(xi_.size()); }
  [[nodiscard]] const XiComponent& operator[](int j) const { return xi_[j]; }
  [[nodiscard]] const std::vector<XiComponent>& components() const { return xi_; }
  [[nodiscard]] SubstTuple appended(const XiComponent& c) const;

  // Cached gamma(xi, 1e-9).
  [[nodiscard]] double gamma() const;

  // Taylor coefficients of xi_j^t modulo z^{M+1}; j is 0-based.
  [[nodiscard]] std::shared_ptr<const std::vector<cplx>> taylor_power(int j, int t, int M) const;

 private:
  std::vector<XiComponent> xi_;
  mutable std::optional<double> gamma_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<int, int, int>, std::shared_ptr<const std::vector<cplx>>> powers_;
};

// Largest r (within tol, lower endpoint) with max_j max_{|z|=r} |xi_j| <= 1,
// the maxima bounded above by circle_max_generic.
double gamma(const SubstTuple& xi, double tol = 1e-9);
// Upper bound of max_{|z|=r} |f| for a component.
double component_circle_max(const XiComponent& f, double r);

// alpha_0..alpha_M of Phi_xi(a).
std::vector<cplx> substitute(const TruncatedSeries& a, const SubstTuple& xi, int M);

// Truncated product of coefficient vectors modulo z^n.
std::vector<cplx> mul_trunc(const std::vector<cplx>& a, const std::vector<cplx>& b, int n);

}  // namespace chaoslab
