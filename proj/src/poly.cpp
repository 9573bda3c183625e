#include "chaoslab/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoslab/error.hpp"

namespace chaoslab {

Poly::Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { normalize(); }

Poly::Poly(std::initializer_list<cplx> coeffs) : c_(coeffs) { normalize(); }

void Poly::normalize() {
  while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
  if (static_cast<int>(c_.size()) - 1 > kMaxDegree) {
    throw InputError("polynomial degree exceeds cap " + std::to_string(kMaxDegree));
  }
  for (const cplx& c : c_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw Error("non-finite polynomial coefficient");
    }
  }
}

Poly Poly::constant(cplx c) { return Poly(std::vector<cplx>{c}); }

Poly Poly::monomial(int degree, cplx c) {
  if (degree < 0) throw InputError("negative monomial degree");
  std::vector<cplx> v(static_cast<size_t>(degree) + 1, cplx(0.0));
  v[degree] = c;
  return Poly(std::move(v));
}

Poly Poly::one_plus_z_pow(int n) {
  if (n < 0) throw InputError("negative exponent");
  Poly result = constant(1.0);
  Poly base{1.0, 1.0};
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

Poly Poly::from_roots(const std::vector<cplx>& roots) {
  Poly out = constant(1.0);
  for (const cplx& r : roots) out = out * Poly{-r, 1.0};
  return out;
}

int Poly::valuation() const {
  for (size_t j = 0; j < c_.size(); ++j) {
    if (c_[j] != cplx(0.0)) return static_cast<int>(j);
  }
  return 0;
}

cplx Poly::eval(cplx z) const {
  cplx acc(0.0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<cplx> d(c_.size() - 1);
  for (size_t j = 1; j < c_.size(); ++j) d[j - 1] = c_[j] * static_cast<double>(j);
  return Poly(std::move(d));
}

double Poly::l1_norm() const {
  double s = 0.0;
  for (const cplx& c : c_) s += std::abs(c);
  return s;
}

double Poly::majorant(double r, int s) const {
  double acc = 0.0;
  double rp = 1.0;
  for (size_t j = 0; j < c_.size(); ++j) {
    const double w = s == 0 ? 1.0 : (s == 1 ? double(j) : double(j) * double(j));
    acc += w * std::abs(c_[j]) * rp;
    rp *= r;
  }
  return acc;
}

Poly Poly::truncated(int n) const {
  if (n <= 0) return {};
  std::vector<cplx> v(c_.begin(), c_.begin() + std::min<size_t>(c_.size(), size_t(n)));
  return Poly(std::move(v));
}

Poly Poly::monic() const {
  if (is_zero()) throw InputError("zero polynomial has no monic form");
  return *this * (1.0 / leading());
}

Poly Poly::strip_zero_roots() const {
  if (is_zero()) return {};
  const int v = valuation();
  return Poly(std::vector<cplx>(c_.begin() + v, c_.end()));
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), cplx(0.0));
  for (size_t j = 0; j < o.c_.size(); ++j) c_[j] += o.c_[j];
  normalize();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), cplx(0.0));
  for (size_t j = 0; j < o.c_.size(); ++j) c_[j] -= o.c_[j];
  normalize();
  return *this;
}

Poly& Poly::operator*=(cplx s) {
  for (cplx& c : c_) c *= s;
  normalize();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> v(a.c_.size() + b.c_.size() - 1, cplx(0.0));
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == cplx(0.0)) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  }
  return Poly(std::move(v));
}

Poly arith(const Poly& p, const Poly& q, ArithOp op) {
  switch (op) {
    case ArithOp::add:
      return p + q;
    case ArithOp::sub:
      return p - q;
    case ArithOp::mul:
      return p * q;
  }
  return {};
}

DivMod divmod(const Poly& f, const Poly& q) {
  if (q.is_zero()) throw InputError("division by the zero polynomial");
  const int dq = q.degree();
  std::vector<cplx> r = f.coeffs();
  if (f.is_zero() || f.degree() < dq) return {Poly(), f};
  std::vector<cplx> quo(static_cast<size_t>(f.degree() - dq) + 1, cplx(0.0));
  const cplx lead = q.leading();
  for (int i = f.degree(); i >= dq; --i) {
    const cplx t = r[i] / lead;
    quo[i - dq] = t;
    if (t == cplx(0.0)) continue;
    for (int j = 0; j <= dq; ++j) r[i - dq + j] -= t * q[j];
    r[i] = 0.0;
  }
  r.resize(static_cast<size_t>(dq));
  return {Poly(std::move(quo)), Poly(std::move(r))};
}

int RootSet::total_multiplicity() const {
  int s = 0;
  for (const Root& r : roots) s += r.multiplicity;
  return s;
}

std::vector<cplx> RootSet::flat() const {
  std::vector<cplx> out;
  for (const Root& r : roots) out.insert(out.end(), r.multiplicity, r.value);
  return out;
}

namespace {

// Parlett-Reinsch balancing by powers of two.
void balance(Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(a(i, j));
        col += std::abs(a(j, i));
      }
      if (row == 0.0 || col == 0.0) continue;
      int e = 0;
      std::frexp(row / col, &e);
      e /= 2;
      if (e == 0) continue;
      const double sc = std::ldexp(col, e), sr = std::ldexp(row, -e);
      if (sc + sr < 0.95 * (col + row)) {
        a.row(i) *= std::ldexp(1.0, -e);
        a.col(i) *= std::ldexp(1.0, e);
        changed = true;
      }
    }
  }
}

cplx newton_polish(const Poly& p, const Poly& dp, cplx z) {
  double best = std::abs(p.eval(z));
  for (int it = 0; it < 20 && best > 0.0; ++it) {
    const cplx d = dp.eval(z);
    if (d == cplx(0.0)) break;
    const cplx cand = z - p.eval(z) / d;
    const double val = std::abs(p.eval(cand));
    if (!(val < best)) break;
    z = cand;
    best = val;
  }
  return z;
}

}  // namespace

RootSet roots(const Poly& p, double cluster_tol) {
  if (p.is_zero() || p.degree() < 1) throw InputError("no roots defined for a constant polynomial");
  RootSet out;
  const int v = p.valuation();
  const Poly core = p.strip_zero_roots();
  std::vector<cplx> found(static_cast<size_t>(v), cplx(0.0));
  const int d = core.degree();
  if (d == 1) {
    found.push_back(-core[0] / core[1]);
  } else if (d > 1) {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -core[i] / core.leading();
    balance(comp);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    if (es.info() != Eigen::Success) throw Error("companion eigenvalue iteration failed");
    const Poly dcore = core.derivative();
    for (int i = 0; i < d; ++i) found.push_back(newton_polish(core, dcore, es.eigenvalues()[i]));
  }
  // Single-linkage clustering; representatives are cluster means.
  const size_t n = found.size();
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  const auto root_of = [&](int i) {
    while (label[i] != i) i = label[i] = label[label[i]];
    return i;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (std::abs(found[i] - found[j]) < cluster_tol) label[root_of(int(j))] = root_of(int(i));
    }
  }
  std::vector<int> order;
  for (size_t i = 0; i < n; ++i) {
    if (root_of(int(i)) == int(i)) order.push_back(int(i));
  }
  for (int rep : order) {
    cplx sum(0.0);
    int count = 0;
    for (size_t i = 0; i < n; ++i) {
      if (root_of(int(i)) == rep) {
        sum += found[i];
        ++count;
      }
    }
    out.roots.push_back({sum / double(count), count});
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) < std::abs(b.value);
    return std::arg(a.value) < std::arg(b.value);
  });
  for (const Root& r : out.roots) out.residual_bound = std::max(out.residual_bound, std::abs(p.eval(r.value)));
  return out;
}

bool divides(const Poly& q, const Poly& f, double tol) {
  const DivMod dm = divmod(f, q);
  return dm.remainder.l1_norm() <= tol * (1.0 + f.l1_norm());
}

int default_circle_samples(int degree) { return std::max(256, 64 * (degree + 1)); }

CircleMax circle_max(const Poly& p, double r, int samples) {
  if (samples < 8 * (p.degree() + 1)) throw InputError("too few samples for max-modulus estimate");
  return circle_max_generic([&](cplx z) { return p.eval(z); }, r, samples, p.majorant(r, 0),
                            p.majorant(r, 1), p.majorant(r, 2));
}

double max_modulus_on_circle(const Poly& p, double r, int samples) {
  if (r < 0.0) throw InputError("negative radius");
  return circle_max(p, r, samples).upper;
}

void to_json(nlohmann::json& j, const Poly& p) {
  j = nlohmann::json::array();
  for (const cplx& c : p.coeffs()) j.push_back({c.real(), c.imag()});
}

void from_json(const nlohmann::json& j, Poly& p) { p = poly_from_json(j); }

Poly poly_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("polynomial JSON must be an array of [re, im] pairs");
  std::vector<cplx> c;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw InputError("polynomial coefficient must be a [re, im] pair of numbers");
    }
    c.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return Poly(std::move(c));
}

}  // namespace chaoslab
