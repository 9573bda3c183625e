#include "chaoslab/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "chaoslab/error.hpp"

namespace chaoslab {

int total_degree(const MultiIndex& e) { return std::accumulate(e.begin(), e.end(), 0); }

std::string index_key(const MultiIndex& e) {
  std::string s;
  for (size_t i = 0; i < e.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(e[i]);
  }
  return s;
}

MultiIndex parse_index_key(const std::string& key, int k) {
  MultiIndex e;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      throw InputError("bad multi-index key '" + key + "'");
    }
    if (used != part.size() || v < 0) throw InputError("bad multi-index key '" + key + "'");
    e.push_back(v);
  }
  if (static_cast<int>(e.size()) != k) throw InputError("multi-index '" + key + "' has wrong length");
  return e;
}

// ---------------------------------------------------------------------------
// TruncatedSeries

TruncatedSeries::TruncatedSeries(int k, int D) : k_(k), D_(D) {
  if (k < 1) throw InputError("series needs at least one variable");
  if (D < 0) throw InputError("negative truncation degree");
}

TruncatedSeries TruncatedSeries::generator(int k, int D, int j) {
  if (j < 1 || j > k) throw InputError("generator index out of range");
  MultiIndex e(static_cast<size_t>(k), 0);
  e[j - 1] = 1;
  return monomial(k, D, e);
}

TruncatedSeries TruncatedSeries::monomial(int k, int D, const MultiIndex& e, cplx c) {
  TruncatedSeries s(k, D);
  s.add_term(e, c);
  return s;
}

TruncatedSeries TruncatedSeries::constant(int k, int D, cplx c) {
  return monomial(k, D, MultiIndex(static_cast<size_t>(k), 0), c);
}

cplx TruncatedSeries::coeff(const MultiIndex& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

int TruncatedSeries::max_total_degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
  return d;
}

void TruncatedSeries::add_term(const MultiIndex& e, cplx c) {
  if (static_cast<int>(e.size()) != k_) throw InputError("multi-index length does not match k");
  if (total_degree(e) > D_) {
    if (c != cplx(0.0)) truncated_ = true;
    return;
  }
  if (c == cplx(0.0)) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

void TruncatedSeries::check_compatible(const TruncatedSeries& o) const {
  if (o.k_ != k_ || o.D_ != D_) throw InputError("incompatible series operands (k or D differ)");
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o) {
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  truncated_ = truncated_ || o.truncated_;
  return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o) {
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  truncated_ = truncated_ || o.truncated_;
  return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(cplx s) {
  if (s == cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

double l1_norm(const TruncatedSeries& a) {
  double s = 0.0;
  for (const auto& [e, c] : a.terms()) s += std::abs(c);
  return s;
}

TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  a.check_compatible(b);
  TruncatedSeries out(a.k_, a.D_);
  out.truncated_ = a.truncated_ || b.truncated_;
  MultiIndex e(static_cast<size_t>(a.k_));
  for (const auto& [ea, ca] : a.terms_) {
    const int da = total_degree(ea);
    for (const auto& [eb, cb] : b.terms_) {
      if (da + total_degree(eb) > a.D_) {
        out.truncated_ = true;
        continue;
      }
      for (int i = 0; i < a.k_; ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

TruncatedSeries pow(const TruncatedSeries& a, int n) {
  if (n < 0) throw InputError("negative power");
  TruncatedSeries result = TruncatedSeries::constant(a.k(), a.D(), 1.0);
  TruncatedSeries base = a;
  while (n > 0) {
    if (n & 1) result = mul(result, base);
    n >>= 1;
    if (n > 0) base = mul(base, base);
  }
  return result;
}

TruncatedSeries embed_poly(const Poly& p, int k, int D) {
  if (!p.is_zero() && p.degree() > D) throw InputError("polynomial degree exceeds truncation degree");
  TruncatedSeries s(k, D);
  MultiIndex e(static_cast<size_t>(k), 0);
  for (int j = 0; j <= p.degree() && !p.is_zero(); ++j) {
    e[0] = j;
    s.add_term(e, p[j]);
  }
  return s;
}

void to_json(nlohmann::json& j, const TruncatedSeries& a) {
  j = nlohmann::json::object();
  for (const auto& [e, c] : a.terms()) j[index_key(e)] = {c.real(), c.imag()};
}

TruncatedSeries series_from_json(const nlohmann::json& j, int k, int D) {
  if (!j.is_object()) throw InputError("series JSON must be an object");
  TruncatedSeries s(k, D);
  for (const auto& [key, val] : j.items()) {
    if (!val.is_array() || val.size() != 2 || !val[0].is_number() || !val[1].is_number()) {
      throw InputError("series coefficient must be a [re, im] pair");
    }
    s.add_term(parse_index_key(key, k), cplx(val[0].get<double>(), val[1].get<double>()));
  }
  return s;
}

// ---------------------------------------------------------------------------
// XiComponent

namespace {

// log2 of the binomial coefficient C(n, j).
double log2_binom(int n, int j) {
  return (std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)) / std::log(2.0);
}

double log2_abs(cplx z) { return std::log2(std::abs(z)); }

cplx scaled_binomial_eval(const ScaledBinomial& s, cplx z) {
  if (s.mant == cplx(0.0)) return 0.0;
  double la = log2_abs(s.mant) + s.exp2;
  double th = std::arg(s.mant);
  if (s.shift > 0) {
    if (z == cplx(0.0)) return 0.0;
    la += s.shift * log2_abs(z);
    th += s.shift * std::arg(z);
  }
  if (s.power > 0) {
    const cplx w = 1.0 + z;
    if (w == cplx(0.0)) return 0.0;
    la += s.power * log2_abs(w);
    th += s.power * std::arg(w);
  }
  return std::polar(std::exp2(la), th);
}

// |mant| 2^exp2 r^shift (1+r)^e
double scaled_term(const ScaledBinomial& s, double r, int e) {
  if (e < 0) return 0.0;
  return std::exp2(log2_abs(s.mant) + s.exp2 + s.shift * std::log2(r) + e * std::log2(1.0 + r));
}

}  // namespace

XiComponent::XiComponent(Poly body) : body_(std::move(body)) {}

XiComponent::XiComponent(Poly body, ScaledBinomial extra) : body_(std::move(body)), extra_(extra) {
  if (extra.shift < 0 || extra.power < 0) throw InputError("negative exponent in scaled binomial");
  if (extra.mant == cplx(0.0)) extra_.reset();
}

XiComponent XiComponent::identity() { return XiComponent(Poly{0.0, 1.0}); }

int XiComponent::degree() const {
  int d = body_.degree();
  if (extra_) d = std::max(d, extra_->shift + extra_->power);
  return d;
}

int XiComponent::valuation() const {
  int v = body_.is_zero() ? kMaxDegree + 1 : body_.valuation();
  if (extra_) {
    if (extra_->shift < v) return extra_->shift;  // body cannot cancel a lower term
    if (extra_->shift == v) {
      // Possible cancellation at the lowest degree; fall back to coefficients.
      const auto t = taylor(v + 1);
      for (int j = 0; j <= v; ++j) {
        if (t[j] != cplx(0.0)) return j;
      }
      return v + 1;
    }
  }
  return v == kMaxDegree + 1 ? 0 : v;
}

cplx XiComponent::eval(cplx z) const {
  cplx v = body_.eval(z);
  if (extra_) v += scaled_binomial_eval(*extra_, z);
  return v;
}

double XiComponent::majorant(double r, int s) const {
  double m = body_.majorant(r, s);
  if (!extra_ || r == 0.0) return m;
  const ScaledBinomial& e = *extra_;
  const double a = e.shift, n = e.power;
  const double t0 = scaled_term(e, r, e.power);
  const double t1 = scaled_term(e, r, e.power - 1);
  const double t2 = scaled_term(e, r, e.power - 2);
  if (s == 0) return m + t0;
  if (s == 1) return m + a * t0 + n * r * t1;
  return m + a * a * t0 + (2.0 * a * n + n) * r * t1 + n * (n - 1.0) * r * r * t2;
}

std::vector<cplx> XiComponent::taylor(int n) const {
  std::vector<cplx> out(static_cast<size_t>(std::max(n, 0)), cplx(0.0));
  for (int j = 0; j < n && j <= body_.degree() && !body_.is_zero(); ++j) out[j] = body_[j];
  if (!extra_) return out;
  const ScaledBinomial& e = *extra_;
  if (e.shift >= n) return out;
  const int top = std::min(e.power, n - 1 - e.shift);
  double c = 1.0;  // C(power, j) built incrementally
  for (int j = 0; j <= top; ++j) {
    if (j > 0) {
      c = c * double(e.power - j + 1) / double(j);
      if (c < 1e15) c = std::round(c);
    }
    double mag;
    if (std::isfinite(c)) {
      mag = std::ldexp(c, e.exp2);
    } else {
      mag = std::exp2(log2_binom(e.power, j) + e.exp2);
    }
    const cplx v = e.mant * mag;
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw Error("Taylor coefficient overflow at degree " + std::to_string(e.shift + j));
    }
    out[e.shift + j] += v;
  }
  return out;
}

std::vector<cplx> XiComponent::jet(cplx lambda, int order) const {
  std::vector<cplx> out(static_cast<size_t>(order), cplx(0.0));
  if (order <= 0) return out;
  // Taylor shift of the body by repeated synthetic division.
  if (!body_.is_zero()) {
    std::vector<cplx> c = body_.coeffs();
    const int d = body_.degree();
    for (int i = 0; i < order && i <= d; ++i) {
      cplx acc(0.0);
      for (int j = d; j >= i; --j) {
        acc = acc * lambda + c[j];
        c[j] = acc;
      }
      out[i] = c[i];
    }
  }
  if (!extra_) return out;
  const ScaledBinomial& e = *extra_;
  // (lambda + h)^shift (1 + lambda + h)^power, both factors expanded in h,
  // coefficients carried as (log2 magnitude, phase).
  struct Lg {
    double l2;
    double th;
    bool zero;
  };
  const auto expand = [&](cplx base, int p) {
    std::vector<Lg> f(static_cast<size_t>(order), Lg{0.0, 0.0, true});
    for (int i = 0; i < order && i <= p; ++i) {
      if (base == cplx(0.0)) {
        if (i == p) f[i] = Lg{0.0, 0.0, false};
        continue;
      }
      f[i] = Lg{log2_binom(p, i) + (p - i) * log2_abs(base), (p - i) * std::arg(base), false};
    }
    return f;
  };
  const auto fa = expand(lambda, e.shift);
  const auto fb = expand(1.0 + lambda, e.power);
  const double l2m = log2_abs(e.mant) + e.exp2;
  const double thm = std::arg(e.mant);
  for (int i = 0; i < order; ++i) {
    if (fa[i].zero) continue;
    for (int j = 0; i + j < order; ++j) {
      if (fb[j].zero) continue;
      out[i + j] += std::polar(std::exp2(l2m + fa[i].l2 + fb[j].l2), thm + fa[i].th + fb[j].th);
    }
  }
  return out;
}

std::vector<cplx> XiComponent::residue(const Poly& q) const {
  const int d = q.degree();
  if (q.is_zero() || q.leading() != cplx(1.0)) throw InputError("residue needs a monic modulus");
  std::vector<cplx> out(static_cast<size_t>(d), cplx(0.0));
  if (d == 0) return out;
  const Poly rb = divmod(body_, q).remainder;
  for (int i = 0; i < d; ++i) out[i] = rb[i];
  if (!extra_) return out;
  const ScaledBinomial& e = *extra_;
  std::vector<cplx> v(static_cast<size_t>(d), cplx(0.0));
  v[0] = 1.0;
  int scale = 0;  // v carries an extra factor 2^scale
  const auto renorm = [&]() {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    if (m == 0.0) return;
    int ex = 0;
    std::frexp(m, &ex);
    if (ex > 64 || ex < -64) {
      for (cplx& x : v) x = std::ldexp(1.0, -ex) * x;
      scale += ex;
    }
  };
  const auto times_z = [&](std::vector<cplx>& w) {
    const cplx top = w[d - 1];
    for (int i = d - 1; i > 0; --i) w[i] = w[i - 1] - top * q[i];
    w[0] = -top * q[0];
  };
  for (int s = 0; s < e.shift; ++s) {
    times_z(v);
    renorm();
  }
  for (int s = 0; s < e.power; ++s) {
    std::vector<cplx> zv = v;
    times_z(zv);
    for (int i = 0; i < d; ++i) v[i] += zv[i];
    renorm();
  }
  for (int i = 0; i < d; ++i) {
    if (v[i] == cplx(0.0)) continue;
    const double l2 = log2_abs(v[i]) + log2_abs(e.mant) + scale + e.exp2;
    const cplx term = std::polar(std::exp2(l2), std::arg(v[i]) + std::arg(e.mant));
    if (!std::isfinite(term.real()) || !std::isfinite(term.imag())) throw Error("residue overflow");
    out[i] += term;
  }
  return out;
}

bool XiComponent::expandable() const {
  if (!extra_) return true;
  const ScaledBinomial& e = *extra_;
  return log2_abs(e.mant) + e.exp2 + log2_binom(e.power, e.power / 2) < 1000.0;
}

Poly XiComponent::to_poly() const {
  if (!extra_) return body_;
  if (!expandable()) throw Error("component coefficients exceed double range");
  const ScaledBinomial& e = *extra_;
  Poly t = Poly::one_plus_z_pow(e.power) * Poly::monomial(e.shift, e.mant);
  std::vector<cplx> c = t.coeffs();
  for (cplx& x : c) x = cplx(std::ldexp(x.real(), e.exp2), std::ldexp(x.imag(), e.exp2));
  return body_ + Poly(std::move(c));
}

void to_json(nlohmann::json& j, const XiComponent& x) {
  j = nlohmann::json::object();
  j["body"] = x.body();
  if (x.extra()) {
    const ScaledBinomial& e = *x.extra();
    j["scaled_binomial"] = {{"shift", e.shift},
                            {"power", e.power},
                            {"mant", {e.mant.real(), e.mant.imag()}},
                            {"exp2", e.exp2}};
  }
}

XiComponent xi_component_from_json(const nlohmann::json& j) {
  if (j.is_array()) return XiComponent(poly_from_json(j));
  if (!j.is_object() || !j.contains("body")) throw InputError("component JSON needs a body");
  Poly body = poly_from_json(j.at("body"));
  if (!j.contains("scaled_binomial")) return XiComponent(std::move(body));
  const auto& s = j.at("scaled_binomial");
  try {
    ScaledBinomial e;
    e.shift = s.at("shift").get<int>();
    e.power = s.at("power").get<int>();
    e.mant = cplx(s.at("mant").at(0).get<double>(), s.at("mant").at(1).get<double>());
    e.exp2 = s.at("exp2").get<int>();
    return XiComponent(std::move(body), e);
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("bad scaled_binomial: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// SubstTuple

SubstTuple::SubstTuple(std::vector<XiComponent> xi) : xi_(std::move(xi)) {
  if (xi_.empty()) throw InputError("substitution tuple is empty");
  if (!(xi_[0] == XiComponent::identity())) throw InputError("first component must be z");
  for (const XiComponent& c : xi_) {
    if (c.body()[0] != cplx(0.0) || (c.extra() && c.extra()->shift < 1)) {
      throw InputError("substitution components must vanish at 0");
    }
  }
}

SubstTuple::SubstTuple(const SubstTuple& o) : xi_(o.xi_), gamma_(o.gamma_) {}

SubstTuple& SubstTuple::operator=(const SubstTuple& o) {
  if (this != &o) {
    std::scoped_lock lock(mu_);
    xi_ = o.xi_;
    gamma_ = o.gamma_;
    powers_.clear();
  }
  return *this;
}

SubstTuple SubstTuple::from_polys(const std::vector<Poly>& xi) {
  std::vector<XiComponent> c;
  for (const Poly& p : xi) c.emplace_back(p);
  return SubstTuple(std::move(c));
}

SubstTuple SubstTuple::appended(const XiComponent& c) const {
  std::vector<XiComponent> v = xi_;
  v.push_back(c);
  return SubstTuple(std::move(v));
}

double SubstTuple::gamma() const {
  {
    std::scoped_lock lock(mu_);
    if (gamma_) return *gamma_;
  }
  const double g = chaoslab::gamma(*this, 1e-9);
  std::scoped_lock lock(mu_);
  gamma_ = g;
  return g;
}

std::shared_ptr<const std::vector<cplx>> SubstTuple::taylor_power(int j, int t, int M) const {
  const auto key = std::make_tuple(j, t, M);
  {
    std::scoped_lock lock(mu_);
    auto it = powers_.find(key);
    if (it != powers_.end()) return it->second;
  }
  std::shared_ptr<const std::vector<cplx>> val;
  if (t == 0) {
    std::vector<cplx> one(static_cast<size_t>(M) + 1, cplx(0.0));
    one[0] = 1.0;
    val = std::make_shared<const std::vector<cplx>>(std::move(one));
  } else if (t == 1) {
    val = std::make_shared<const std::vector<cplx>>(xi_[j].taylor(M + 1));
  } else {
    const auto prev = taylor_power(j, t - 1, M);
    const auto base = taylor_power(j, 1, M);
    val = std::make_shared<const std::vector<cplx>>(mul_trunc(*prev, *base, M + 1));
  }
  std::scoped_lock lock(mu_);
  powers_.emplace(key, val);
  return val;
}

double component_circle_max(const XiComponent& f, double r) {
  if (r == 0.0) return std::abs(f.eval(0.0));
  const double m0 = f.majorant(r, 0), m1 = f.majorant(r, 1), m2 = f.majorant(r, 2);
  int samples = default_circle_samples(std::min(f.degree(), kMaxDegree));
  const auto eval = [&](cplx z) { return f.eval(z); };
  CircleMax cm = circle_max_generic(eval, r, samples, m0, m1, m2);
  // Refine only when the slack straddles the unit threshold used by gamma.
  while (cm.sampled <= 1.0 && cm.upper > 1.0 && samples < (1 << 20)) {
    samples *= 4;
    cm = circle_max_generic(eval, r, samples, m0, m1, m2);
  }
  return cm.upper;
}

double gamma(const SubstTuple& xi, double tol) {
  if (!(tol > 0.0)) throw InputError("gamma tolerance must be positive");
  const auto inside = [&](double r) {
    for (const XiComponent& c : xi.components()) {
      if (!(component_circle_max(c, r) <= 1.0)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  if (inside(hi)) return hi;
  for (int it = 0; it < 60 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<cplx> mul_trunc(const std::vector<cplx>& a, const std::vector<cplx>& b, int n) {
  std::vector<cplx> out(static_cast<size_t>(n), cplx(0.0));
  const int na = std::min<int>(n, static_cast<int>(a.size()));
  const int nb = std::min<int>(n, static_cast<int>(b.size()));
  for (int i = 0; i < na; ++i) {
    if (a[i] == cplx(0.0)) continue;
    const int lim = std::min(nb, n - i);
    for (int j = 0; j < lim; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<cplx> substitute(const TruncatedSeries& a, const SubstTuple& xi, int M) {
  if (a.k() != xi.k()) throw InputError("series and tuple have different k");
  if (M < 0) throw InputError("negative Taylor depth");
  std::vector<cplx> out(static_cast<size_t>(M) + 1, cplx(0.0));
  for (const auto& [e, c] : a.terms()) {
    std::vector<cplx> prod;
    bool first = true;
    for (int j = 0; j < a.k(); ++j) {
      if (e[j] == 0) continue;
      const auto pw = xi.taylor_power(j, e[j], M);
      prod = first ? *pw : mul_trunc(prod, *pw, M + 1);
      first = false;
    }
    if (first) {
      out[0] += c;
      continue;
    }
    for (int m = 0; m <= M; ++m) out[m] += c * prod[m];
  }
  return out;
}

}  // namespace chaoslab
