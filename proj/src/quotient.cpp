#include "chaoslab/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "chaoslab/error.hpp"

namespace chaoslab {

// ---------------------------------------------------------------------------
// l1 solver

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

VectorXd realify(const VectorXcd& v) {
  VectorXd r(2 * v.size());
  r << v.real(), v.imag();
  return r;
}

VectorXcd complexify(const VectorXd& r) {
  const Eigen::Index m = r.size() / 2;
  VectorXcd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = cplx(r(i), r(m + i));
  return v;
}

MatrixXd realify(const MatrixXcd& M) {
  const Eigen::Index m = M.rows();
  MatrixXd R(2 * m, 2 * m);
  R.topLeftCorner(m, m) = M.real();
  R.topRightCorner(m, m) = -M.imag();
  R.bottomLeftCorner(m, m) = M.imag();
  R.bottomRightCorner(m, m) = M.real();
  return R;
}

// x += D A^H (A D A^H)^{-1} (b - A x), D = diag(d), restricted to d > 0.
bool project(const MatrixXcd& A, const VectorXcd& b, const VectorXd& d, VectorXcd& x) {
  const MatrixXcd AD = A * d.cast<cplx>().asDiagonal();
  const MatrixXcd K = AD * A.adjoint();
  Eigen::LDLT<MatrixXcd> ldlt(K);
  if (ldlt.info() != Eigen::Success) return false;
  const VectorXcd r = b - A * x;
  const VectorXcd w = ldlt.solve(r);
  if (!w.allFinite()) return false;
  x += AD.adjoint() * w;
  return x.allFinite();
}

double barrier_value(const VectorXcd& s, double tau, const VectorXcd& b, const VectorXcd& y) {
  double f = -tau * b.dot(y).real();
  for (Eigen::Index t = 0; t < s.size(); ++t) f -= std::log1p(-std::norm(s(t)));
  return f;
}

bool strictly_feasible(const VectorXcd& s) {
  for (Eigen::Index t = 0; t < s.size(); ++t) {
    if (!(std::norm(s(t)) < 1.0)) return false;
  }
  return true;
}

}  // namespace

L1Solution solve_l1(const MatrixXcd& A_in, const VectorXcd& b_in, const L1Options& opt) {
  if (A_in.rows() != b_in.size()) throw InputError("constraint matrix and rhs sizes differ");
  const Eigen::Index N = A_in.cols();
  L1Solution out;
  out.x = VectorXcd::Zero(N);
  if (b_in.size() == 0 || b_in.cwiseAbs().maxCoeff() == 0.0) {
    out.converged = true;
    return out;
  }
  // Row equilibration; identically zero rows must have zero rhs.
  std::vector<Eigen::Index> keep;
  std::vector<double> scale;
  for (Eigen::Index i = 0; i < A_in.rows(); ++i) {
    const double r = N > 0 ? A_in.row(i).cwiseAbs().maxCoeff() : 0.0;
    if (r == 0.0) {
      if (b_in(i) != cplx(0.0)) throw Error("no representative at this truncation");
      continue;
    }
    keep.push_back(i);
    scale.push_back(1.0 / r);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  MatrixXcd A(m, N);
  VectorXcd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    A.row(i) = A_in.row(keep[i]) * scale[i];
    b(i) = b_in(keep[i]) * scale[i];
  }
  {
    // Column scaling does not change the rank but keeps large columns from
    // swamping the eigenvalue ratio.
    MatrixXcd As = A;
    for (Eigen::Index t = 0; t < N; ++t) {
      const double c = As.col(t).cwiseAbs().maxCoeff();
      if (c > 0.0) As.col(t) /= c;
    }
    const MatrixXcd G = As * As.adjoint();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(G);
    const VectorXd ev = es.eigenvalues();
    if (ev(0) <= 1e-24 * ev(m - 1)) {
      // Least-squares consistency decides which failure to report.
      const VectorXcd xls = As.completeOrthogonalDecomposition().solve(b);
      if ((As * xls - b).norm() > 1e-9 * (1.0 + b.norm())) throw Error("no representative at this truncation");
      throw Error("rank deficient constraint matrix");
    }
  }

  VectorXcd y = VectorXcd::Zero(m);
  double tau = 1.0 / std::max(1e-300, b.cwiseAbs().maxCoeff());
  VectorXcd best_x = VectorXcd::Zero(N);
  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = 0.0;
  VectorXd best_d = VectorXd::Ones(N);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    VectorXcd s = A.adjoint() * y;
    for (int it = 0; it < opt.max_newton; ++it) {
      const VectorXd ns = s.cwiseAbs2();
      const VectorXd c1 = (2.0 / (1.0 - ns.array())).matrix();
      const VectorXd c2 = c1.cwiseAbs2();
      const VectorXcd c1c = c1.cast<cplx>();
      const VectorXcd g = -tau * b + A * c1c.cwiseProduct(s);
      const MatrixXcd AS = A * s.asDiagonal();
      MatrixXd W(2 * m, N);
      W.topRows(m) = AS.real();
      W.bottomRows(m) = AS.imag();
      MatrixXd H = realify(MatrixXcd(A * c1c.asDiagonal() * A.adjoint()));
      H.noalias() += W * c2.asDiagonal() * W.transpose();
      const VectorXd gr = realify(g);
      Eigen::LDLT<MatrixXd> ldlt(H);
      const VectorXd step = -ldlt.solve(gr);
      if (!step.allFinite()) break;
      const double dec = -gr.dot(step);
      ++out.newton_steps;
      if (dec < 1e-12) break;
      const VectorXcd dy = complexify(step);
      const VectorXcd ds = A.adjoint() * dy;
      const double f0 = barrier_value(s, tau, b, y);
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const VectorXcd s1 = s + t * ds;
        if (!strictly_feasible(s1)) continue;
        const VectorXcd y1 = y + t * dy;
        if (barrier_value(s1, tau, b, y1) <= f0 - 0.25 * t * dec) {
          y = y1;
          s = s1;
          moved = true;
          break;
        }
      }
      if (!moved || dec < 1e-10) break;
    }
    // Primal recovery and weak-duality lower bound.
    const VectorXd ns = s.cwiseAbs2();
    const VectorXd c1 = (2.0 / (1.0 - ns.array())).matrix();
    VectorXcd x = (c1 / tau).cast<cplx>().cwiseProduct(s);
    if (!project(A, b, c1, x)) break;
    const double smax = std::sqrt(ns.maxCoeff());
    const double lower = b.dot(y).real() / std::max(1.0, smax);
    const double upper = x.cwiseAbs().sum();
    if (upper < best_upper) {
      best_upper = upper;
      best_x = x;
      best_d = c1;
    }
    best_lower = std::max(best_lower, lower);
    if (best_upper - best_lower <= opt.gap_tol * std::max(1.0, best_upper)) {
      out.converged = true;
      break;
    }
    tau *= opt.mu;
  }

  // Drop negligible entries and re-project on the remaining support; the
  // coarsest threshold that keeps feasibility and lowers the value wins.
  const double xmax = best_x.cwiseAbs().maxCoeff();
  const double res0 = (A * best_x - b).cwiseAbs().maxCoeff();
  VectorXcd polished = best_x;
  double polished_value = best_upper;
  for (double thr : {opt.prune_rel, 1e-9, 1e-6}) {
    VectorXcd x = best_x;
    VectorXd d = best_d;
    for (Eigen::Index t = 0; t < N; ++t) {
      if (std::abs(x(t)) < thr * xmax) {
        x(t) = 0.0;
        d(t) = 0.0;
      }
    }
    if (!project(A, b, d, x)) continue;
    const double v = x.cwiseAbs().sum();
    if ((A * x - b).cwiseAbs().maxCoeff() <= std::max(res0, 1e-15) * 10.0 && v <= polished_value) {
      polished = x;
      polished_value = v;
    }
  }
  best_x = polished;
  out.x = best_x;
  out.value = best_x.cwiseAbs().sum();
  out.lower = std::min(best_lower, out.value);
  out.gap = out.value - out.lower;
  out.residual = (A_in * best_x - b_in).cwiseAbs().maxCoeff();
  if (!out.converged) out.converged = out.gap <= 1e3 * opt.gap_tol * std::max(1.0, out.value);
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

std::string to_string(BoundTag t) {
  switch (t) {
    case BoundTag::exact:
      return "exact";
    case BoundTag::upper_bound:
      return "upper-bound";
    case BoundTag::lower_estimate:
      return "lower-estimate";
  }
  return "upper-bound";
}

double NormCertificate::max_residual() const {
  double r = 0.0;
  for (double v : residuals) r = std::max(r, v);
  return r;
}

void to_json(nlohmann::json& j, const NormCertificate& c) {
  j = nlohmann::json::object();
  j["value"] = c.value;
  j["witness"] = c.witness;
  j["residuals"] = c.residuals;
  j["solver_gap"] = c.solver_gap;
  j["lower_bound"] = c.lower_bound;
  j["tag"] = to_string(c.tag);
  j["encoding"] = c.encoding;
  j["rows"] = c.rows;
  j["columns"] = c.columns;
  j["truncation_active"] = c.truncation_active;
}

NormCertificate certificate_from_json(const nlohmann::json& j, int k, int D) {
  NormCertificate c;
  try {
    c.value = j.at("value").get<double>();
    c.witness = series_from_json(j.at("witness"), k, D);
    c.residuals = j.at("residuals").get<std::vector<double>>();
    c.solver_gap = j.at("solver_gap").get<double>();
    c.lower_bound = j.at("lower_bound").get<double>();
    const std::string tag = j.at("tag").get<std::string>();
    if (tag == "exact") c.tag = BoundTag::exact;
    else if (tag == "upper-bound") c.tag = BoundTag::upper_bound;
    else if (tag == "lower-estimate") c.tag = BoundTag::lower_estimate;
    else throw InputError("unknown bound tag " + tag);
    c.encoding = j.at("encoding").get<std::string>();
    c.rows = j.at("rows").get<int>();
    c.columns = j.at("columns").get<int>();
    c.truncation_active = j.at("truncation_active").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed certificate: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Constraint assembly

namespace {

using Vec = std::vector<cplx>;

// A linear encoding of the quotient map P -> P / I: images of u_j, the
// product, the unit and the image of the target polynomial.
struct Encoding {
  int rows = 0;
  std::vector<Vec> base;
  std::function<Vec(const Vec&, const Vec&)> mul;
  Vec one;
};

void enumerate(const Encoding& enc, int k, int max_total, const std::vector<int>& weight, int weight_cap,
               int j, MultiIndex& e, const Vec& prefix, int remaining, int used_weight,
               const std::function<void(const MultiIndex&, const Vec&)>& emit) {
  Vec cur = prefix;
  for (int t = 0; t <= remaining; ++t) {
    const int w = used_weight + t * (weight.empty() ? 0 : weight[j]);
    if (!weight.empty() && w > weight_cap) break;
    e[j] = t;
    if (j + 1 == k) {
      emit(e, cur);
    } else {
      enumerate(enc, k, max_total, weight, weight_cap, j + 1, e, cur, remaining - t, w, emit);
    }
    if (t < remaining) cur = enc.mul(cur, enc.base[j]);
  }
  e[j] = 0;
}

struct Columns {
  Eigen::MatrixXcd A;
  std::vector<MultiIndex> monomials;
};

Columns assemble(const Encoding& enc, int k, int max_total, const std::vector<int>& weight = {},
                 int weight_cap = 0) {
  std::vector<Vec> cols;
  std::vector<MultiIndex> mons;
  MultiIndex e(static_cast<size_t>(k), 0);
  enumerate(enc, k, max_total, weight, weight_cap, 0, e, enc.one, max_total, 0,
            [&](const MultiIndex& ex, const Vec& v) {
              bool nz = false;
              for (const cplx& c : v) nz = nz || c != cplx(0.0);
              if (!nz) return;
              cols.push_back(v);
              mons.push_back(ex);
            });
  Columns out;
  out.A.resize(enc.rows, static_cast<Eigen::Index>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) {
    for (int r = 0; r < enc.rows; ++r) out.A(r, static_cast<Eigen::Index>(c)) = cols[c][r];
  }
  out.monomials = std::move(mons);
  return out;
}

Encoding powers_encoding(const SubstTuple& xi, int n) {
  Encoding enc;
  enc.rows = n;
  for (int j = 0; j < xi.k(); ++j) enc.base.push_back(xi[j].taylor(n));
  enc.mul = [n](const Vec& a, const Vec& b) { return mul_trunc(a, b, n); };
  enc.one.assign(static_cast<size_t>(n), cplx(0.0));
  enc.one[0] = 1.0;
  return enc;
}

Vec mul_mod(const Vec& a, const Vec& b, const Poly& q) {
  const Poly prod = Poly(a) * Poly(b);
  const Poly r = divmod(prod, q).remainder;
  Vec out(static_cast<size_t>(q.degree()), cplx(0.0));
  for (int i = 0; i < q.degree(); ++i) out[i] = r[i];
  return out;
}

Encoding residue_encoding(const SubstTuple& xi, const Poly& q) {
  Encoding enc;
  enc.rows = q.degree();
  for (int j = 0; j < xi.k(); ++j) enc.base.push_back(xi[j].residue(q));
  enc.mul = [q](const Vec& a, const Vec& b) { return mul_mod(a, b, q); };
  enc.one.assign(static_cast<size_t>(q.degree()), cplx(0.0));
  enc.one[0] = 1.0;
  return enc;
}

Encoding jet_encoding(const SubstTuple& xi, const RootSet& rs) {
  Encoding enc;
  std::vector<int> mult;
  for (const Root& r : rs.roots) mult.push_back(r.multiplicity);
  enc.rows = rs.total_multiplicity();
  for (int j = 0; j < xi.k(); ++j) {
    Vec v;
    for (const Root& r : rs.roots) {
      const Vec jt = xi[j].jet(r.value, r.multiplicity);
      v.insert(v.end(), jt.begin(), jt.end());
    }
    enc.base.push_back(std::move(v));
  }
  enc.mul = [mult](const Vec& a, const Vec& b) {
    Vec out(a.size(), cplx(0.0));
    size_t off = 0;
    for (int r : mult) {
      for (int i = 0; i < r; ++i) {
        for (int l = 0; i + l < r; ++l) out[off + i + l] += a[off + i] * b[off + l];
      }
      off += static_cast<size_t>(r);
    }
    return out;
  };
  enc.one.assign(static_cast<size_t>(enc.rows), cplx(0.0));
  size_t off = 0;
  for (int r : mult) {
    enc.one[off] = 1.0;
    off += static_cast<size_t>(r);
  }
  return enc;
}

Vec poly_jets(const Poly& p, const RootSet& rs) {
  Vec v;
  const XiComponent pc(p);
  for (const Root& r : rs.roots) {
    const Vec jt = pc.jet(r.value, r.multiplicity);
    v.insert(v.end(), jt.begin(), jt.end());
  }
  return v;
}

Vec poly_residue(const Poly& p, const Poly& q) {
  const Poly r = divmod(p, q).remainder;
  Vec out(static_cast<size_t>(q.degree()), cplx(0.0));
  for (int i = 0; i < q.degree(); ++i) out[i] = r[i];
  return out;
}

// Image of a series under an encoding, term by term (no matrix involved).
Vec image(const Encoding& enc, const TruncatedSeries& a) {
  Vec out(static_cast<size_t>(enc.rows), cplx(0.0));
  for (const auto& [e, c] : a.terms()) {
    Vec v = enc.one;
    for (int j = 0; j < a.k(); ++j) {
      for (int t = 0; t < e[j]; ++t) v = enc.mul(v, enc.base[j]);
    }
    for (int r = 0; r < enc.rows; ++r) out[r] += c * v[r];
  }
  return out;
}

std::vector<double> diff_abs(const Vec& a, const Vec& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]);
  return out;
}

TruncatedSeries witness_from(const L1Solution& sol, const std::vector<MultiIndex>& mons, int k, int D) {
  TruncatedSeries w(k, D);
  for (size_t c = 0; c < mons.size(); ++c) {
    const cplx v = sol.x(static_cast<Eigen::Index>(c));
    if (v != cplx(0.0)) w.add_term(mons[c], v);
  }
  return w;
}

NormCertificate certify(const L1Solution& sol, const std::vector<MultiIndex>& mons, int k, int D) {
  NormCertificate c;
  c.witness = witness_from(sol, mons, k, D);
  c.value = l1_norm(c.witness);
  c.solver_gap = std::max(0.0, c.value - sol.lower);
  c.lower_bound = sol.lower;
  return c;
}

Eigen::VectorXcd to_eigen(const Vec& v) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

std::vector<MultiIndex> monomials_up_to(int k, int max_degree) {
  std::vector<MultiIndex> out;
  MultiIndex e(static_cast<size_t>(k), 0);
  std::function<void(int, int)> rec = [&](int j, int rem) {
    for (int t = 0; t <= rem; ++t) {
      e[j] = t;
      if (j + 1 == k) {
        out.push_back(e);
      } else {
        rec(j + 1, rem - t);
      }
    }
    e[j] = 0;
  };
  rec(0, max_degree);
  std::stable_sort(out.begin(), out.end(),
                   [](const MultiIndex& a, const MultiIndex& b) { return total_degree(a) < total_degree(b); });
  return out;
}

// ---------------------------------------------------------------------------
// QuotientContext

QuotientContext::QuotientContext(SubstTuple xi, int D, L1Options opt) : xi_(std::move(xi)), D_(D), opt_(opt) {
  if (D < 0) throw InputError("negative truncation degree");
}

std::shared_ptr<const QuotientContext::Assembly> QuotientContext::powers_matrix(int n) {
  {
    std::scoped_lock lock(mu_);
    auto it = powers_cache_.find(n);
    if (it != powers_cache_.end()) return it->second;
  }
  // Every xi_j vanishes at 0, so monomials of total degree >= n lie in z^n P.
  const Encoding enc = powers_encoding(xi_, n);
  Columns cols = assemble(enc, xi_.k(), std::min(D_, n - 1));
  auto a = std::make_shared<Assembly>();
  a->A = std::move(cols.A);
  a->monomials = std::move(cols.monomials);
  std::scoped_lock lock(mu_);
  powers_cache_.emplace(n, a);
  return a;
}

NormCertificate QuotientContext::powers(const Poly& p, int n) {
  if (n < 1) throw InputError("power constraint needs n >= 1");
  const auto as = powers_matrix(n);
  Vec rhs(static_cast<size_t>(n), cplx(0.0));
  for (int j = 0; j < n; ++j) rhs[j] = p[j];
  const L1Solution sol = solve_l1(as->A, to_eigen(rhs), opt_);
  NormCertificate c = certify(sol, as->monomials, xi_.k(), D_);
  const std::vector<cplx> alpha = substitute(c.witness, xi_, n - 1);
  c.residuals = diff_abs(Vec(alpha.begin(), alpha.end()), rhs);
  c.truncation_active = D_ < n - 1;
  c.tag = c.truncation_active ? BoundTag::upper_bound : BoundTag::exact;
  c.encoding = "powers";
  c.rows = n;
  c.columns = static_cast<int>(as->A.cols());
  return c;
}

NormCertificate QuotientContext::divisor(const Poly& p, const Poly& q_in, DivisorEncoding which) {
  if (q_in.is_zero()) throw InputError("divisor must be nonzero");
  const Poly q = q_in.monic();
  NormCertificate c;
  c.witness = TruncatedSeries(xi_.k(), D_);
  c.encoding = which == DivisorEncoding::jets ? "jets" : "residues";
  if (q.degree() == 0) {
    c.tag = BoundTag::exact;
    return c;
  }
  const RootSet rs = roots(q);
  const double g = xi_.gamma();
  for (const Root& r : rs.roots) {
    if (!(std::abs(r.value) < g)) throw InputError("divisor root outside the gamma(xi) disk");
  }
  const Encoding jets = jet_encoding(xi_, rs);
  const Encoding res = residue_encoding(xi_, q);
  const Encoding& enc = which == DivisorEncoding::jets ? jets : res;
  const Vec rhs = which == DivisorEncoding::jets ? poly_jets(p, rs) : poly_residue(p, q);
  const Columns cols = assemble(enc, xi_.k(), D_);
  const L1Solution sol = solve_l1(cols.A, to_eigen(rhs), opt_);
  c = certify(sol, cols.monomials, xi_.k(), D_);
  c.encoding = which == DivisorEncoding::jets ? "jets" : "residues";
  // Replay through the other encoding.
  if (which == DivisorEncoding::jets) {
    c.residuals = diff_abs(image(res, c.witness), poly_residue(p, q));
  } else {
    c.residuals = diff_abs(image(jets, c.witness), poly_jets(p, rs));
  }
  c.truncation_active = true;
  c.tag = BoundTag::upper_bound;
  c.rows = enc.rows;
  c.columns = static_cast<int>(cols.A.cols());
  return c;
}

NormCertificate QuotientContext::interpolation(const Poly& p) {
  const int L = std::max(D_, p.is_zero() ? 0 : p.degree());
  std::vector<int> weight;
  for (const XiComponent& x : xi_.components()) weight.push_back(std::max(1, x.degree()));
  Encoding enc;
  enc.rows = L + 1;
  for (int j = 0; j < xi_.k(); ++j) {
    if (xi_[j].degree() <= L) {
      enc.base.push_back(xi_[j].taylor(L + 1));
    } else {
      enc.base.push_back(Vec(static_cast<size_t>(L + 1), cplx(0.0)));  // never reached: weight cap
    }
  }
  enc.mul = [L](const Vec& a, const Vec& b) { return mul_trunc(a, b, L + 1); };
  enc.one.assign(static_cast<size_t>(L + 1), cplx(0.0));
  enc.one[0] = 1.0;
  const Columns cols = assemble(enc, xi_.k(), D_, weight, L);
  Vec rhs(static_cast<size_t>(L + 1), cplx(0.0));
  for (int j = 0; j <= L; ++j) rhs[j] = p[j];
  const L1Solution sol = solve_l1(cols.A, to_eigen(rhs), opt_);
  NormCertificate c = certify(sol, cols.monomials, xi_.k(), D_);
  const std::vector<cplx> alpha = substitute(c.witness, xi_, L);
  c.residuals = diff_abs(Vec(alpha.begin(), alpha.end()), rhs);
  c.truncation_active = true;
  c.tag = BoundTag::upper_bound;
  c.encoding = "interpolation";
  c.rows = L + 1;
  c.columns = static_cast<int>(cols.A.cols());
  return c;
}

NormCertificate quotient_norm_powers(const Poly& p, const SubstTuple& xi, int n, int D) {
  QuotientContext ctx(xi, D);
  return ctx.powers(p, n);
}

NormCertificate quotient_norm_divisor(const Poly& p, const SubstTuple& xi, const Poly& q, int D,
                                      DivisorEncoding enc) {
  QuotientContext ctx(xi, D);
  return ctx.divisor(p, q, enc);
}

PiEstimate pi_xi_estimate(const Poly& p, const SubstTuple& xi, int D, int n_max) {
  if (n_max < (p.is_zero() ? 0 : p.degree()) + 1) throw InputError("n_max must exceed deg p");
  QuotientContext ctx(xi, D);
  PiEstimate out;
  for (int n = 1; n <= n_max; ++n) {
    const NormCertificate c = ctx.powers(p, n);
    if (!out.values.empty() && c.value < out.values.back() - out.gaps.back() - c.solver_gap - 1e-6) {
      out.monotone = false;
    }
    out.values.push_back(c.value);
    out.gaps.push_back(c.solver_gap);
  }
  out.lower = out.values.back();
  try {
    out.upper = ctx.interpolation(p).value;
  } catch (const Error&) {
    out.upper = std::numeric_limits<double>::infinity();
  }
  return out;
}

Limi2Probe limi2_probe(const Poly& p, const SubstTuple& xi, const std::vector<Poly>& q_seq, const Poly& q_inf,
                       int D) {
  QuotientContext ctx(xi, D);
  Limi2Probe out;
  out.limit = ctx.divisor(p, q_inf).value;
  for (const Poly& q : q_seq) {
    if (q.degree() != q_inf.degree()) throw InputError("limi2 sequence degrees differ");
    const double v = ctx.divisor(p, q).value;
    out.values.push_back(v);
    out.diffs.push_back(std::abs(v - out.limit));
  }
  return out;
}

}  // namespace chaoslab
