#include "chaoslab/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "chaoslab/error.hpp"
#include "chaoslab/series.hpp"

namespace chaoslab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kJoinTol = 1e-10;

cplx pow1p(cplx z, int n) {
  const cplx w = 1.0 + z;
  return std::polar(std::pow(std::abs(w), n), n * std::arg(w));
}

}  // namespace

// ---------------------------------------------------------------------------
// Paths

PathSegment PathSegment::line(cplx a, cplx b) {
  PathSegment s;
  s.kind = Kind::line;
  s.from = a;
  s.to = b;
  return s;
}

PathSegment PathSegment::arc(cplx center, double radius, double t_start, double t_end) {
  if (!(radius > 0.0)) throw InputError("arc radius must be positive");
  PathSegment s;
  s.kind = Kind::arc;
  s.center = center;
  s.radius = radius;
  s.t_start = t_start;
  s.t_end = t_end;
  return s;
}

cplx PathSegment::point(double u) const {
  if (kind == Kind::line) return from + u * (to - from);
  return center + std::polar(radius, t_start + u * (t_end - t_start));
}

double PathSegment::length() const {
  if (kind == Kind::line) return std::abs(to - from);
  return radius * std::abs(t_end - t_start);
}

void OrientedPath::validate() const {
  if (segments.empty()) throw InputError("empty path");
  for (size_t i = 0; i + 1 < segments.size(); ++i) {
    if (std::abs(segments[i].end() - segments[i + 1].start()) > kJoinTol) {
      throw InputError("path segments are not contiguous");
    }
  }
  if (closed && std::abs(segments.back().end() - segments.front().start()) > kJoinTol) {
    throw InputError("closed path does not return to its start");
  }
}

OrientedPath OrientedPath::concat(const OrientedPath& o) const {
  OrientedPath out;
  out.segments = segments;
  out.segments.insert(out.segments.end(), o.segments.begin(), o.segments.end());
  out.closed = std::abs(out.segments.back().end() - out.segments.front().start()) <= kJoinTol;
  return out;
}

OrientedPath OrientedPath::single(const PathSegment& s) {
  OrientedPath p;
  p.segments.push_back(s);
  p.closed = false;
  return p;
}

OrientedPath OrientedPath::circle(cplx center, double radius) {
  OrientedPath p;
  p.segments.push_back(PathSegment::arc(center, radius, 0.0, 2.0 * kPi));
  p.closed = true;
  return p;
}

// ---------------------------------------------------------------------------
// Winding numbers

WindingResult winding_detail(const Evaluator& f, const OrientedPath& path, double tol, bool keep_points) {
  path.validate();
  constexpr int kInitial = 256;
  constexpr long kCap = 1L << 20;
  WindingResult out;
  out.min_abs = std::numeric_limits<double>::infinity();
  for (const PathSegment& seg : path.segments) {
    std::vector<std::pair<double, cplx>> init;
    double scale = 0.0;
    for (int i = 0; i <= kInitial; ++i) {
      const double u = double(i) / kInitial;
      const cplx v = f(seg.point(u));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("non-finite value on path");
      init.emplace_back(u, v);
      scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) throw Error("zero on path");
    const double floor = tol * scale;
    long count = kInitial + 1;
    const auto check = [&](cplx v) {
      const double a = std::abs(v);
      if (a < floor) throw Error("zero on path");
      out.min_abs = std::min(out.min_abs, a);
      out.max_abs = std::max(out.max_abs, a);
    };
    check(init[0].second);
    if (keep_points) {
      out.points.push_back(seg.point(0.0));
      out.values_abs.push_back(std::abs(init[0].second));
    }
    for (int i = 0; i < kInitial; ++i) {
      std::pair<double, cplx> cur = init[i];
      std::vector<std::pair<double, cplx>> stack{init[i + 1]};
      while (!stack.empty()) {
        const auto nxt = stack.back();
        const double d = std::arg(nxt.second / cur.second);
        const double lo = std::min(std::abs(cur.second), std::abs(nxt.second));
        const bool ok = std::abs(d) < 0.5 * kPi && std::abs(nxt.second - cur.second) < 0.5 * lo;
        if (!ok) {
          if (count >= kCap) throw Error("winding sample cap reached near a zero");
          const double um = 0.5 * (cur.first + nxt.first);
          const cplx vm = f(seg.point(um));
          check(vm);
          ++count;
          stack.emplace_back(um, vm);
          continue;
        }
        check(nxt.second);
        out.delta_arg += d;
        cur = nxt;
        stack.pop_back();
        if (keep_points) {
          out.points.push_back(seg.point(cur.first));
          out.values_abs.push_back(std::abs(cur.second));
        }
      }
    }
    out.samples += count;
  }
  out.winding = out.delta_arg / (2.0 * kPi);
  return out;
}

double winding(const Evaluator& f, const OrientedPath& path, double tol) {
  return winding_detail(f, path, tol).winding;
}

ZeroCount count_zeros(const Evaluator& f, const OrientedPath& boundary, double tol) {
  if (!boundary.closed) throw InputError("zero counting needs a closed boundary");
  ZeroCount z;
  z.winding = winding(f, boundary, tol);
  z.count = static_cast<int>(std::lround(z.winding));
  z.flagged = std::abs(z.winding - z.count) > 0.1;
  return z;
}

ZeroCount count_zeros(const Poly& f, const OrientedPath& boundary, double tol) {
  if (f.is_zero()) throw InputError("zero polynomial has no zero count");
  return count_zeros([&](cplx z) { return f.eval(z); }, boundary, tol);
}

// ---------------------------------------------------------------------------
// Rouche disk

RoucheResult rouche_disk_log2(const Poly& q, int n, double k, double log2_c) {
  if (!(k > 0.0)) throw InputError("k must be positive");
  if (n < 1) throw InputError("n must be positive");
  if (q.is_zero() || q[0] != cplx(0.0)) throw InputError("q must be a nonzero polynomial vanishing at 0");
  if (q.degree() >= n) throw InputError("deg q must be below n");
  RoucheResult r;
  r.delta = std::exp2(-(1.0 + std::log2(k) + log2_c) / n);
  const Poly q_over_z(std::vector<cplx>(q.coeffs().begin() + 1, q.coeffs().end()));
  r.alpha_q = circle_max(q_over_z, 1.0, default_circle_samples(q_over_z.degree())).upper;
  r.delta_ok = r.delta < std::min(1.0, 1.0 / (2.0 * k * r.alpha_q));
  const double kq_max = k * circle_max(q, r.delta, default_circle_samples(q.degree())).upper;
  r.margin = 0.5 - kq_max;
  // On |z| = delta: c z^n = e^{i n arg z} / (2k) exactly.
  const double half = 0.5 / k;
  const Evaluator fc = [&](cplx z) { return std::polar(half, n * std::arg(z)) - q.eval(z); };
  try {
    const ZeroCount zc = count_zeros(fc, OrientedPath::circle(0.0, r.delta));
    r.zero_count = zc.flagged ? -1 : zc.count;
  } catch (const Error&) {
    r.zero_count = -1;
  }
  // Maximum principle: the disk maximum is attained on the circle.
  r.image_max = 0.5 + kq_max;
  r.image_ok = r.image_max < 1.0;
  r.verified = r.delta_ok && r.margin > 0.0 && r.zero_count == n && r.image_ok;
  return r;
}

RoucheResult rouche_disk(const Poly& q, int n, double k, double c) {
  if (!(c > 0.0)) throw InputError("c must be positive");
  return rouche_disk_log2(q, n, k, std::log2(c));
}

// ---------------------------------------------------------------------------
// W_n

OrientedPath RegionWn::boundary() const {
  OrientedPath p = gamma[0].concat(gamma[1]).concat(gamma[2]).concat(gamma[3]);
  p.closed = true;
  p.validate();
  return p;
}

bool RegionWn::contains(cplx z) const {
  const cplx w = z + 1.0;
  const double r = std::abs(w);
  const double beta = std::arg(w);
  if (!(std::abs(beta) < alpha)) return false;
  const double cb = std::cos(beta), ca = std::cos(alpha);
  const double inner = cb - std::sqrt(std::max(0.0, cb * cb - ca * ca));
  return inner < r && r < epsilon;
}

RegionWn build_region(double alpha, int n, double c) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(c > 1.0)) throw InputError("c must exceed 1");
  if (n < 1) throw InputError("n must be positive");
  RegionWn w;
  w.alpha = alpha;
  w.n = n;
  w.c = c;
  w.epsilon = std::exp(std::log(2.0 * c) / n);
  const cplx e_pos = std::polar(1.0, alpha), e_neg = std::polar(1.0, -alpha);
  w.A = -1.0 + w.epsilon * e_neg;
  w.B = -1.0 + w.epsilon * e_pos;
  w.C = -1.0 + std::cos(alpha) * e_pos;
  w.D = -1.0 + std::cos(alpha) * e_neg;
  w.gamma[0] = OrientedPath::single(PathSegment::arc(-1.0, w.epsilon, -alpha, alpha));
  w.gamma[1] = OrientedPath::single(PathSegment::line(w.B, w.C));
  w.gamma[2] = OrientedPath::single(PathSegment::arc(0.0, std::sin(alpha), 0.5 * kPi + alpha, 1.5 * kPi - alpha));
  w.gamma[3] = OrientedPath::single(PathSegment::line(w.D, w.A));
  w.outer_radius = std::abs(w.B);
  return w;
}

// ---------------------------------------------------------------------------
// Lemma on line segments

StrpoCheck strpo_bound_check(const Poly& f, const Evaluator& g, const PathSegment& segment, int m) {
  if (segment.kind != PathSegment::Kind::line) throw InputError("strpo check needs a line segment");
  if (!f.is_zero() && f.degree() > m) throw InputError("deg f exceeds m");
  StrpoCheck s;
  s.winding = winding([&](cplx z) { return f.eval(z) + g(z); }, OrientedPath::single(segment));
  s.bound = 0.5 * (m + 1);
  s.ok = std::abs(s.winding) < s.bound;
  return s;
}

// ---------------------------------------------------------------------------
// Roots near 0 of (1+z)^n - p

namespace {

// Aberth-Ehrlich iteration for w^n - P(w) with deg P < n. Each evaluation
// costs O(deg P), so a sweep is O(n^2) instead of the O(n^3) companion
// eigenproblem. Returns false when the iteration stalls.
bool aberth_sparse(const Poly& P, int n, std::vector<cplx>& w) {
  const Poly dP = P.derivative();
  const cplx p0 = P.eval(0.0);
  const double rho = std::abs(p0) > 0.0 ? std::pow(std::abs(p0), 1.0 / n) : 1.0;
  w.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = std::polar(rho, 2.0 * kPi * (i + 0.25) / n + 0.4);
  std::vector<cplx> step(static_cast<size_t>(n));
  for (int it = 0; it < 500; ++it) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = std::abs(w[i]), t = std::arg(w[i]);
      const cplx wn1 = std::polar(std::pow(r, n - 1), (n - 1) * t);
      const cplx f = wn1 * w[i] - P.eval(w[i]);
      const cplx df = double(n) * wn1 - dP.eval(w[i]);
      if (f == cplx(0.0)) {
        step[i] = 0.0;
        continue;
      }
      const cplx ratio = f / df;
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) sum += 1.0 / (w[i] - w[j]);
      }
      step[i] = ratio / (1.0 - ratio * sum);
      worst = std::max(worst, std::abs(step[i]) / std::max(1.0, std::abs(w[i])));
    }
    for (int i = 0; i < n; ++i) w[i] -= step[i];
    if (worst < 1e-15) return true;
    if (!std::isfinite(worst)) return false;
  }
  return false;
}

}  // namespace

RootSet shifted_binomial_roots(const Poly& p, int n) {
  if (n < 1) throw InputError("n must be positive");
  const int dp = p.is_zero() ? 0 : p.degree();
  // p(w - 1) as a polynomial in w.
  const std::vector<cplx> shifted = XiComponent(p).jet(-1.0, dp + 1);
  RootSet out;
  std::vector<cplx> ws;
  if (dp < n && aberth_sparse(Poly(shifted), n, ws)) {
    // Merge coincident approximations into multiple roots.
    std::vector<bool> used(ws.size(), false);
    for (size_t i = 0; i < ws.size(); ++i) {
      if (used[i]) continue;
      cplx sum = ws[i];
      int mult = 1;
      for (size_t j = i + 1; j < ws.size(); ++j) {
        if (!used[j] && std::abs(ws[i] - ws[j]) < 1e-7) {
          used[j] = true;
          sum += ws[j];
          ++mult;
        }
      }
      out.roots.push_back({sum / double(mult) - 1.0, mult});
    }
  } else {
    std::vector<cplx> c(static_cast<size_t>(std::max(n, dp)) + 1, cplx(0.0));
    for (int i = 0; i <= dp; ++i) c[i] -= shifted[i];
    c[n] += 1.0;
    for (const Root& r : roots(Poly(std::move(c))).roots) out.roots.push_back({r.value - 1.0, r.multiplicity});
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) < std::abs(b.value);
    return std::arg(a.value) < std::arg(b.value);
  });
  for (const Root& r : out.roots) {
    out.residual_bound = std::max(out.residual_bound, std::abs(pow1p(r.value, n) - p.eval(r.value)));
  }
  return out;
}

namespace {

Poly pick_divisor(std::vector<Root> cands, const RegionWn& region, int m) {
  std::sort(cands.begin(), cands.end(), [](const Root& a, const Root& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) < std::abs(b.value);
    return std::arg(a.value) < std::arg(b.value);
  });
  std::vector<cplx> chosen;
  for (const Root& r : cands) {
    if (!region.contains(r.value)) continue;
    for (int j = 0; j < r.multiplicity && static_cast<int>(chosen.size()) < m; ++j) chosen.push_back(r.value);
    if (static_cast<int>(chosen.size()) == m) break;
  }
  if (static_cast<int>(chosen.size()) < m) throw Error("fewer than m roots inside the region");
  return Poly::from_roots(chosen);
}

}  // namespace

Poly extract_divisor(const Poly& qn, const RegionWn& region, int m) {
  if (m < 1) throw InputError("m must be positive");
  const Poly r = pick_divisor(roots(qn).roots, region, m);
  if (!divides(r, qn, 1e-7)) throw Error("extracted divisor does not divide q_n");
  return r;
}

Poly extract_divisor_structured(const Poly& p, int n, const RegionWn& region, int m) {
  if (m < 1) throw InputError("m must be positive");
  std::vector<Root> cands = shifted_binomial_roots(p, n).roots;
  // The factor z contributes a root at 0.
  bool merged = false;
  for (Root& r : cands) {
    if (std::abs(r.value) < 1e-7) {
      r.value = 0.0;
      ++r.multiplicity;
      merged = true;
    }
  }
  if (!merged) cands.push_back({0.0, 1});
  const Poly r = pick_divisor(std::move(cands), region, m);
  const XiComponent qn(Poly{0.0} - Poly::monomial(1) * p, ScaledBinomial{1, n, 1.0, 0});
  if (qn.expandable()) {
    if (!divides(r, qn.to_poly(), 1e-7)) throw Error("extracted divisor does not divide q_n");
  } else {
    const std::vector<cplx> res = qn.residue(r);
    double big = 0.0;
    for (const cplx& v : res) big = std::max(big, std::abs(v));
    if (big > 1e-7 * std::exp2(n)) throw Error("extracted divisor does not divide q_n");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Regions where q_n accumulates zeros

ChaoticRegionReport find_chaotic_region(double k, double delta, const Poly& p, int m, int n_from, int n_to,
                                        const RegionOptions& opt) {
  if (!(k > 0.0) || !(delta > 0.0)) throw InputError("k and delta must be positive");
  if (p.is_zero()) throw InputError("p must be nonzero");
  if (m < 1) throw InputError("m must be positive");
  if (n_from < 1 || n_to < n_from) throw InputError("bad n range");
  ChaoticRegionReport rep;
  rep.k = k;
  rep.delta = delta;
  const int dp = p.degree();
  rep.c_bar = 1.01 * std::max(1.0, circle_max(p, 1.0, default_circle_samples(dp)).upper);
  const double alpha0 = 0.9 * std::min({delta, 1.0 / (3.0 * k * rep.c_bar), 1.0});
  std::vector<cplx> p_roots;
  if (dp >= 1) p_roots = roots(p).flat();
  const auto admissible = [&](double a) {
    const double s = std::sin(a);
    for (const cplx& z : p_roots) {
      if (std::abs(std::abs(z) - s) < 1e-6) return false;
    }
    return true;
  };
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.5 * alpha0, alpha0);
  double alpha = alpha0;
  rep.alpha_attempts = 1;
  while (!admissible(alpha)) {
    if (rep.alpha_attempts > 32) throw Error("no admissible alpha after 32 perturbations");
    alpha = unif(rng);
    ++rep.alpha_attempts;
  }
  rep.alpha = alpha;

  const Evaluator pe = [&](cplx z) { return p.eval(z); };
  for (int n = n_from; n <= n_to; ++n) {
    RegionRecord rec;
    rec.n = n;
    rec.region = build_region(alpha, n, rep.c_bar);
    const RegionWn& W = rec.region;
    rec.inside_delta = W.outer_radius < delta;
    rec.w_pow_closed = n * alpha / kPi;
    if (!rec.inside_delta) {
      rec.reason = "region not inside delta disk";
      rep.records.push_back(std::move(rec));
      continue;
    }
    const Evaluator rn = [&](cplx z) { return pow1p(z, n) - p.eval(z); };
    std::vector<WindingResult> parts;
    try {
      for (int j = 0; j < 4; ++j) parts.push_back(winding_detail(rn, W.gamma[j]));
      rec.w_pow_gamma1 = winding([&](cplx z) { return pow1p(z, n); }, W.gamma[0]);
      rec.w_p_gamma3 = winding(pe, W.gamma[2]);
    } catch (const Error& e) {
      rec.reason = std::string("boundary: ") + e.what();
      rep.records.push_back(std::move(rec));
      continue;
    }
    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
      rec.w_parts[j] = parts[j].winding;
      total += parts[j].winding;
    }
    rec.nu = static_cast<int>(std::lround(total));
    const bool integral = std::abs(total - rec.nu) <= 0.1;
    rec.bound = rec.w_pow_closed - 2.0 - std::abs(rec.w_p_gamma3) - dp;
    rec.bound_literal = 2.0 * n * alpha - 2.0 - std::abs(rec.w_p_gamma3) - dp;
    rec.bound_ok = rec.nu > rec.bound;
    rec.wn5 = std::abs(rec.w_parts[1]) < 0.5 * (dp + 1) && std::abs(rec.w_parts[3]) < 0.5 * (dp + 1);
    rec.wn6 = std::abs(rec.w_parts[2]) < std::abs(rec.w_p_gamma3) + 0.5;
    rec.wn7 = rec.w_parts[0] > rec.w_pow_gamma1 - 0.5;

    // |q_n| on the closure is bounded by its boundary maximum plus a
    // Lipschitz slack over the sample spacing.
    const double R = W.outer_radius, E = W.epsilon;
    const double lip = k * (std::pow(E, n) + p.majorant(R, 0) + R * n * std::pow(E, n - 1) + p.majorant(R, 1));
    double sampled = 0.0, slack = 0.0;
    for (int j = 0; j < 4; ++j) {
      const PathSegment& seg = W.gamma[j].segments.front();
      const long steps = std::clamp(static_cast<long>(std::ceil(seg.length() * lip / 0.02)), 256L, 1L << 20);
      slack = std::max(slack, 0.5 * lip * seg.length() / steps);
      for (long i = 0; i <= steps; ++i) {
        const cplx z = seg.point(double(i) / steps);
        sampled = std::max(sampled, k * std::abs(z) * std::abs(rn(z)));
      }
    }
    constexpr int kGrid = 32;
    const double ca = std::cos(alpha);
    for (int a = 1; a < kGrid; ++a) {
      const double beta = -alpha + 2.0 * alpha * a / kGrid;
      const double cb = std::cos(beta);
      const double lo = cb - std::sqrt(std::max(0.0, cb * cb - ca * ca));
      for (int b = 1; b < kGrid; ++b) {
        const cplx z = -1.0 + std::polar(lo + (E - lo) * b / kGrid, beta);
        sampled = std::max(sampled, k * std::abs(z) * std::abs(rn(z)));
      }
    }
    rec.qn_image_max = sampled + slack;
    rec.qn_image_ok = rec.qn_image_max < 1.0;

    bool ok = integral && rec.nu >= m && rec.qn_image_ok;
    if (!integral) rec.reason = "winding not near an integer";
    else if (rec.nu < m) rec.reason = "fewer than m zeros";
    else if (!rec.qn_image_ok) rec.reason = "q_n image leaves the unit disk";
    if (ok && opt.compute_roots) {
      const RootSet rs = shifted_binomial_roots(p, n);
      int inside = 0;
      for (const Root& r : rs.roots) {
        if (W.contains(r.value)) inside += r.multiplicity;
      }
      rec.nu_roots = inside;
      if (inside != rec.nu) {
        ok = false;
        rec.reason = "winding and root location disagree";
      }
    }
    if (ok && opt.accept && !opt.accept(rec)) {
      ok = false;
      rec.reason = "rejected by caller gate";
    }
    rec.verified = ok;
    if (ok && !rep.first_verified) rep.first_verified = n;
    rep.records.push_back(std::move(rec));
    if (ok && opt.stop_at_first) break;
  }
  return rep;
}

}  // namespace chaoslab
