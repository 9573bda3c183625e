#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chaoslab/poly.hpp"

namespace chaoslab {

using Evaluator = std::function<cplx(cplx)>;

struct PathSegment {
  enum class Kind { line, arc };
  Kind kind = Kind::line;
  cplx from, to;           // line
  cplx center;             // arc
  double radius = 0.0;     // arc
  double t_start = 0.0;    // arc parameter range, orientation from start to end
  double t_end = 0.0;

  static PathSegment line(cplx a, cplx b);
  static PathSegment arc(cplx center, double radius, double t_start, double t_end);

  // u in [0, 1].
  [[nodiscard]] cplx point(double u) const;
  [[nodiscard]] cplx start() const { return point(0.0); }
  [[nodiscard]] cplx end() const { return point(1.0); }
  [[nodiscard]] double length() const;
};

struct OrientedPath {
  std::vector<PathSegment> segments;
  bool closed = false;

  // Throws InputError when consecutive segments do not meet within 1e-10.
  void validate() const;
  [[nodiscard]] OrientedPath concat(const OrientedPath& o) const;
  static OrientedPath single(const PathSegment& s);
  static OrientedPath circle(cplx center, double radius);
};

struct WindingResult {
  double winding = 0.0;    // delta arg / 2 pi
  double delta_arg = 0.0;
  double min_abs = 0.0;
  double max_abs = 0.0;
  long samples = 0;
  std::vector<cplx> points;  // accepted sample points, in path order
  std::vector<double> values_abs;
};

// Adaptive argument tracking: a step is accepted when the argument increment
// is below pi/2 and |f(b) - f(a)| < min(|f(a)|, |f(b)|) / 2; otherwise it is
// bisected. Starts from 256 samples per segment, at most 2^20 per segment.
// Throws Error("zero on path") when |f| < tol * (segment max |f|).
WindingResult winding_detail(const Evaluator& f, const OrientedPath& path, double tol = 1e-9,
                             bool keep_points = false);
double winding(const Evaluator& f, const OrientedPath& path, double tol = 1e-9);

struct ZeroCount {
  int count = 0;
  double winding = 0.0;
  bool flagged = false;  // winding more than 0.1 from an integer
};
ZeroCount count_zeros(const Evaluator& f, const OrientedPath& boundary, double tol = 1e-9);
ZeroCount count_zeros(const Poly& f, const OrientedPath& boundary, double tol = 1e-9);

struct RoucheResult {
  double delta = 0.0;
  double alpha_q = 0.0;      // max |q(z)/z| on the unit circle
  bool delta_ok = false;     // delta < min(1, 1/(2 k alpha_q))
  double margin = 0.0;       // 1/2 - max_{|z|=delta} |k q(z)|
  int zero_count = -1;       // zeros of q_c inside delta D from the winding number
  double image_max = 0.0;    // upper bound of max |q_c| on the closed disk
  bool image_ok = false;
  bool verified = false;
};

// q_c = k (c z^n - q). The constant enters through log2(c) so that c far
// beyond double range is handled: on |z| = delta, c z^n = e^{i n arg z}/(2k).
RoucheResult rouche_disk_log2(const Poly& q, int n, double k, double log2_c);
RoucheResult rouche_disk(const Poly& q, int n, double k, double c);

struct RegionWn {
  double alpha = 0.0;
  int n = 0;
  double c = 0.0;
  double epsilon = 0.0;  // (2c)^{1/n}
  std::array<OrientedPath, 4> gamma;
  cplx A, B, C, D;
  double outer_radius = 0.0;  // |-1 + epsilon e^{i alpha}|

  [[nodiscard]] OrientedPath boundary() const;
  // Defining inequalities in polar form around -1.
  [[nodiscard]] bool contains(cplx z) const;
};

RegionWn build_region(double alpha, int n, double c);

struct StrpoCheck {
  double winding = 0.0;
  double bound = 0.0;  // (m + 1) / 2
  bool ok = false;
};
// g is assumed to map the segment into a line through 0.
StrpoCheck strpo_bound_check(const Poly& f, const Evaluator& g, const PathSegment& segment, int m);

struct RegionRecord {
  int n = 0;
  RegionWn region;
  int nu = -1;             // winding of r_n around the boundary
  int nu_roots = -1;       // roots of r_n inside W_n, by direct location
  std::array<double, 4> w_parts{};
  double w_pow_gamma1 = 0.0;   // winding of (1+z)^n along Gamma_1, computed
  double w_pow_closed = 0.0;   // n alpha / pi, the closed form under delta arg / 2 pi
  double w_p_gamma3 = 0.0;
  double bound = 0.0;          // w_pow_closed - 2 - |w(p, Gamma_3)| - deg p
  double bound_literal = 0.0;  // same with 2 n alpha in place of w_pow_closed
  bool bound_ok = false;
  bool wn5 = false, wn6 = false, wn7 = false;
  bool inside_delta = false;
  double qn_image_max = 0.0;
  bool qn_image_ok = false;
  bool verified = false;
  std::string reason;
};

struct ChaoticRegionReport {
  double k = 0.0;
  double delta = 0.0;
  double c_bar = 0.0;
  double alpha = 0.0;
  int alpha_attempts = 0;
  std::vector<RegionRecord> records;
  std::optional<int> first_verified;
};

struct RegionOptions {
  uint64_t seed = 1;
  bool compute_roots = true;
  // Stop after the first verified n (used by the construction).
  bool stop_at_first = false;
  // Extra per-n gate applied after verification; returning false rejects n.
  std::function<bool(const RegionRecord&)> accept;
};

// q_n = k z ((1+z)^n - p); records every n in [n_from, n_to].
ChaoticRegionReport find_chaotic_region(double k, double delta, const Poly& p, int m, int n_from, int n_to,
                                        const RegionOptions& opt = {});

// Roots of (1+z)^n - p, computed in w = 1 + z, where the polynomial is
// w^n - p(w - 1) and the roots near z = 0 are well conditioned.
RootSet shifted_binomial_roots(const Poly& p, int n);

// Monic degree-m divisor of qn from the m roots inside the region closest to
// 0; verified with divides(r, qn, 1e-7).
Poly extract_divisor(const Poly& qn, const RegionWn& region, int m);
// Same for qn = k z ((1+z)^n - p) without expanding qn for the root search.
Poly extract_divisor_structured(const Poly& p, int n, const RegionWn& region, int m);

}  // namespace chaoslab
