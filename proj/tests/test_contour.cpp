#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "chaoslab/contour.hpp"
#include "chaoslab/error.hpp"

using namespace chaoslab;

namespace {

constexpr double kPi = std::numbers::pi;

OrientedPath unit_circle() { return OrientedPath::circle(0.0, 1.0); }

// Closed-form roots of (1+z)^n - 1 inside the region.
int unit_roots_inside(const RegionWn& w, int n) {
  int count = 0;
  for (int j = 0; j < n; ++j) count += w.contains(std::polar(1.0, 2.0 * kPi * j / n) - 1.0);
  return count;
}

}  // namespace

TEST_CASE("winding of monomials around the unit circle") {
  CHECK(winding([](cplx z) { return z; }, unit_circle()) == doctest::Approx(1.0).epsilon(1e-9));
  for (int n = 2; n <= 7; ++n) {
    CHECK(winding([n](cplx z) { return std::pow(z, n); }, unit_circle()) == doctest::Approx(n).epsilon(1e-9));
  }
  CHECK(winding([](cplx z) { return 1.0 / z; }, unit_circle()) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("zero on the path is reported") {
  CHECK_THROWS_AS(winding([](cplx z) { return z - 1.0; }, unit_circle()), Error);
}

TEST_CASE("count_zeros") {
  CHECK(count_zeros(Poly{0.0, 0.0, 1.0}, unit_circle()).count == 2);
  CHECK(count_zeros(Poly::from_roots({0.3, 2.0}), unit_circle()).count == 1);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  for (int t = 0; t < 20; ++t) {
    std::vector<cplx> rs;
    int inside = 0;
    while (rs.size() < 6) {
      const cplx z(u(rng), u(rng));
      if (std::abs(std::abs(z) - 1.0) < 0.05) continue;
      inside += std::abs(z) < 1.0;
      rs.push_back(z);
    }
    const ZeroCount zc = count_zeros(Poly::from_roots(rs), unit_circle());
    CHECK(zc.count == inside);
    CHECK_FALSE(zc.flagged);
  }
}

TEST_CASE("winding is additive over concatenated paths") {
  const Poly f = Poly::from_roots({cplx(0.2, 0.1), cplx(-0.5, 0.3), 1.7});
  const OrientedPath upper = OrientedPath::single(PathSegment::arc(0.0, 1.0, 0.0, kPi));
  const OrientedPath lower = OrientedPath::single(PathSegment::arc(0.0, 1.0, kPi, 2 * kPi));
  const Evaluator e = [&](cplx z) { return f.eval(z); };
  CHECK(winding(e, upper) + winding(e, lower) == doctest::Approx(winding(e, upper.concat(lower))).epsilon(1e-12));
}

TEST_CASE("binomial power along the outer arc") {
  // (1+z)^n = eps^n e^{i n t} on the arc, t from -alpha to alpha: the argument
  // grows by 2 n alpha, i.e. n alpha / pi turns.
  const double alpha = 0.1;
  const int n = 50;
  const RegionWn w = build_region(alpha, n, 2.0);
  const Poly p = Poly::one_plus_z_pow(n);
  const WindingResult r = winding_detail([&](cplx z) { return p.eval(z); }, w.gamma[0]);
  CHECK(r.delta_arg == doctest::Approx(2.0 * n * alpha).epsilon(1e-9));
  CHECK(r.winding == doctest::Approx(n * alpha / kPi).epsilon(1e-9));
}

TEST_CASE("region geometry") {
  const double alpha = 0.1;
  const RegionWn w = build_region(alpha, 40, 3.0);
  CHECK_NOTHROW(w.boundary().validate());
  CHECK(w.boundary().closed);
  CHECK(std::abs(w.A - (-1.0 + w.epsilon * std::polar(1.0, -alpha))) < 1e-15);
  CHECK(std::abs(w.B - (-1.0 + w.epsilon * std::polar(1.0, alpha))) < 1e-15);
  CHECK(w.epsilon == doctest::Approx(std::pow(6.0, 1.0 / 40)).epsilon(1e-14));
  const RegionWn far = build_region(alpha, 1000000, 3.0);
  CHECK(far.outer_radius == doctest::Approx(2.0 * std::sin(alpha / 2)).epsilon(1e-4));
  CHECK(far.outer_radius < alpha);
  CHECK_THROWS_AS(build_region(0.0, 10, 3.0), InputError);
}

TEST_CASE("zero count over the region boundary matches root location") {
  for (double alpha : {0.3, 0.45}) {
    for (double c : {1.5, 3.0}) {
      const RegionWn w = build_region(alpha, 12, c);
      const Poly f = Poly::one_plus_z_pow(12) - Poly{1.0};
      CHECK(count_zeros(f, w.boundary()).count == unit_roots_inside(w, 12));
    }
  }
}

TEST_CASE("Rouche disk for q = z, n = 2") {
  const RoucheResult r3 = rouche_disk(Poly{0.0, 1.0}, 2, 1.0, 3.0);
  CHECK(r3.delta == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
  CHECK(r3.verified);
  CHECK(r3.zero_count == 2);
  for (double c : {4.0, 8.0, 16.0}) {
    const RoucheResult r = rouche_disk(Poly{0.0, 1.0}, 2, 1.0, c);
    CHECK(r.verified);
    CHECK(r.zero_count == 2);
  }
  const RoucheResult r1 = rouche_disk(Poly{0.0, 1.0}, 2, 1.0, 1.0);
  CHECK(r1.delta == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK_FALSE(r1.verified);
  // The hand factorization 3 z^2 - z = z (3z - 1) puts both zeros inside.
  CHECK(1.0 / 3.0 < r3.delta);
}

TEST_CASE("Rouche disk for large c and beyond double range") {
  const RoucheResult r = rouche_disk(Poly{0.0, 0.0, 1.0}, 3, 1.0, 1e6);
  CHECK(r.verified);
  CHECK(r.zero_count == 3);
  const RoucheResult h = rouche_disk_log2(Poly{0.0, 0.5, -0.25}, 40, 2.0, 5000.0);
  CHECK(h.verified);
  CHECK(h.zero_count == 40);
  CHECK(h.delta < 1e-30);
}

TEST_CASE("line segment winding bound") {
  const PathSegment seg = PathSegment::line(cplx(-0.5, 0.2), cplx(0.4, 0.1));
  const StrpoCheck zero = strpo_bound_check(Poly{1.0}, [](cplx) { return cplx(0.0); }, seg, 0);
  CHECK(zero.winding == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(zero.ok);
  // (1+z)^n on the segment B -> C stays on the line e^{i n alpha} R.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    const RegionWn w = build_region(0.2, 30, 2.0);
    const Poly p{cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
    const Poly pw = Poly::one_plus_z_pow(30);
    const StrpoCheck s =
        strpo_bound_check(p * cplx(-1.0), [&](cplx z) { return pw.eval(z); }, w.gamma[1].segments[0], 3);
    CHECK(s.ok);
  }
}

TEST_CASE("shifted binomial roots agree with the companion route") {
  const Poly p{0.5, cplx(0.0, 0.3), 0.1};
  for (int n : {5, 9, 16}) {
    const RootSet a = shifted_binomial_roots(p, n);
    const RootSet b = roots(Poly::one_plus_z_pow(n) - p);
    REQUIRE(a.total_multiplicity() == n);
    for (const cplx& z : b.flat()) {
      double best = 1e9;
      for (const cplx& w : a.flat()) best = std::min(best, std::abs(z - w));
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("chaotic region for p = 1 matches closed-form roots") {
  RegionOptions opt;
  const ChaoticRegionReport r = find_chaotic_region(1.0, 0.3, Poly{1.0}, 2, 20, 90, opt);
  REQUIRE(r.first_verified.has_value());
  int checked = 0;
  for (const RegionRecord& x : r.records) {
    if (!x.verified) continue;
    ++checked;
    CHECK(x.nu == x.nu_roots);
    CHECK(x.nu == unit_roots_inside(x.region, x.n));
    CHECK(x.nu >= 2);
    CHECK(double(x.nu) > x.bound);
    CHECK(x.qn_image_max < 1.0);
    CHECK(x.w_pow_closed == doctest::Approx(x.n * r.alpha / kPi).epsilon(1e-12));
  }
  CHECK(checked > 0);
}

TEST_CASE("extracted divisors tend to z^m") {
  RegionOptions opt;
  const ChaoticRegionReport r = find_chaotic_region(1.0, 0.3, Poly{1.0}, 1, 20, 200, opt);
  double prev = 1e9;
  int seen = 0;
  for (const RegionRecord& x : r.records) {
    if (!x.verified || x.n % 30 != 0) continue;
    const Poly d = extract_divisor_structured(Poly{1.0}, x.n, x.region, 1);
    REQUIRE(d.degree() == 1);
    CHECK(d[1] == cplx(1.0));
    // Remaining root is 0 or the closest e^{2 pi i j / n} - 1.
    CHECK(std::abs(d[0]) <= prev + 1e-15);
    prev = std::abs(d[0]);
    const Poly qn = Poly{0.0, 1.0} * (Poly::one_plus_z_pow(x.n) - Poly{1.0});
    if (x.n <= 60) CHECK(divides(d, qn, 1e-7));
    ++seen;
  }
  CHECK(seen > 0);
}

TEST_CASE("expanded divisor extraction for small n") {
  RegionOptions opt;
  const Poly p{1.0};
  const ChaoticRegionReport r = find_chaotic_region(1.0, 0.3, p, 2, 20, 60, opt);
  REQUIRE(r.first_verified.has_value());
  const RegionRecord& x = r.records[*r.first_verified - 20];
  const Poly qn = Poly{0.0, 1.0} * (Poly::one_plus_z_pow(x.n) - p);
  const Poly d = extract_divisor(qn, x.region, 2);
  const Poly ds = extract_divisor_structured(p, x.n, x.region, 2);
  CHECK(d.degree() == 2);
  CHECK((d - ds).l1_norm() < 1e-8);
}
