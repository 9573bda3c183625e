#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "chaoslab/construct.hpp"
#include "chaoslab/error.hpp"

using namespace chaoslab;

namespace {

// Three stages take well under a second and cover base, even and odd steps.
const ConstructionReport& small_run() {
  static const ConstructionReport r = [] {
    ConstructionConfig cfg;
    cfg.stages = 3;
    return run_construction(cfg);
  }();
  return r;
}

TruncatedSeries random_series(std::mt19937_64& rng, int k, int D) {
  std::normal_distribution<double> g;
  TruncatedSeries s(k, D);
  for (const MultiIndex& e : monomials_up_to(k, D)) {
    if (total_degree(e) > 0 && rng() % 3 == 0) s.add_term(e, cplx(g(rng), g(rng)));
  }
  if (s.is_zero()) s = TruncatedSeries::generator(k, D, 1);
  return s * cplx(1.0 / l1_norm(s));
}

}  // namespace

TEST_CASE("cantor unpairing is a bijection onto pairs") {
  std::set<std::pair<int64_t, int64_t>> seen;
  for (int64_t w = 0; w < 5000; ++w) CHECK(seen.insert(cantor_unpair(w)).second);
  CHECK(cantor_unpair(1) == std::make_pair<int64_t, int64_t>(1, 0));
  // Every pair with x + y < 90 appears among the first 90 * 91 / 2 indices.
  int small = 0;
  for (const auto& [x, y] : seen) small += (x + y < 90);
  CHECK(small == 90 * 91 / 2);
}

TEST_CASE("gaussian rationals") {
  CHECK(gaussian_rational(0) == cplx(0.0));
  CHECK(gaussian_rational_nonzero(0) == cplx(1.0));
  CHECK(gaussian_rational_nonzero(1) == cplx(-1.0));
  CHECK(gaussian_rational_nonzero(2) == cplx(0.0, 1.0));
  CHECK(gaussian_rational_nonzero(3) == cplx(0.0, -1.0));
  std::set<std::pair<double, double>> seen;
  for (int64_t t = 0; t < 2000; ++t) {
    const cplx g = gaussian_rational(t);
    CHECK(seen.insert({g.real(), g.imag()}).second);
  }
}

TEST_CASE("polynomial enumeration") {
  CHECK(enumerate_dense_polys(1) == Poly{0.0, 1.0});
  CHECK(enumerate_dense_polys(2) == Poly{0.0, 0.0, 1.0});
  CHECK(enumerate_dense_polys(3) == Poly{0.0, -1.0});
  std::set<std::vector<std::pair<double, double>>> seen;
  for (int64_t i = 1; i <= 10000; ++i) {
    const Poly p = enumerate_dense_polys(i);
    REQUIRE_FALSE(p.is_zero());
    CHECK(p[0] == cplx(0.0));
    std::vector<std::pair<double, double>> key;
    for (const cplx& c : p.coeffs()) key.emplace_back(c.real(), c.imag());
    CHECK(seen.insert(key).second);
  }
}

TEST_CASE("stage components") {
  const Poly p{0.0, 0.5, cplx(0.0, 1.0)};
  const Poly even = even_component(4, 6, 3, p).to_poly();
  CHECK((even - cplx(4.0) * (Poly::monomial(6, 8.0) - p)).l1_norm() < 1e-13);
  const Poly odd = odd_component(5, 7, p).to_poly();
  CHECK((odd - cplx(5.0) * (Poly{0.0, 1.0} * Poly::one_plus_z_pow(7) - p)).l1_norm() < 1e-12);
}

TEST_CASE("first even step from the base stage") {
  ConstructionState st = initial_state(ConstructionConfig{});
  CHECK(st.k() == 1);
  CHECK(st.stages[0].cert.value == doctest::Approx(1.0).epsilon(1e-9));
  step_even(st);
  REQUIRE(st.k() == 2);
  const StageRecord& s = st.stages[1];
  CHECK(s.n >= 2);
  CHECK(s.n_gate > 0.5);
  CHECK(s.cert.value > 0.52);
  CHECK(s.xi_norm_bound <= 1.0);
  CHECK(s.xi_witness_residual <= 1e-12);
  // xi_2 = 2 (c z^n - z).
  CHECK(st.xi[1] == even_component(2, s.n, s.log2_c, Poly{0.0, 1.0}));
}

TEST_CASE("small construction run") {
  const ConstructionReport& r = small_run();
  const ConstructionState& st = r.state;
  REQUIRE(st.k() == 3);
  const std::vector<int> ns = st.n_list();
  for (size_t i = 1; i < ns.size(); ++i) CHECK(ns[i] > ns[i - 1]);
  for (const StageRecord& s : st.stages) {
    CHECK(s.cert.value > 0.52);
    CHECK(s.xi_norm_bound <= 1.0 + 1e-9);
  }
  const StageRecord& odd = st.stages[2];
  CHECK(odd.kind == "odd");
  CHECK(odd.m >= 1);
  CHECK(odd.divisor.degree() == odd.m);
  // The appended component is divisible by the extracted divisor.
  CHECK(divides(odd.divisor, st.xi[2].to_poly(), 1e-7));
  for (size_t s = 1; s < r.probes.values.size(); ++s) {
    for (size_t j = 0; j < r.probes.probes.size(); ++j) {
      CHECK(r.probes.values[s][j] <= r.probes.values[s - 1][j] + r.probes.gaps[s][j] + r.probes.gaps[s - 1][j] + 1e-6);
    }
  }
}

TEST_CASE("state JSON round trip and tamper detection") {
  const ConstructionState& st = small_run().state;
  const nlohmann::json j = st;
  const ConstructionState back = construction_state_from_json(j);
  CHECK(back.k() == st.k());
  CHECK(back.n_list() == st.n_list());
  CHECK(nlohmann::json(back) == j);

  nlohmann::json bad = j;
  bad["stages"][2]["n"] = bad["stages"][2]["n"].get<int>() + 1;
  CHECK_THROWS_AS(construction_state_from_json(bad), InputError);
  bad = j;
  bad["stages"][1]["p_index"] = 2;
  CHECK_THROWS_AS(construction_state_from_json(bad), InputError);
  bad = j;
  bad.erase("xi");
  CHECK_THROWS_AS(construction_state_from_json(bad), InputError);
}

TEST_CASE("density targets") {
  const ConstructionState& st = small_run().state;
  std::vector<DensityTarget> t = chaotic_demo(st, default_targets(st));
  REQUIRE(t.size() == 2);
  for (const DensityTarget& x : t) {
    CHECK(x.met);
    CHECK(x.identity_ok);
    CHECK(x.achieved_error <= x.budget);
  }
  CHECK(t[0].budget == doctest::Approx(0.5));
  CHECK(t[1].budget == doctest::Approx(1.0 / 3.0));

  std::vector<DensityTarget> custom = targets_from_json(nlohmann::json::parse(
      R"([{"index": 1, "kind": "supercyclic", "p": [[0, 0], [2, 0]]}, {"index": 2, "kind": "supercyclic"}])"));
  custom = chaotic_demo(st, custom);
  CHECK_FALSE(custom[0].met);
  CHECK_FALSE(custom[1].met);
  CHECK_THROWS_AS(targets_from_json(nlohmann::json::parse(R"([{"index": 1, "kind": "cyclic"}])")), InputError);
}

TEST_CASE("commutator identity and mutation sensitivity") {
  std::mt19937_64 rng(17);
  const SeriesMul skew = [](const TruncatedSeries& u, const TruncatedSeries& v) {
    return mul(u, v) + mul(u, u) * cplx(0.5);
  };
  for (int t = 0; t < 30; ++t) {
    const int k = 1 + t % 3, D = 6 + t % 7, n = t % 21;
    const TruncatedSeries a = random_series(rng, k, D) * cplx(0.5);
    const TruncatedSeries x = random_series(rng, k, D), y = random_series(rng, k, D);
    CHECK(noncyclic_check(a, x, y, n) <= 1e-12);
    CHECK(noncyclic_check(a, x, x, n) == 0.0);
    CHECK(noncyclic_check(a, x, y, n, skew) > 1e-6);
  }
  CHECK_THROWS_AS(noncyclic_check(TruncatedSeries(1, 3), TruncatedSeries(2, 3), TruncatedSeries(1, 3), 2),
                  InputError);
}

TEST_CASE("quasinilpotence probe") {
  const SubstTuple base = SubstTuple::from_polys({Poly{0.0, 1.0}});
  const QuasinilpotenceProbe b = quasinilpotence_probe(base, Poly{0.0, 1.0}, 6, 24);
  for (double r : b.roots) CHECK(r == doctest::Approx(1.0).epsilon(1e-8));

  const ConstructionState& st = small_run().state;
  std::vector<double> prev;
  for (int k = 1; k <= st.k(); ++k) {
    const QuasinilpotenceProbe q = quasinilpotence_probe(st.prefix(k), Poly{0.0, 1.0}, 4, 24);
    CHECK(q.values[1] <= q.values[0] * q.values[0] + q.gaps[1] + 2 * q.values[0] * q.gaps[0] + 1e-6);
    if (!prev.empty()) {
      for (size_t n = 0; n < q.roots.size(); ++n) CHECK(q.roots[n] <= prev[n] + 1e-6);
    }
    prev = q.roots;
  }
  CHECK_THROWS_AS(quasinilpotence_probe(base, Poly{0.0, 1.0}, 1, 24), InputError);
}
