// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chaoslab/construct.hpp"
#include "chaoslab/contour.hpp"
#include "chaoslab/quotient.hpp"
#include "chaoslab/vandermonde.hpp"
#include "commands.hpp"

using namespace chaoslab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<cplx> random_nodes(std::mt19937_64& rng, int n, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> out;
  while (static_cast<int>(out.size()) < n) {
    const cplx z = std::polar(radius * std::sqrt(u(rng)), 2 * std::numbers::pi * u(rng));
    bool ok = true;
    for (const cplx& w : out) ok = ok && std::abs(z - w) > 1e-6;
    if (ok) out.push_back(z);
  }
  return out;
}

Poly random_poly(std::mt19937_64& rng, int deg, bool zero_constant = false) {
  std::normal_distribution<double> g;
  std::vector<cplx> c;
  for (int j = 0; j <= deg; ++j) c.emplace_back(g(rng), g(rng));
  if (zero_constant) c[0] = 0.0;
  return Poly(c);
}

TruncatedSeries random_series(std::mt19937_64& rng, int k, int D, double norm) {
  std::normal_distribution<double> g;
  TruncatedSeries s(k, D);
  for (const MultiIndex& e : monomials_up_to(k, D)) {
    if (total_degree(e) > 0 && rng() % 4 == 0) s.add_term(e, cplx(g(rng), g(rng)));
  }
  if (s.is_zero()) s = TruncatedSeries::generator(k, D, 1);
  return s * cplx(norm / l1_norm(s));
}

Outcome c1_vandermonde() {
  std::mt19937_64 rng(101);
  double oracle = 0.0, basis = 0.0, prod = 0.0;
  for (int n = 1; n <= 6; ++n) {
    for (int t = 0; t < 50; ++t) {
      const std::vector<cplx> nodes = random_nodes(rng, n, 0.8);
      PTable tab(nodes, 40);
      for (int j = 1; j <= n; ++j) {
        for (int m = 0; m <= 40; ++m) {
          const cplx r = tab(j, m);
          const cplx d = p_det_ratio(n, j, m, nodes);
          if (m <= n - 1) {
            const double delta = m == j - 1 ? 1.0 : 0.0;
            basis = std::max({basis, std::abs(r - delta), std::abs(d - delta)});
          } else {
            oracle = std::max(oracle, std::abs(r - d) / std::max(std::abs(d), std::numeric_limits<double>::min()));
          }
        }
      }
      if (n > 5) continue;
      for (const cplx& lam : nodes) {
        for (int m = 0; m <= 30; ++m) {
          cplx s = 0.0, lp = 1.0;
          for (int j = 1; j <= n; ++j, lp *= lam) s += lp * tab(j, m);
          prod = std::max(prod, std::abs(s - std::pow(lam, m)));
        }
      }
    }
  }
  Outcome o;
  o.pass = oracle <= 1e-9 && basis <= 1e-12 && prod <= 1e-9;
  o.detail = "recurrence vs determinant ratio max rel " + fmt("%.3g", oracle) + " (<= 1e-9), basis " +
             fmt("%.3g", basis) + " (<= 1e-12), power identity " + fmt("%.3g", prod) + " (<= 1e-9)";
  return o;
}

Outcome c2_growth() {
  const GrowthProbe g = growth_bound_probe(3, 0.4, 0.6, 64, 200, 202);
  // The constant from m <= 100 must already bound every sampled m in (100, 200].
  const double first_half = g.c_hat_at[1];
  Outcome o;
  o.pass = std::isfinite(g.c_hat) && g.c_hat > 0.0 && g.tail_max <= first_half && g.c_hat_at.back() == g.c_hat;
  o.detail = "c_hat " + fmt("%.6g", g.c_hat) + " at m = " + std::to_string(g.m_at_max) + ", max over m in (100, 200] " +
             fmt("%.3g", g.tail_max) + " <= c_hat(m <= 100) " + fmt("%.6g", first_half);
  return o;
}

Outcome c3_rouche() {
  Outcome o;
  std::string d;
  for (double c : {3.0, 4.0, 8.0, 16.0}) {
    const RoucheResult r = rouche_disk(Poly{0.0, 1.0}, 2, 1.0, c);
    o.pass = o.pass && r.verified && r.zero_count == 2;
    d += "c=" + fmt("%g", c) + ": " + (r.verified ? "verified" : "not verified") + ", zeros " +
         std::to_string(r.zero_count) + "; ";
  }
  const RoucheResult r1 = rouche_disk(Poly{0.0, 1.0}, 2, 1.0, 1.0);
  o.pass = o.pass && !r1.verified;
  d += std::string("c=1: ") + (r1.verified ? "verified" : "not verified");
  o.detail = d;
  return o;
}

Outcome c4_winding() {
  const ChaoticRegionReport r = find_chaotic_region(1.0, 0.3, Poly{1.0}, 3, 20, 400);
  int verified = 0, mismatch = 0, below = 0, literal_below = 0;
  for (const RegionRecord& x : r.records) {
    if (!x.verified) continue;
    ++verified;
    mismatch += x.nu != x.nu_roots;
    below += !(double(x.nu) > x.bound);
    literal_below += !(double(x.nu) > x.bound_literal);
  }
  Outcome o;
  o.pass = verified > 0 && mismatch == 0 && below == 0;
  o.detail = std::to_string(verified) + " verified n (first " +
             (r.first_verified ? std::to_string(*r.first_verified) : std::string("none")) + "), winding != root count at " +
             std::to_string(mismatch) + ", nu <= n alpha/pi - 2 - |w_p| - deg p at " + std::to_string(below) +
             "; informational: nu <= 2 n alpha - 2 - |w_p| - deg p at " + std::to_string(literal_below);
  return o;
}

Outcome c5_quotient() {
  std::mt19937_64 rng(505);
  const SubstTuple id = SubstTuple::from_polys({Poly{0.0, 1.0}});
  QuotientContext ctx(id, 16);
  double err_id = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Poly p = random_poly(rng, static_cast<int>(rng() % 9));
    const int n = 1 + static_cast<int>(rng() % 10);
    double want = 0.0;
    for (int j = 0; j < n; ++j) want += std::abs(p[j]);
    err_id = std::max(err_id, std::abs(ctx.powers(p, n).value - want));
  }
  const SubstTuple two = SubstTuple::from_polys({Poly{0.0, 1.0}, Poly{0.0, 2.0}});
  const double half = quotient_norm_powers(Poly{0.0, 1.0}, two, 2, 12).value;
  double enc = 0.0;
  for (int t = 0; t < 10; ++t) {
    std::normal_distribution<double> g;
    const Poly x2{0.0, cplx(g(rng), g(rng)) * 0.5, cplx(g(rng), g(rng)) * 0.5};
    QuotientContext c2(SubstTuple::from_polys({Poly{0.0, 1.0}, x2}), 10);
    const Poly p = random_poly(rng, 5);
    const int n = 1 + t % 5;
    const double pw = c2.powers(p, n).value;
    enc = std::max(enc, std::abs(c2.divisor(p, Poly::monomial(n), DivisorEncoding::jets).value - pw));
    enc = std::max(enc, std::abs(c2.divisor(p, Poly::monomial(n), DivisorEncoding::residues).value - pw));
  }
  Outcome o;
  o.pass = err_id <= 1e-7 && std::abs(half - 0.5) <= 1e-6 && enc <= 1e-7;
  o.detail = "identity tuple max error " + fmt("%.3g", err_id) + " (<= 1e-7), pi_{(z,2z),z^2}(z) = " +
             fmt("%.10f", half) + ", divisor vs powers max diff " + fmt("%.3g", enc) + " (<= 1e-7)";
  return o;
}

Outcome c6_convergence() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> g;
  int nonmono = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Poly> comps = {Poly{0.0, 1.0}};
    const int k = 2 + t % 2;
    for (int i = 1; i < k; ++i) comps.push_back(Poly{0.0, cplx(g(rng), g(rng)) * 0.6, cplx(g(rng), g(rng)) * 0.4});
    const SubstTuple xi = SubstTuple::from_polys(comps);
    const Poly p = random_poly(rng, 3, true);
    const PiEstimate e = pi_xi_estimate(p, xi, 8, 6);
    for (size_t i = 1; i < e.values.size(); ++i) nonmono += e.values[i] < e.values[i - 1] - e.gaps[i] - 1e-6;
  }
  double worst_last = 0.0;
  for (int t = 0; t < 4; ++t) {
    const SubstTuple xi = SubstTuple::from_polys({Poly{0.0, 1.0}, Poly{0.0, cplx(g(rng), g(rng)) * 0.5, 0.3}});
    const Poly p = random_poly(rng, 3, true);
    std::vector<Poly> seq;
    for (int s = 1; s <= 12; ++s) seq.push_back(Poly{0.0, -1.0 / std::pow(2.0, s), 1.0});
    const Limi2Probe pr = limi2_probe(p, xi, seq, Poly::monomial(2), 8);
    worst_last = std::max(worst_last, pr.diffs.back());
  }
  Outcome o;
  o.pass = nonmono == 0 && worst_last < 1e-3;
  o.detail = "nondecreasing violations " + std::to_string(nonmono) + " over 20 instances, q_t = z^2 - z/2^t final diff max " +
             fmt("%.3g", worst_last) + " (< 1e-3)";
  return o;
}

Outcome c7_construction(ConstructionReport& run) {
  run = run_construction(ConstructionConfig{});
  const ConstructionState& st = run.state;
  bool certs = st.k() == 6, norms = true, inc = true;
  double min_cert = std::numeric_limits<double>::infinity(), worst_probe = -1.0;
  for (const StageRecord& s : st.stages) {
    certs = certs && s.cert.value > 0.52;
    min_cert = std::min(min_cert, s.cert.value);
    norms = norms && s.xi_norm_bound <= 1.0 + 1e-9;
  }
  const std::vector<int> ns = st.n_list();
  for (size_t i = 1; i < ns.size(); ++i) inc = inc && ns[i] > ns[i - 1];
  const ProbeTable& pt = run.probes;
  for (size_t s = 1; s < pt.values.size(); ++s) {
    for (size_t j = 0; j < pt.probes.size(); ++j) {
      worst_probe = std::max(worst_probe, pt.values[s][j] - pt.values[s - 1][j] - pt.gaps[s][j] - pt.gaps[s - 1][j]);
    }
  }
  std::string nl;
  for (int n : ns) nl += (nl.empty() ? "" : ",") + std::to_string(n);
  Outcome o;
  o.pass = certs && norms && inc && worst_probe <= 1e-6;
  o.detail = "6 stages, min cert " + fmt("%.4f", min_cert) + " (> 0.52), n = [" + nl + "], pi(xi_k) <= 1 at all stages: " +
             (norms ? "yes" : "no") + ", max probe increase " + fmt("%.3g", worst_probe) + " (<= 1e-6)";
  return o;
}

Outcome c8_demo(const ConstructionState& st) {
  const std::vector<DensityTarget> t = chaotic_demo(st, default_targets(st));
  Outcome o;
  o.pass = t.size() == 5;
  for (const DensityTarget& x : t) {
    o.pass = o.pass && x.met && x.identity_ok && x.achieved_error <= 1.0 / x.stage;
  }
  o.detail = std::to_string(t.size()) + " targets for stages 2..6, all met via xi_k/k: " + (o.pass ? "yes" : "no");
  return o;
}

Outcome c9_noncyclic() {
  std::mt19937_64 rng(909);
  const SeriesMul skew = [](const TruncatedSeries& u, const TruncatedSeries& v) {
    return mul(u, v) + mul(u, u) * cplx(0.5);
  };
  double worst = 0.0, mutated_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + static_cast<int>(rng() % 3), D = 1 + static_cast<int>(rng() % 12);
    const int n = static_cast<int>(rng() % 21);
    const TruncatedSeries a = random_series(rng, k, D, 1.0);
    const TruncatedSeries x = random_series(rng, k, D, 1.0), y = random_series(rng, k, D, 1.0);
    worst = std::max(worst, noncyclic_check(a, x, y, n));
    // Skip pairs where the skew term is symmetric by accident (x, y parallel).
    if (l1_norm(mul(x, x) * cplx(0.5) - mul(y, y) * cplx(0.5)) > 1e-9 && D >= 2) {
      mutated_min = std::min(mutated_min, noncyclic_check(a, x, y, n, skew));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-12 && mutated_min > 0.0;
  o.detail = "max residual " + fmt("%.3g", worst) + " (<= 1e-12) over 100 cases, mutated product min residual " +
             fmt("%.3g", mutated_min) + " (> 0)";
  return o;
}

std::string cli_output(std::vector<std::string> args) {
  args.insert(args.begin(), "chaoslab");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return std::to_string(code) + "\n" + out.str();
}

Outcome c10_determinism() {
  const std::vector<std::vector<std::string>> cmds = {
      {"verify-vandermonde", "--n", "5", "--m-max", "40", "--trials", "50", "--seed", "7"},
      {"noncyclic", "--k", "2", "--degree", "10", "--trials", "100"},
      {"build", "--stages", "3"},
  };
  Outcome o;
  int same = 0;
  for (const auto& c : cmds) {
    const std::string a = cli_output(c);
    std::vector<std::string> threaded = c;
    threaded.insert(threaded.begin(), {"--workers", "3"});
    const std::string b = cli_output(c);
    const std::string w = cli_output(threaded);
    const bool ok = a == b && a == w && a.size() > 100;
    same += ok;
    o.pass = o.pass && ok;
  }
  o.detail = std::to_string(same) + "/" + std::to_string(cmds.size()) +
             " commands byte-identical across repeated runs and worker counts";
  return o;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);
  ConstructionReport run;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"vandermonde oracle equivalence", c1_vandermonde},
      {"growth bound", c2_growth},
      {"Rouche disk", c3_rouche},
      {"zero counting", c4_winding},
      {"quotient-norm oracles", c5_quotient},
      {"convergence probes", c6_convergence},
      {"construction run", [&] { return c7_construction(run); }},
      {"chaotic demo", [&] { return c8_demo(run.state); }},
      {"non-cyclicity identity", c9_noncyclic},
      {"determinism", c10_determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first << "): " << o.detail
              << " [" << fmt("%.1f", secs) << " s]\n";
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed\n" : "acceptance: all criteria pass\n");
  return failed ? 1 : 0;
}
