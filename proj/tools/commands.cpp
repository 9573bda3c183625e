#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaoslab/construct.hpp"
#include "chaoslab/contour.hpp"
#include "chaoslab/error.hpp"
#include "chaoslab/quotient.hpp"
#include "chaoslab/report.hpp"
#include "chaoslab/vandermonde.hpp"

namespace chaoslab::cli {
namespace {

using nlohmann::json;

struct Common {
  std::string out;
  std::string csv;
  bool timings = false;
  int workers = 1;
};

struct Curve {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Outcome {
  Report report;
  Curve curve;
};

// Runs body and stamps its wall time on every check it added.
void timed(Report& rep, const std::function<void()>& body) {
  const size_t before = rep.checks.size();
  const auto t0 = std::chrono::steady_clock::now();
  body();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (size_t i = before; i < rep.checks.size(); ++i) rep.checks[i].runtime = secs;
}

Poly read_poly(const std::string& path) { return poly_from_json(read_json_file(path)); }

ConstructionState read_state(const std::string& path) {
  const json j = read_json_file(path);
  // Accept a bare state or a build report carrying it under data.state.
  if (j.is_object() && j.contains("data") && j["data"].is_object() && j["data"].contains("state")) {
    return construction_state_from_json(j["data"]["state"]);
  }
  return construction_state_from_json(j);
}

cplx random_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  return std::polar(r, 2.0 * std::numbers::pi * u(rng));
}

// ---------------------------------------------------------------------------
// verify-vandermonde

struct VdmOptions {
  int n = 5;
  int m_max = 40;
  int trials = 50;
  uint64_t seed = 7;
  double radius = 0.8;
  double min_sep = 1e-3;
  int prod_m = 30;
  int growth_n = 3;
  double alpha = 0.4;
  double beta = 0.6;
  int growth_m = 200;
  int growth_trials = 64;
};

struct VdmTrial {
  double oracle = 0.0;
  double basis = 0.0;
  double prod = 0.0;
  double sym = 0.0;
  double homog = 0.0;
};

std::vector<cplx> random_nodes(std::mt19937_64& rng, int n, double radius, double min_sep) {
  std::vector<cplx> nodes;
  while (static_cast<int>(nodes.size()) < n) {
    const cplx z = random_in_disk(rng, radius);
    bool ok = true;
    for (const cplx& w : nodes) ok = ok && std::abs(z - w) >= min_sep;
    if (ok) nodes.push_back(z);
  }
  return nodes;
}

VdmTrial vdm_trial(const VdmOptions& o, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<cplx> nodes = random_nodes(rng, o.n, o.radius, o.min_sep);
  const int M = std::max(o.m_max, o.prod_m);
  PTable tab(nodes, M);
  VdmTrial t;
  for (int j = 1; j <= o.n; ++j) {
    for (int m = 0; m <= o.m_max; ++m) {
      const cplx r = tab(j, m);
      const cplx d = p_det_ratio(o.n, j, m, nodes);
      if (m <= o.n - 1) {
        const double delta = (m == j - 1) ? 1.0 : 0.0;
        t.basis = std::max({t.basis, std::abs(r - delta), std::abs(d - delta)});
      } else {
        t.oracle = std::max(t.oracle, std::abs(r - d) / std::max(std::abs(d), std::numeric_limits<double>::min()));
      }
    }
  }
  for (const cplx& lam : nodes) {
    for (int m = 0; m <= o.prod_m; ++m) {
      cplx s = 0.0, lp = 1.0;
      for (int j = 1; j <= o.n; ++j, lp *= lam) s += lp * tab(j, m);
      t.prod = std::max(t.prod, std::abs(s - std::pow(lam, m)));
    }
  }
  std::vector<cplx> perm = nodes;
  std::shuffle(perm.begin(), perm.end(), rng);
  PTable tab_perm(perm, o.m_max);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const cplx scale = std::polar(0.5 + 0.5 * u(rng), 2.0 * std::numbers::pi * u(rng));
  std::vector<cplx> scaled = nodes;
  for (cplx& z : scaled) z *= scale;
  PTable tab_scaled(scaled, o.m_max);
  for (int j = 1; j <= o.n; ++j) {
    for (int m = 0; m <= o.m_max; ++m) {
      const cplx r = tab(j, m);
      t.sym = std::max(t.sym, std::abs(tab_perm(j, m) - r) / std::max(1.0, std::abs(r)));
      if (m >= j - 1) {
        const cplx expect = std::pow(scale, m - j + 1) * r;
        const double den = std::max(std::abs(expect), std::numeric_limits<double>::min());
        if (expect != cplx(0.0)) t.homog = std::max(t.homog, std::abs(tab_scaled(j, m) - expect) / den);
      }
    }
  }
  return t;
}

Outcome cmd_verify_vandermonde(const VdmOptions& o, const Common& c) {
  if (o.n < 1 || o.n > 12 || o.m_max < 0 || o.trials < 1 || o.prod_m < 0) {
    throw InputError("verify-vandermonde needs 1 <= n <= 12, m-max >= 0, trials >= 1");
  }
  if (!(o.radius > 0.0 && o.radius < 1.0) || !(o.min_sep >= 1e-6)) {
    throw InputError("radius must lie in (0, 1) and min-sep must be at least 1e-6");
  }
  Outcome res;
  Report& rep = res.report;
  rep.command = "verify-vandermonde";
  rep.config = {{"n", o.n},         {"m_max", o.m_max},       {"trials", o.trials},
                {"seed", o.seed},   {"radius", o.radius},     {"min_sep", o.min_sep},
                {"prod_m", o.prod_m}, {"growth", {{"n", o.growth_n}, {"alpha", o.alpha}, {"beta", o.beta},
                                                  {"m_max", o.growth_m}, {"trials", o.growth_trials}}}};
  std::vector<VdmTrial> trials(static_cast<size_t>(o.trials));
  timed(rep, [&] {
    parallel_for(o.trials, worker_count(c.workers),
                 [&](int t) { trials[t] = vdm_trial(o, derive_seed(o.seed, static_cast<uint64_t>(t))); });
    VdmTrial worst;
    for (const VdmTrial& t : trials) {
      worst.oracle = std::max(worst.oracle, t.oracle);
      worst.basis = std::max(worst.basis, t.basis);
      worst.prod = std::max(worst.prod, t.prod);
      worst.sym = std::max(worst.sym, t.sym);
      worst.homog = std::max(worst.homog, t.homog);
    }
    rep.check_le("recurrence_vs_determinant_ratio", worst.oracle, 1e-9, "max relative difference, m >= n");
    rep.check_le("basis_values", worst.basis, 1e-12, "max |P - delta| for m <= n - 1, both routes");
    rep.check_le("power_identity", worst.prod, 1e-9, "max |sum_j lambda_i^(j-1) P_j,m - lambda_i^m|");
    rep.check_le("permutation_symmetry", worst.sym, 1e-10);
    rep.check_le("homogeneity", worst.homog, 1e-9, "relative, P(t lambda) = t^(m-j+1) P(lambda)");
    json per = json::array();
    for (const VdmTrial& t : trials) {
      per.push_back({{"oracle", t.oracle}, {"basis", t.basis}, {"prod", t.prod}, {"sym", t.sym}, {"homog", t.homog}});
    }
    rep.data["trials"] = per;
  });
  timed(rep, [&] {
    const GrowthProbe g = growth_bound_probe(o.growth_n, o.alpha, o.beta, o.growth_trials, o.growth_m, o.seed);
    rep.check_true("growth_constant_finite", std::isfinite(g.c_hat) && g.c_hat > 0.0);
    // The constant estimated from m <= M/2 must already cover (M/2, M].
    const double half = g.c_hat_at.size() > 1 ? g.c_hat_at[1] : g.c_hat;
    rep.check_le("growth_bound_settled", g.tail_max, half, "tail max of |P|/beta^m vs estimate from m <= M/2");
    rep.data["growth"] = {{"c_hat", g.c_hat},
                          {"m_at_max", g.m_at_max},
                          {"checkpoints", g.checkpoints},
                          {"c_hat_at", g.c_hat_at},
                          {"tail_max", g.tail_max}};
  });
  return res;
}

// ---------------------------------------------------------------------------
// noncyclic

struct NoncyclicOptions {
  int k = 2;
  int D = 10;
  int trials = 100;
  int n_max = 20;
  uint64_t seed = 1;
  double density = 0.3;
  double a_norm = 1.0;
};

TruncatedSeries random_series(std::mt19937_64& rng, int k, int D, double density, double norm) {
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> g(0.0, 1.0);
  TruncatedSeries s(k, D);
  for (const MultiIndex& e : monomials_up_to(k, D)) {
    if (total_degree(e) == 0 || !keep(rng)) continue;
    s.add_term(e, cplx(g(rng), g(rng)));
  }
  if (s.is_zero()) s = TruncatedSeries::generator(k, D, 1);
  return s * cplx(norm / l1_norm(s));
}

Outcome cmd_noncyclic(const NoncyclicOptions& o, const Common& c) {
  if (o.k < 1 || o.k > 6 || o.D < 1 || o.D > 24 || o.trials < 1 || o.n_max < 0) {
    throw InputError("noncyclic needs 1 <= k <= 6, 1 <= degree <= 24, trials >= 1, n-max >= 0");
  }
  if (!(o.density > 0.0 && o.density <= 1.0) || !(o.a_norm > 0.0)) throw InputError("bad density or a-norm");
  Outcome res;
  Report& rep = res.report;
  rep.command = "noncyclic";
  rep.config = {{"k", o.k},         {"degree", o.D},         {"trials", o.trials}, {"n_max", o.n_max},
                {"seed", o.seed},   {"density", o.density},  {"a_norm", o.a_norm}};
  std::vector<double> resid(static_cast<size_t>(o.trials)), diag(static_cast<size_t>(o.trials));
  std::vector<int> ns(static_cast<size_t>(o.trials));
  timed(rep, [&] {
    parallel_for(o.trials, worker_count(c.workers), [&](int t) {
      std::mt19937_64 rng(derive_seed(o.seed, static_cast<uint64_t>(t)));
      const TruncatedSeries a = random_series(rng, o.k, o.D, o.density, o.a_norm);
      const TruncatedSeries x = random_series(rng, o.k, o.D, o.density, 1.0);
      const TruncatedSeries y = random_series(rng, o.k, o.D, o.density, 1.0);
      std::uniform_int_distribution<int> pick(0, o.n_max);
      ns[t] = pick(rng);
      resid[t] = noncyclic_check(a, x, y, ns[t]);
      diag[t] = noncyclic_check(a, x, x, ns[t]);
    });
    rep.check_le("residual_max", *std::max_element(resid.begin(), resid.end()), 1e-12);
    rep.check_le("equal_arguments_exact", *std::max_element(diag.begin(), diag.end()), 0.0);
    rep.data["residuals"] = resid;
    rep.data["n"] = ns;
  });
  return res;
}

// ---------------------------------------------------------------------------
// verify-winding

struct WindingOptions {
  std::string p_path;
  double k = 1.0;
  double delta = 0.3;
  int m = 3;
  int n_from = 20;
  int n_to = 400;
  uint64_t seed = 1;
};

Outcome cmd_verify_winding(const WindingOptions& o, const Common&) {
  const Poly p = read_poly(o.p_path);
  if (!(o.k > 0.0) || !(o.delta > 0.0 && o.delta < 1.0) || o.m < 1 || o.n_from < 1 || o.n_to < o.n_from) {
    throw InputError("verify-winding needs k > 0, 0 < delta < 1, m >= 1, 1 <= n-from <= n-to");
  }
  Outcome res;
  Report& rep = res.report;
  rep.command = "verify-winding";
  rep.config = {{"p", p},          {"k", o.k},         {"delta", o.delta}, {"m", o.m},
                {"n_from", o.n_from}, {"n_to", o.n_to}, {"seed", o.seed}};
  timed(rep, [&] {
    RegionOptions opt;
    opt.seed = o.seed;
    const ChaoticRegionReport r = find_chaotic_region(o.k, o.delta, p, o.m, o.n_from, o.n_to, opt);
    json recs = json::array();
    int verified = 0, mismatches = 0, literal_violations = 0;
    double min_excess = std::numeric_limits<double>::infinity();
    res.curve.header = {"n", "nu", "nu_roots", "bound", "bound_literal", "verified"};
    for (const RegionRecord& x : r.records) {
      recs.push_back({{"n", x.n},
                      {"nu", x.nu},
                      {"nu_roots", x.nu_roots},
                      {"bound", x.bound},
                      {"bound_literal", x.bound_literal},
                      {"verified", x.verified},
                      {"qn_image_max", x.qn_image_max},
                      {"reason", x.reason}});
      res.curve.rows.push_back({double(x.n), double(x.nu), double(x.nu_roots), x.bound, x.bound_literal,
                                x.verified ? 1.0 : 0.0});
      if (!x.verified) continue;
      ++verified;
      if (x.nu != x.nu_roots) ++mismatches;
      if (!(x.nu > x.bound_literal)) ++literal_violations;
      min_excess = std::min(min_excess, double(x.nu) - x.bound);
    }
    rep.check_true("some_n_verified", verified > 0);
    if (verified > 0) {
      rep.check_le("winding_equals_root_count", double(mismatches), 0.0, "verified n with nu != root count");
      rep.check_gt("winding_exceeds_bound", min_excess, 0.0, "min over verified n of nu - (n alpha/pi - 2 - |w_p| - deg p)");
    } else {
      CheckRecord none;
      none.name = "winding_equals_root_count";
      none.status = Status::inconclusive;
      none.note = "no verified n";
      rep.add(none);
      none.name = "winding_exceeds_bound";
      rep.add(none);
    }
    rep.data["alpha"] = r.alpha;
    rep.data["c_bar"] = r.c_bar;
    rep.data["first_verified"] = r.first_verified ? json(*r.first_verified) : json(nullptr);
    rep.data["verified_count"] = verified;
    // 2 n alpha in place of n alpha / pi; recorded, not enforced.
    rep.data["literal_bound_violations"] = literal_violations;
    rep.data["records"] = recs;
  });
  return res;
}

// ---------------------------------------------------------------------------
// quotient-norm

struct QuotientOptions {
  std::string xi_path;
  std::string p_path;
  std::string constraint;
  int D = 24;
  std::string encoding = "jets";
};

Outcome cmd_quotient_norm(const QuotientOptions& o, const Common&) {
  const json jxi = read_json_file(o.xi_path);
  if (!jxi.is_array() || jxi.empty()) throw InputError("xi JSON must be a nonempty array of components");
  std::vector<XiComponent> comps;
  for (const json& e : jxi) comps.push_back(xi_component_from_json(e));
  SubstTuple xi(std::move(comps));
  const Poly p = read_poly(o.p_path);
  if (o.D < 1 || o.D > 256) throw InputError("degree must lie in [1, 256]");
  if (o.encoding != "jets" && o.encoding != "residues") throw InputError("encoding is jets or residues");

  Outcome res;
  Report& rep = res.report;
  rep.command = "quotient-norm";
  rep.config = {{"xi", jxi}, {"p", p}, {"constraint", o.constraint}, {"degree", o.D}, {"encoding", o.encoding}};
  QuotientContext ctx(xi, o.D);
  NormCertificate cert;
  const std::string& s = o.constraint;
  if (s.rfind("zn:", 0) == 0) {
    int n = 0;
    try {
      size_t used = 0;
      n = std::stoi(s.substr(3), &used);
      if (used != s.size() - 3) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw InputError("bad constraint " + s);
    }
    if (n < 1) throw InputError("zn constraint needs n >= 1");
    rep.config["n"] = n;
    timed(rep, [&] { cert = ctx.powers(p, n); });
  } else if (s.rfind("divisor:", 0) == 0) {
    const Poly q = read_poly(s.substr(8));
    rep.config["q"] = q;
    const DivisorEncoding enc = o.encoding == "jets" ? DivisorEncoding::jets : DivisorEncoding::residues;
    timed(rep, [&] { cert = ctx.divisor(p, q, enc); });
  } else if (s == "none") {
    timed(rep, [&] { cert = ctx.interpolation(p); });
  } else {
    throw InputError("constraint must be zn:<n>, divisor:<file> or none");
  }
  timed(rep, [&] {
    const double scale = 1.0 + p.l1_norm();
    rep.check_le("replay_residual", cert.max_residual(), 1e-8 * scale);
    rep.check_le("solver_gap", cert.solver_gap, 1e-6 * (1.0 + cert.value));
    rep.check_true("value_nonnegative", cert.value >= 0.0);
  });
  rep.data["certificate"] = cert;
  rep.data["value"] = cert.value;
  return res;
}

// ---------------------------------------------------------------------------
// build

Outcome cmd_build(const ConstructionConfig& cfg, const Common&, std::ostream& err) {
  if (cfg.stages < 1 || cfg.stages > 12 || cfg.D < 4 || cfg.M < cfg.D || cfg.n_cap < 2 || cfg.r_cap < 2 ||
      !(cfg.margin >= 0.0 && cfg.margin < 0.5)) {
    throw InputError("build needs 1 <= stages <= 12, degree >= 4, taylor >= degree, margin in [0, 0.5)");
  }
  Outcome res;
  Report& rep = res.report;
  rep.command = "build";
  rep.config = cfg;
  ConstructionReport run;
  timed(rep, [&] {
    run = run_construction(cfg, [&](const StageRecord& s) {
      err << "stage " << s.k << " (" << s.kind << "): n=" << s.n << " cert=" << s.cert.value << "\n";
    });
  });
  const ConstructionState& st = run.state;
  timed(rep, [&] {
    const double need = 0.5 + cfg.margin;
    for (const StageRecord& s : st.stages) {
      const std::string k = std::to_string(s.k);
      rep.check_gt("stage_" + k + "_cert", s.cert.value, need, s.cert.encoding);
      rep.check_le("stage_" + k + "_xi_norm", s.xi_norm_bound, 1.0 + 1e-9);
      rep.check_le("stage_" + k + "_witness_residual", s.xi_witness_residual, 1e-12);
    }
    const std::vector<int> ns = st.n_list();
    bool inc = true;
    for (size_t i = 1; i < ns.size(); ++i) inc = inc && ns[i] > ns[i - 1];
    rep.check_true("n_list_strictly_increasing", inc);
    // Largest increase of a probe value from one stage to the next, beyond
    // the two solver gaps.
    double worst = -std::numeric_limits<double>::infinity();
    const ProbeTable& pt = run.probes;
    for (size_t s = 1; s < pt.values.size(); ++s) {
      for (size_t j = 0; j < pt.probes.size(); ++j) {
        worst = std::max(worst, pt.values[s][j] - pt.values[s - 1][j] - pt.gaps[s][j] - pt.gaps[s - 1][j]);
      }
    }
    if (pt.values.size() > 1) rep.check_le("probes_nonincreasing", worst, 1e-6);
  });
  rep.data["state"] = st;
  rep.data["n_list"] = st.n_list();
  json probes = {{"rows", run.probes.rows}, {"probes", run.probes.probes}, {"values", run.probes.values},
                 {"gaps", run.probes.gaps}};
  rep.data["probes"] = probes;
  res.curve.header = {"stage", "n", "cert"};
  for (size_t j = 0; j < run.probes.probes.size(); ++j) res.curve.header.push_back("probe_" + std::to_string(j + 1));
  for (size_t s = 0; s < st.stages.size(); ++s) {
    std::vector<double> row = {double(st.stages[s].k), double(st.stages[s].n), st.stages[s].cert.value};
    for (double v : run.probes.values[s]) row.push_back(v);
    res.curve.rows.push_back(std::move(row));
  }
  return res;
}

// ---------------------------------------------------------------------------
// demo

Outcome cmd_demo(const std::string& state_path, const std::string& targets_path, const Common&) {
  const ConstructionState st = read_state(state_path);
  std::vector<DensityTarget> targets =
      targets_path.empty() ? default_targets(st) : targets_from_json(read_json_file(targets_path));
  Outcome res;
  Report& rep = res.report;
  rep.command = "demo";
  rep.config = {{"state", state_path}, {"targets", targets_path}, {"stages", st.k()}};
  timed(rep, [&] {
    targets = chaotic_demo(st, targets);
    for (const DensityTarget& t : targets) {
      CheckRecord c;
      c.name = "target_" + std::to_string(t.index) + "_" + to_string(t.kind);
      c.value = t.achieved_error;
      c.bound = t.budget;
      c.margin = t.budget - t.achieved_error;
      c.status = t.met ? Status::pass : Status::fail;
      c.note = t.reason.empty() ? "stage " + std::to_string(t.stage) + " witness" : t.reason;
      rep.add(c);
    }
  });
  rep.data["targets"] = targets;
  return res;
}

// ---------------------------------------------------------------------------
// quasinilpotence-probe

struct QnOptions {
  std::string state_path;
  std::string p_path;
  int N = 8;
  int stage = 0;
  int D = 24;
};

Outcome cmd_quasinilpotence(const QnOptions& o, const Common&) {
  SubstTuple xi{std::vector<XiComponent>{XiComponent::identity()}};
  int D = o.D;
  int stage = 1;
  if (!o.state_path.empty()) {
    const ConstructionState st = read_state(o.state_path);
    stage = o.stage > 0 ? o.stage : st.k();
    if (stage > st.k()) throw InputError("state has only " + std::to_string(st.k()) + " stages");
    xi = st.prefix(stage);
    D = st.config.D;
  }
  const Poly p = o.p_path.empty() ? Poly{0.0, 1.0} : read_poly(o.p_path);
  if (o.N < 2 || o.N > 64) throw InputError("N must lie in [2, 64]");
  if (p.is_zero() || p[0] != cplx(0.0)) throw InputError("probe polynomial must be nonzero with p(0) = 0");
  Outcome res;
  Report& rep = res.report;
  rep.command = "quasinilpotence-probe";
  rep.config = {{"state", o.state_path}, {"p", p}, {"N", o.N}, {"stage", stage}, {"degree", D}};
  QuasinilpotenceProbe q;
  timed(rep, [&] {
    q = quasinilpotence_probe(xi, p, o.N, D);
    // pi(p^2) <= pi(p)^2 up to the solver gaps.
    const double excess = q.values[1] - q.values[0] * q.values[0] - q.gaps[1] - 2.0 * q.values[0] * q.gaps[0];
    rep.check_le("submultiplicative", excess, 1e-6);
  });
  rep.data["rows"] = q.rows;
  rep.data["values"] = q.values;
  rep.data["roots"] = q.roots;
  rep.data["gaps"] = q.gaps;
  rep.data["caveat"] = "powers are reduced modulo z^rows, which can only lower the values";
  res.curve.header = {"n", "value", "root"};
  for (size_t i = 0; i < q.values.size(); ++i) res.curve.rows.push_back({double(i + 1), q.values[i], q.roots[i]});
  return res;
}

void emit(const Outcome& res, const Common& c, std::ostream& out) {
  const std::string text = canonical_dump(res.report.to_json(c.timings));
  if (!c.csv.empty()) {
    if (res.curve.header.empty()) throw InputError(res.report.command + " has no curve to export");
    write_csv(c.csv, res.curve.header, res.curve.rows);
  }
  if (c.out.empty()) {
    out << text;
    return;
  }
  write_text(c.out, text);
  int fails = 0, inconclusive = 0;
  for (const CheckRecord& r : res.report.checks) {
    fails += r.status == Status::fail;
    inconclusive += r.status == Status::inconclusive;
  }
  out << res.report.command << ": " << res.report.checks.size() << " checks, " << fails << " failed, "
      << inconclusive << " inconclusive\n";
  for (const CheckRecord& r : res.report.checks) {
    if (r.status != Status::pass) out << "  " << to_string(r.status) << " " << r.name << "\n";
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical verification tools for substitution seminorm constructions", "chaoslab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);
  Common common;
  app.add_option("--out", common.out, "Write the JSON report here instead of stdout");
  app.add_option("--csv", common.csv, "Write the command's curve as CSV");
  app.add_flag("--timings", common.timings, "Include per-check runtimes (breaks byte stability)");
  app.add_option("--workers", common.workers, "Worker threads; CHAOSLAB_WORKERS overrides")->check(CLI::Range(1, 1024));

  VdmOptions vdm;
  auto* c_vdm = app.add_subcommand("verify-vandermonde", "Recurrence vs determinant oracles and growth probe");
  c_vdm->add_option("--n", vdm.n);
  c_vdm->add_option("--m-max", vdm.m_max);
  c_vdm->add_option("--trials", vdm.trials);
  c_vdm->add_option("--seed", vdm.seed);
  c_vdm->add_option("--radius", vdm.radius);
  c_vdm->add_option("--min-sep", vdm.min_sep);
  c_vdm->add_option("--prod-m", vdm.prod_m);
  c_vdm->add_option("--growth-n", vdm.growth_n);
  c_vdm->add_option("--alpha", vdm.alpha);
  c_vdm->add_option("--beta", vdm.beta);
  c_vdm->add_option("--growth-m", vdm.growth_m);
  c_vdm->add_option("--growth-trials", vdm.growth_trials);

  NoncyclicOptions nc;
  auto* c_nc = app.add_subcommand("noncyclic", "Commutator identity on random truncated series");
  c_nc->add_option("--k", nc.k);
  c_nc->add_option("--degree", nc.D);
  c_nc->add_option("--trials", nc.trials);
  c_nc->add_option("--n-max", nc.n_max);
  c_nc->add_option("--seed", nc.seed);
  c_nc->add_option("--density", nc.density);
  c_nc->add_option("--a-norm", nc.a_norm);

  WindingOptions wn;
  auto* c_wn = app.add_subcommand("verify-winding", "Zero counting in the regions W_n");
  c_wn->add_option("--p", wn.p_path)->required();
  c_wn->add_option("--k", wn.k);
  c_wn->add_option("--delta", wn.delta);
  c_wn->add_option("--m", wn.m);
  c_wn->add_option("--n-from", wn.n_from);
  c_wn->add_option("--n-to", wn.n_to);
  c_wn->add_option("--seed", wn.seed);

  QuotientOptions qo;
  auto* c_q = app.add_subcommand("quotient-norm", "Quotient seminorm certificate");
  c_q->add_option("--xi", qo.xi_path)->required();
  c_q->add_option("--p", qo.p_path)->required();
  c_q->add_option("--constraint", qo.constraint)->required();
  c_q->add_option("--degree", qo.D);
  c_q->add_option("--encoding", qo.encoding);

  ConstructionConfig cfg;
  auto* c_b = app.add_subcommand("build", "Run the inductive construction");
  c_b->add_option("--stages", cfg.stages);
  c_b->add_option("--degree", cfg.D);
  c_b->add_option("--taylor", cfg.M);
  c_b->add_option("--n-cap", cfg.n_cap);
  c_b->add_option("--margin", cfg.margin);
  c_b->add_option("--r-cap", cfg.r_cap);
  c_b->add_option("--seed", cfg.seed);

  std::string demo_state, demo_targets;
  auto* c_d = app.add_subcommand("demo", "Density targets from a built state");
  c_d->add_option("--state", demo_state)->required();
  c_d->add_option("--targets", demo_targets);

  QnOptions qn;
  auto* c_qn = app.add_subcommand("quasinilpotence-probe", "pi(p^n)^(1/n) trend");
  c_qn->add_option("--state", qn.state_path);
  c_qn->add_option("--p", qn.p_path);
  c_qn->add_option("--N", qn.N);
  c_qn->add_option("--stage", qn.stage);
  c_qn->add_option("--degree", qn.D);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    Outcome res;
    if (c_vdm->parsed()) {
      res = cmd_verify_vandermonde(vdm, common);
    } else if (c_nc->parsed()) {
      res = cmd_noncyclic(nc, common);
    } else if (c_wn->parsed()) {
      res = cmd_verify_winding(wn, common);
    } else if (c_q->parsed()) {
      res = cmd_quotient_norm(qo, common);
    } else if (c_b->parsed()) {
      res = cmd_build(cfg, common, err);
    } else if (c_d->parsed()) {
      res = cmd_demo(demo_state, demo_targets, common);
    } else {
      res = cmd_quasinilpotence(qn, common);
    }
    emit(res, common, out);
    return res.report.any_fail() ? 1 : 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace chaoslab::cli
