#include "chaoslab/construct.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <tuple>

#include "chaoslab/contour.hpp"
#include "chaoslab/error.hpp"

namespace chaoslab {

// ---------------------------------------------------------------------------
// Enumeration

std::pair<int64_t, int64_t> cantor_unpair(int64_t w) {
  if (w < 0) throw InputError("cantor_unpair needs a natural number");
  int64_t s = static_cast<int64_t>(std::floor((std::sqrt(8.0 * double(w) + 1.0) - 1.0) / 2.0));
  while (s * (s + 1) / 2 > w) --s;
  while ((s + 1) * (s + 2) / 2 <= w) ++s;
  const int64_t y = w - s * (s + 1) / 2;
  return {s - y, y};
}

namespace {

std::vector<cplx> nonzero_gaussian_prefix(int64_t need) {
  static std::mutex mu;
  static std::vector<cplx> list;
  static int height = 0;
  std::scoped_lock lock(mu);
  while (static_cast<int64_t>(list.size()) <= need) {
    ++height;
    const int h = height;
    std::vector<std::tuple<int, int, int, int, int, int, int>> cell;
    for (int q = 1; q <= h; ++q) {
      for (int a = -h; a <= h; ++a) {
        for (int b = -h; b <= h; ++b) {
          if (a == 0 && b == 0) continue;
          if (std::max({std::abs(a), std::abs(b), q}) != h) continue;
          if (std::gcd(std::gcd(std::abs(a), std::abs(b)), q) != 1) continue;
          cell.emplace_back(q, std::abs(a) + std::abs(b), std::abs(b), a < 0, b < 0, a, b);
        }
      }
    }
    std::sort(cell.begin(), cell.end());
    for (const auto& t : cell) {
      const int q = std::get<0>(t), a = std::get<5>(t), b = std::get<6>(t);
      list.emplace_back(double(a) / q, double(b) / q);
    }
  }
  return std::vector<cplx>(list.begin(), list.begin() + need + 1);
}

std::vector<int64_t> split_natural(int64_t y, int d) {
  std::vector<int64_t> out;
  for (int j = 0; j + 1 < d; ++j) {
    const auto [a, rest] = cantor_unpair(y);
    out.push_back(a);
    y = rest;
  }
  out.push_back(y);
  return out;
}

}  // namespace

cplx gaussian_rational_nonzero(int64_t t) {
  if (t < 0) throw InputError("negative enumeration index");
  return nonzero_gaussian_prefix(t).back();
}

cplx gaussian_rational(int64_t t) {
  if (t < 0) throw InputError("negative enumeration index");
  return t == 0 ? cplx(0.0) : gaussian_rational_nonzero(t - 1);
}

Poly enumerate_dense_polys(int64_t i) {
  if (i < 1) throw InputError("enumeration index starts at 1");
  const auto [x, y] = cantor_unpair(i - 1);
  if (x + 1 > kMaxDegree) throw InputError("enumerated degree exceeds the supported maximum");
  const int d = static_cast<int>(x) + 1;
  const std::vector<int64_t> t = split_natural(y, d);
  std::vector<cplx> c(static_cast<size_t>(d) + 1, cplx(0.0));
  for (int j = 1; j < d; ++j) c[j] = gaussian_rational(t[j - 1]);
  c[d] = gaussian_rational_nonzero(t[d - 1]);
  return Poly(std::move(c));
}

// ---------------------------------------------------------------------------
// Configuration and records

void to_json(nlohmann::json& j, const ConstructionConfig& c) {
  j = {{"stages", c.stages},   {"D", c.D},         {"M", c.M},
       {"n_cap", c.n_cap},     {"margin", c.margin}, {"r_cap", c.r_cap},
       {"t_span", c.t_span},   {"t_max", c.t_max},  {"direct_divisor_cap", c.direct_divisor_cap},
       {"seed", c.seed}};
}

ConstructionConfig construction_config_from_json(const nlohmann::json& j) {
  ConstructionConfig c;
  try {
    c.stages = j.at("stages").get<int>();
    c.D = j.at("D").get<int>();
    c.M = j.at("M").get<int>();
    c.n_cap = j.at("n_cap").get<int>();
    c.margin = j.at("margin").get<double>();
    c.r_cap = j.at("r_cap").get<int>();
    c.t_span = j.at("t_span").get<int>();
    c.t_max = j.at("t_max").get<int>();
    c.direct_divisor_cap = j.at("direct_divisor_cap").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed construction config: ") + e.what());
  }
  if (c.stages < 1 || c.D < 1 || c.M < 1 || c.n_cap < 2 || c.r_cap < 2 || c.margin < 0.0) {
    throw InputError("construction config out of range");
  }
  return c;
}

void to_json(nlohmann::json& j, const StageRecord& s) {
  j = nlohmann::json::object();
  j["k"] = s.k;
  j["kind"] = s.kind;
  j["p_index"] = s.p_index;
  j["p"] = s.p;
  j["n"] = s.n;
  j["log2_c"] = s.log2_c;
  j["m"] = s.m;
  j["alpha"] = s.alpha;
  j["delta"] = s.delta;
  j["gamma_before"] = s.gamma_before;
  j["n_gate"] = s.n_gate;
  j["n_gate_rows"] = s.n_gate_rows;
  j["divisor"] = s.divisor;
  j["cert"] = s.cert;
  j["margin"] = s.margin;
  j["xi_norm_bound"] = s.xi_norm_bound;
  j["xi_witness_residual"] = s.xi_witness_residual;
  j["candidates_tried"] = s.candidates_tried;
}

std::vector<int> ConstructionState::n_list() const {
  std::vector<int> out;
  for (const StageRecord& s : stages) out.push_back(s.n);
  return out;
}

SubstTuple ConstructionState::prefix(int k) const {
  if (k < 1 || k > xi.k()) throw InputError("prefix length out of range");
  return SubstTuple(std::vector<XiComponent>(xi.components().begin(), xi.components().begin() + k));
}

XiComponent even_component(int k, int n, int log2_c, const Poly& p) {
  return XiComponent(p * cplx(-double(k)), ScaledBinomial{n, 0, cplx(double(k)), log2_c});
}

XiComponent odd_component(int k, int n, const Poly& p) {
  return XiComponent(p * cplx(-double(k)), ScaledBinomial{1, n, cplx(double(k)), 0});
}

// ---------------------------------------------------------------------------
// Stages

namespace {

const Poly kZ{0.0, 1.0};

double witness_residual(const SubstTuple& xi, int D, int M) {
  const int k = xi.k();
  const TruncatedSeries u = TruncatedSeries::generator(k, D, k);
  const std::vector<cplx> img = substitute(u, xi, M);
  const std::vector<cplx> direct = xi[k - 1].taylor(M + 1);
  double r = 0.0;
  for (int j = 0; j <= M; ++j) r = std::max(r, std::abs(img[j] - direct[j]));
  return r;
}

void finish_stage(ConstructionState& state, StageRecord& rec, const XiComponent& comp) {
  state.xi = state.xi.appended(comp);
  rec.margin = rec.cert.value - 0.5;
  rec.xi_norm_bound = 1.0;
  rec.xi_witness_residual = witness_residual(state.xi, state.config.D, std::min(state.config.M, rec.n));
  state.stages.push_back(std::move(rec));
}

std::string budget_hint(int k) {
  return "stage " + std::to_string(k) + ": search budget exhausted; raise D/M or grids";
}

}  // namespace

ConstructionState initial_state(const ConstructionConfig& cfg) {
  ConstructionState st;
  st.config = cfg;
  StageRecord rec;
  rec.k = 1;
  rec.kind = "base";
  rec.n = 1;
  rec.gamma_before = 1.0;
  QuotientContext ctx(st.xi, cfg.D);
  rec.cert = ctx.powers(kZ, 2);
  rec.n_gate = rec.cert.value;
  rec.n_gate_rows = 2;
  rec.margin = rec.cert.value - 0.5;
  rec.xi_witness_residual = witness_residual(st.xi, cfg.D, 1);
  st.stages.push_back(std::move(rec));
  return st;
}

void step_even(ConstructionState& state) {
  const ConstructionConfig& cfg = state.config;
  const int k = state.k() + 1;
  if (k % 2 != 0) throw InputError("step_even needs an odd current stage");
  const double thr = 0.5 + cfg.margin;
  StageRecord rec;
  rec.k = k;
  rec.kind = "even";
  rec.p_index = k / 2;
  rec.p = enumerate_dense_polys(rec.p_index);
  const Poly& p = rec.p;
  QuotientContext ctx(state.xi, cfg.D);
  rec.gamma_before = state.xi.gamma();
  const double g = rec.gamma_before;

  // pi_{xi, z^n}(z) >= pi_{xi, z^R}(z) for R <= n, exact when D >= R - 1.
  const int n0 = std::max(state.stages.back().n, p.degree()) + 1;
  const int r_top = std::min(cfg.r_cap, cfg.D + 1);
  int n = -1;
  NormCertificate gate;
  for (int R = 2; R <= r_top; ++R) {
    gate = ctx.powers(kZ, R);
    ++rec.candidates_tried;
    if (gate.value > thr) {
      n = std::max(n0, R);
      rec.n_gate_rows = R;
      break;
    }
  }
  if (n < 0 || n > cfg.n_cap) throw Error(budget_hint(k) + " (no n passes the power gate)");
  rec.n = n;
  rec.n_gate = gate.value;

  const double log2k = std::log2(double(k));
  const double t_real = -double(n) * std::log2(g) - 1.0 - log2k;
  const int t_min = std::max(1, static_cast<int>(std::floor(t_real)) + 1);
  const int t_end = std::min(cfg.t_max, t_min + cfg.t_span);
  const double log2_p = std::log2(p.l1_norm());
  bool done = false;
  for (int t = t_min; t <= t_end && !done; ++t) {
    ++rec.candidates_tried;
    const RoucheResult rr = rouche_disk_log2(p, n, double(k), double(t));
    if (!rr.verified || !(rr.delta < g)) continue;
    rec.delta = rr.delta;
    rec.log2_c = t;
    if (n <= cfg.direct_divisor_cap && t < 1000) {
      Poly qc = Poly::monomial(n, cplx(double(k) * std::ldexp(1.0, t))) - p * cplx(double(k));
      NormCertificate c;
      try {
        c = ctx.divisor(kZ, qc);
      } catch (const Error&) {
        continue;
      }
      if (c.value > thr) {
        rec.divisor = qc;
        rec.cert = c;
        done = true;
      }
    } else if (log2_p - t <= -40.0) {
      // q_c / (k c) = z^n - p / c agrees with z^n far below double resolution.
      rec.cert = gate;
      rec.cert.encoding = "powers-surrogate";
      done = true;
    }
  }
  if (!done) throw Error(budget_hint(k) + " (no c passes the divisor gate)");
  finish_stage(state, rec, even_component(k, n, rec.log2_c, p));
}

void step_odd(ConstructionState& state) {
  const ConstructionConfig& cfg = state.config;
  const int k = state.k() + 1;
  if (k % 2 != 1 || k < 3) throw InputError("step_odd needs an even current stage");
  const double thr = 0.5 + cfg.margin;
  StageRecord rec;
  rec.k = k;
  rec.kind = "odd";
  rec.p_index = (k - 1) / 2;
  rec.p = enumerate_dense_polys(rec.p_index);
  if (rec.p.valuation() < 1) throw Error("enumerated polynomial has a constant term");
  const Poly p_tilde(std::vector<cplx>(rec.p.coeffs().begin() + 1, rec.p.coeffs().end()));
  QuotientContext ctx(state.xi, cfg.D);

  // (l0): smallest m with pi_{xi, z^m}(z) above threshold.
  const int r_top = std::min(cfg.r_cap, cfg.D + 1);
  for (int m = 1; m <= r_top; ++m) {
    const NormCertificate c = ctx.powers(kZ, m);
    ++rec.candidates_tried;
    if (c.value > thr) {
      rec.m = m;
      rec.n_gate = c.value;
      rec.n_gate_rows = m;
      break;
    }
  }
  if (rec.m == 0) throw Error(budget_hint(k) + " (no m passes the power gate)");

  rec.gamma_before = state.xi.gamma();
  const double g = rec.gamma_before;
  rec.delta = 0.9 * g;
  RegionOptions opt;
  opt.seed = cfg.seed + static_cast<uint64_t>(k);
  opt.stop_at_first = true;
  opt.accept = [&](const RegionRecord& r) {
    if (!(r.region.outer_radius < g)) return false;
    ++rec.candidates_tried;
    try {
      const Poly rn = extract_divisor_structured(p_tilde, r.n, r.region, rec.m);
      NormCertificate c = ctx.divisor(kZ, rn);
      if (!(c.value > thr)) return false;
      rec.divisor = rn;
      rec.cert = std::move(c);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  const ChaoticRegionReport rep =
      find_chaotic_region(double(k), rec.delta, p_tilde, rec.m, state.stages.back().n + 1, cfg.n_cap, opt);
  if (!rep.first_verified) throw Error(budget_hint(k) + " (no n up to n_cap passes every region gate)");
  rec.n = *rep.first_verified;
  rec.alpha = rep.alpha;
  finish_stage(state, rec, odd_component(k, rec.n, rec.p));
}

std::vector<Poly> standard_probes() {
  return {Poly{0.0, 1.0}, Poly{0.0, 0.0, 1.0}, Poly{0.0, 1.0, 0.5}, Poly{0.0, -1.0, 0.0, cplx(0.0, 1.0)}};
}

ProbeTable probe_table(const ConstructionState& state, const std::vector<Poly>& probes, int rows) {
  ProbeTable t;
  t.probes = probes;
  t.rows = rows;
  for (int s = 1; s <= state.k(); ++s) {
    QuotientContext ctx(state.prefix(s), state.config.D);
    std::vector<double> v, gp;
    for (const Poly& p : probes) {
      const NormCertificate c = ctx.powers(p, rows);
      v.push_back(c.value);
      gp.push_back(c.solver_gap);
    }
    t.values.push_back(std::move(v));
    t.gaps.push_back(std::move(gp));
  }
  return t;
}

ConstructionReport run_construction(const ConstructionConfig& cfg, const StageCallback& on_stage) {
  ConstructionReport rep;
  rep.state = initial_state(cfg);
  if (on_stage) on_stage(rep.state.stages.back());
  while (rep.state.k() < cfg.stages) {
    if ((rep.state.k() + 1) % 2 == 0) {
      step_even(rep.state);
    } else {
      step_odd(rep.state);
    }
    if (on_stage) on_stage(rep.state.stages.back());
  }
  rep.probes = probe_table(rep.state, standard_probes(), 8);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(nlohmann::json& j, const ConstructionState& s) {
  j = nlohmann::json::object();
  j["config"] = s.config;
  j["stages"] = s.stages;
  j["xi"] = nlohmann::json::array();
  for (const XiComponent& c : s.xi.components()) j["xi"].push_back(c);
}

ConstructionState construction_state_from_json(const nlohmann::json& j) {
  ConstructionState st;
  try {
    st.config = construction_config_from_json(j.at("config"));
    const auto& stages = j.at("stages");
    const auto& comps = j.at("xi");
    if (!stages.is_array() || !comps.is_array() || stages.empty() || stages.size() != comps.size()) {
      throw InputError("state needs matching stage and component lists");
    }
    std::vector<XiComponent> xi;
    for (size_t idx = 0; idx < stages.size(); ++idx) {
      const auto& js = stages[idx];
      StageRecord r;
      r.k = js.at("k").get<int>();
      r.kind = js.at("kind").get<std::string>();
      r.p_index = js.at("p_index").get<int64_t>();
      r.p = poly_from_json(js.at("p"));
      r.n = js.at("n").get<int>();
      r.log2_c = js.at("log2_c").get<int>();
      r.m = js.at("m").get<int>();
      r.alpha = js.at("alpha").get<double>();
      r.delta = js.at("delta").get<double>();
      r.gamma_before = js.at("gamma_before").get<double>();
      r.n_gate = js.at("n_gate").get<double>();
      r.n_gate_rows = js.at("n_gate_rows").get<int>();
      r.divisor = poly_from_json(js.at("divisor"));
      r.margin = js.at("margin").get<double>();
      r.xi_norm_bound = js.at("xi_norm_bound").get<double>();
      r.xi_witness_residual = js.at("xi_witness_residual").get<double>();
      r.candidates_tried = js.at("candidates_tried").get<int>();
      if (r.k != static_cast<int>(idx) + 1) throw InputError("stage numbers must run 1, 2, ...");
      XiComponent expect;
      if (r.k == 1) {
        if (r.kind != "base") throw InputError("stage 1 must be the base stage");
        expect = XiComponent::identity();
      } else {
        if (!(r.p == enumerate_dense_polys(r.p_index))) throw InputError("stage polynomial does not match its index");
        if (r.kind == "even" && r.k % 2 == 0) {
          expect = even_component(r.k, r.n, r.log2_c, r.p);
        } else if (r.kind == "odd" && r.k % 2 == 1) {
          expect = odd_component(r.k, r.n, r.p);
        } else {
          throw InputError("stage kind does not match its parity");
        }
      }
      const XiComponent stored = xi_component_from_json(comps[idx]);
      if (!(stored == expect)) throw InputError("stored component does not reproduce from its parameters");
      r.cert = certificate_from_json(js.at("cert"), std::max(1, r.k - 1), st.config.D);
      xi.push_back(stored);
      st.stages.push_back(std::move(r));
    }
    st.xi = SubstTuple(std::move(xi));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed state: ") + e.what());
  }
  return st;
}

// ---------------------------------------------------------------------------
// Density targets

std::string to_string(TargetKind k) { return k == TargetKind::supercyclic ? "supercyclic" : "almost_hypercyclic"; }

void to_json(nlohmann::json& j, const DensityTarget& t) {
  j = nlohmann::json::object();
  j["index"] = t.index;
  j["kind"] = to_string(t.kind);
  j["p"] = t.p ? nlohmann::json(*t.p) : nlohmann::json(nullptr);
  j["achieved_error"] = t.achieved_error;
  j["budget"] = t.budget;
  j["stage"] = t.stage;
  j["identity_ok"] = t.identity_ok;
  j["met"] = t.met;
  j["reason"] = t.reason;
}

std::vector<DensityTarget> default_targets(const ConstructionState& state) {
  std::vector<DensityTarget> out;
  for (int k = 2; k <= state.k(); ++k) {
    DensityTarget t;
    t.index = k / 2;
    t.kind = k % 2 == 0 ? TargetKind::supercyclic : TargetKind::almost_hypercyclic;
    out.push_back(t);
  }
  return out;
}

std::vector<DensityTarget> targets_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("targets JSON must be an array");
  std::vector<DensityTarget> out;
  for (const auto& e : j) {
    DensityTarget t;
    try {
      t.index = e.at("index").get<int>();
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "supercyclic") {
        t.kind = TargetKind::supercyclic;
      } else if (kind == "almost_hypercyclic") {
        t.kind = TargetKind::almost_hypercyclic;
      } else {
        throw InputError("unknown target kind " + kind);
      }
      if (e.contains("p")) t.p = poly_from_json(e.at("p"));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("malformed target: ") + ex.what());
    }
    if (t.index < 1) throw InputError("target index starts at 1");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<DensityTarget> chaotic_demo(const ConstructionState& state, std::vector<DensityTarget> targets) {
  for (DensityTarget& t : targets) {
    const int k = t.kind == TargetKind::supercyclic ? 2 * t.index : 2 * t.index + 1;
    t.stage = k;
    t.budget = 1.0 / k;
    if (k > state.k()) {
      t.reason = "state does not reach stage " + std::to_string(k);
      continue;
    }
    const StageRecord& s = state.stages[k - 1];
    const Poly p = enumerate_dense_polys(t.index);
    if (t.p && !(*t.p == p)) {
      t.reason = "target polynomial differs from the enumerated one";
      continue;
    }
    // Target difference as a component: c z^n - p or z (1+z)^n - p.
    const XiComponent diff = t.kind == TargetKind::supercyclic
                                 ? XiComponent(p * cplx(-1.0), ScaledBinomial{s.n, 0, 1.0, s.log2_c})
                                 : XiComponent(p * cplx(-1.0), ScaledBinomial{1, s.n, 1.0, 0});
    const XiComponent& xk = state.xi[k - 1];
    bool same = xk.extra().has_value() && diff.extra().has_value();
    if (same) {
      const ScaledBinomial& a = *xk.extra();
      const ScaledBinomial& b = *diff.extra();
      same = a.shift == b.shift && a.power == b.power && a.exp2 == b.exp2 &&
             std::abs(a.mant / double(k) - b.mant) <= 1e-15;
      const Poly scaled = xk.body() * cplx(1.0 / k);
      const Poly d = scaled - diff.body();
      same = same && d.l1_norm() <= 1e-15 * (1.0 + p.l1_norm());
    }
    t.identity_ok = same;
    // u_k / k is a witness for xi_k / k.
    t.achieved_error = s.xi_norm_bound / k;
    t.met = t.identity_ok && s.xi_witness_residual <= 1e-12 && t.achieved_error <= t.budget * (1.0 + 1e-12);
    if (!t.identity_ok) {
      t.reason = "stage component is not k times the target difference";
    } else if (!t.met) {
      t.reason = "budget not met";
    }
  }
  return targets;
}

// ---------------------------------------------------------------------------
// Side checks

double noncyclic_check(const TruncatedSeries& a, const TruncatedSeries& x, const TruncatedSeries& y, int n,
                       const SeriesMul& mul_fn) {
  if (a.k() != x.k() || a.k() != y.k() || a.D() != x.D() || a.D() != y.D()) {
    throw InputError("noncyclic_check needs a common k and D");
  }
  if (n < 0) throw InputError("n must be nonnegative");
  const SeriesMul mm = mul_fn ? mul_fn : SeriesMul([](const TruncatedSeries& u, const TruncatedSeries& v) {
    return mul(u, v);
  });
  // (1+a)^n = 1 + U with U = sum_{j>=1} C(n, j) a^j.
  TruncatedSeries U(a.k(), a.D());
  TruncatedSeries pw = a;
  double binom = 1.0;
  for (int j = 1; j <= n; ++j) {
    binom = binom * double(n - j + 1) / double(j);
    if (j > 1) pw = mm(pw, a);
    U += pw * cplx(binom);
  }
  const TruncatedSeries left = mm(mm(y, U) + y, x);
  const TruncatedSeries right = mm(mm(x, U) + x, y);
  return l1_norm(left - right);
}

QuasinilpotenceProbe quasinilpotence_probe(const SubstTuple& xi, const Poly& p, int N, int D) {
  if (N < 2) throw InputError("quasinilpotence probe needs N >= 2");
  if (p.is_zero()) throw InputError("probe polynomial must be nonzero");
  QuasinilpotenceProbe out;
  out.rows = std::min(N * p.degree() + 1, D + 1);
  QuotientContext ctx(xi, D);
  Poly pw = p.truncated(out.rows);
  for (int n = 1; n <= N; ++n) {
    if (n > 1) pw = (pw * p).truncated(out.rows);
    const NormCertificate c = ctx.powers(pw, out.rows);
    out.values.push_back(c.value);
    out.gaps.push_back(c.solver_gap);
    out.roots.push_back(std::pow(std::max(c.value, 0.0), 1.0 / n));
  }
  return out;
}

}  // namespace chaoslab
