#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaoslab/poly.hpp"
#include "chaoslab/quotient.hpp"
#include "chaoslab/series.hpp"

namespace chaoslab {

// The i-th element (i >= 1) of a fixed enumeration of nonzero polynomials
// with zero constant term and Gaussian-rational coefficients.
//
// (x, y) = cantor_unpair(i - 1) with cantor_unpair(1) = (1, 0); the degree is
// d = x + 1 and y is split into d naturals (t_1, ..., t_d) by iterated
// unpairing. The coefficient of z^j is gaussian_rational(t_j) for j < d and
// gaussian_rational_nonzero(t_d) for j = d. So p_1 = z, p_2 = z^2, p_3 = -z.
Poly enumerate_dense_polys(int64_t i);

std::pair<int64_t, int64_t> cantor_unpair(int64_t w);
// Gaussian rationals (a + bi)/q in lowest terms ordered by height
// max(|a|, |b|, q), then q, then |a| + |b|, real before imaginary, signs
// positive first. Index 0 of the full list is 0; the nonzero list starts
// 1, -1, i, -i.
cplx gaussian_rational(int64_t t);
cplx gaussian_rational_nonzero(int64_t t);

struct ConstructionConfig {
  int stages = 6;
  int D = 48;
  int M = 256;
  int n_cap = 400;
  double margin = 0.02;
  // Rows of the powers problems used as lower bounds of pi_{xi, z^n}(z).
  int r_cap = 24;
  // c = 2^t; t runs from the smallest value with delta(c) < gamma up to
  // t_min + t_span, never above t_max.
  int t_span = 64;
  int t_max = 1 << 20;
  // Divisors of degree above this use the powers surrogate.
  int direct_divisor_cap = 8;
  uint64_t seed = 1;
};

void to_json(nlohmann::json& j, const ConstructionConfig& c);
ConstructionConfig construction_config_from_json(const nlohmann::json& j);

struct StageRecord {
  int k = 0;
  std::string kind;  // "base", "even", "odd"
  int64_t p_index = 0;
  Poly p;
  int n = 0;
  int log2_c = 0;  // even stages: c = 2^log2_c
  int m = 0;       // odd stages: degree of the extracted divisor
  double alpha = 0.0;
  double delta = 0.0;
  double gamma_before = 0.0;  // gamma(xi_[k-1])
  double n_gate = 0.0;        // pi_{xi_[k-1], z^R}(z), R = min(n, r_cap)
  int n_gate_rows = 0;
  Poly divisor;  // q_c (even, when direct) or r_n (odd)
  NormCertificate cert;  // gate value: a lower bound for pi_{xi_[k]}(z)
  double margin = 0.0;   // cert.value - 1/2
  double xi_norm_bound = 1.0;  // ||u_k|| for the witness u_k of xi_k
  double xi_witness_residual = 0.0;
  int candidates_tried = 0;
};

void to_json(nlohmann::json& j, const StageRecord& s);

struct ConstructionState {
  ConstructionConfig config;
  SubstTuple xi{std::vector<XiComponent>{XiComponent::identity()}};
  std::vector<StageRecord> stages;

  [[nodiscard]] int k() const { return static_cast<int>(stages.size()); }
  [[nodiscard]] std::vector<int> n_list() const;
  [[nodiscard]] SubstTuple prefix(int k) const;
};

// Stage components rebuilt from (k, n, log2 c, p).
XiComponent even_component(int k, int n, int log2_c, const Poly& p);
XiComponent odd_component(int k, int n, const Poly& p);

ConstructionState initial_state(const ConstructionConfig& cfg);
void step_even(ConstructionState& state);
void step_odd(ConstructionState& state);

struct ProbeTable {
  std::vector<Poly> probes;
  int rows = 8;
  // values[s][j]: pi_{xi_[s+1], z^rows}(probes[j])
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> gaps;
};

struct ConstructionReport {
  ConstructionState state;
  ProbeTable probes;
};

using StageCallback = std::function<void(const StageRecord&)>;
ConstructionReport run_construction(const ConstructionConfig& cfg, const StageCallback& on_stage = {});
ProbeTable probe_table(const ConstructionState& state, const std::vector<Poly>& probes, int rows);
std::vector<Poly> standard_probes();

void to_json(nlohmann::json& j, const ConstructionState& s);
// Rebuilds every component from its stage parameters and rejects the state
// if a stored component differs.
ConstructionState construction_state_from_json(const nlohmann::json& j);

enum class TargetKind { supercyclic, almost_hypercyclic };
std::string to_string(TargetKind k);

struct DensityTarget {
  int index = 1;
  std::optional<Poly> p;  // must match enumerate_dense_polys(index) when given
  TargetKind kind = TargetKind::supercyclic;
  double achieved_error = 0.0;
  double budget = 0.0;
  int stage = 0;
  bool identity_ok = false;
  bool met = false;
  std::string reason;
};

std::vector<DensityTarget> default_targets(const ConstructionState& state);
std::vector<DensityTarget> targets_from_json(const nlohmann::json& j);
// Each target difference equals xi_k / k for the stage k it names, and the
// witness u_k / k has norm 1/k.
std::vector<DensityTarget> chaotic_demo(const ConstructionState& state, std::vector<DensityTarget> targets);
void to_json(nlohmann::json& j, const DensityTarget& t);

using SeriesMul = std::function<TruncatedSeries(const TruncatedSeries&, const TruncatedSeries&)>;
// l1 norm of y (1+a)^n x - x (1+a)^n y with (1+a)^n expanded in the
// unitalization, the scalar part carried separately.
double noncyclic_check(const TruncatedSeries& a, const TruncatedSeries& x, const TruncatedSeries& y, int n,
                       const SeriesMul& mul_fn = {});

struct QuasinilpotenceProbe {
  int rows = 0;
  std::vector<double> values;  // pi_{xi, z^rows}(p^n)
  std::vector<double> roots;   // values[n-1]^{1/n}
  std::vector<double> gaps;
};
QuasinilpotenceProbe quasinilpotence_probe(const SubstTuple& xi, const Poly& p, int N, int D);

}  // namespace chaoslab
