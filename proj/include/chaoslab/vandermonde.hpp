#pragma once

#include <cstdint>
#include <vector>

#include "chaoslab/poly.hpp"
#include "chaoslab/series.hpp"

namespace chaoslab {

struct Lambda {
  std::vector<cplx> nodes;
  double radius_bound = 0.0;  // every |node| < radius_bound

  [[nodiscard]] int n() const { return static_cast<int>(nodes.size()); }
};

// radius_bound defaults to a hair above the largest modulus.
Lambda make_lambda(std::vector<cplx> nodes, double radius_bound = -1.0);

// Product over i < r of (lambda_r - lambda_i).
cplx vdm_det(const std::vector<cplx>& nodes);

// det M_{n,j,m} / det M_n with LU for the numerator. Throws InputError when
// two nodes are closer than 1e-6.
cplx p_det_ratio(int n, int j, int m, const std::vector<cplx>& nodes);

// Table of P_{n,j,m}(lambda), j = 1..n, m = 0..M, filled by the recurrences
// over suffixes of the node list.
class PTable {
 public:
  explicit PTable(std::vector<cplx> nodes, int M = 64);

  [[nodiscard]] int n() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int max_m() const { return M_; }
  // Grows the table on demand.
  cplx operator()(int j, int m);
  void ensure(int M);

 private:
  void build(int M);
  std::vector<cplx> nodes_;
  int M_ = -1;
  std::vector<std::vector<cplx>> top_;  // top_[j-1][m] for the full node list
};

cplx p_recurrence(int n, int j, int m, const std::vector<cplx>& nodes);

struct GrowthProbe {
  double c_hat = 0.0;
  int m_at_max = 0;
  // Running maximum of |P|/beta^m over m <= M for M in checkpoints.
  std::vector<int> checkpoints;
  std::vector<double> c_hat_at;
  // max over m in (M/2, M] of |P|/beta^m; small when the bound has settled.
  double tail_max = 0.0;
};

// Random nodes uniform in the closed disk of radius alpha; also samples the
// torus |lambda_i| = alpha, where the modulus of each P attains its maximum.
GrowthProbe growth_bound_probe(int n, double alpha, double beta, int trials, int M, uint64_t seed);

struct FunctionalApprox {
  Lambda lambda;
  int j = 1;
  std::vector<cplx> weights;  // P_{n,j,m}, m = 0..M
  cplx value;
  double tail_bound = 0.0;
  double c_hat = 0.0;
};

// phi_{lambda,j}(a) summed to the smallest M whose geometric tail is below tol.
FunctionalApprox phi_apply(const Lambda& lambda, int j, const TruncatedSeries& a,
                           const SubstTuple& xi, double tol = 1e-10);

}  // namespace chaoslab
