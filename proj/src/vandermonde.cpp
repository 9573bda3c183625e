#include "chaoslab/vandermonde.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

#include "chaoslab/error.hpp"

namespace chaoslab {

Lambda make_lambda(std::vector<cplx> nodes, double radius_bound) {
  double r = 0.0;
  for (const cplx& z : nodes) r = std::max(r, std::abs(z));
  if (radius_bound < 0.0) radius_bound = r * (1.0 + 1e-12) + 1e-300;
  if (!(r < radius_bound)) throw InputError("node outside the declared radius bound");
  return Lambda{std::move(nodes), radius_bound};
}

cplx vdm_det(const std::vector<cplx>& nodes) {
  cplx d = 1.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (size_t r = i + 1; r < nodes.size(); ++r) d *= nodes[r] - nodes[i];
  }
  return d;
}

cplx p_det_ratio(int n, int j, int m, const std::vector<cplx>& nodes) {
  if (n != static_cast<int>(nodes.size()) || n < 1) throw InputError("n must equal the node count");
  if (j < 1 || j > n || m < 0) throw InputError("index out of range");
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (std::abs(nodes[a] - nodes[b]) < 1e-6) {
        throw InputError("nodes nearly coincide; use recurrence path");
      }
    }
  }
  Eigen::MatrixXcd mat(n, n);
  for (int i = 0; i < n; ++i) {
    cplx pw = 1.0;
    for (int c = 0; c < n; ++c) {
      mat(i, c) = pw;
      pw *= nodes[i];
    }
    mat(i, j - 1) = std::pow(nodes[i], m);
  }
  return mat.partialPivLu().determinant() / vdm_det(nodes);
}

PTable::PTable(std::vector<cplx> nodes, int M) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InputError("empty node list");
  build(std::max(M, n()));
}

cplx PTable::operator()(int j, int m) {
  if (j < 1 || j > n() || m < 0) throw InputError("index out of range");
  if (m > M_) build(std::max(m, 2 * M_));
  return top_[j - 1][m];
}

void PTable::ensure(int M) {
  if (M > M_) build(M);
}

void PTable::build(int M) {
  const int n = this->n();
  using Rows = std::vector<std::vector<cplx>>;
  // Single node: P_{1,1,m} = lambda^m.
  Rows cur(1, std::vector<cplx>(static_cast<size_t>(M) + 1));
  cplx pw = 1.0;
  for (int m = 0; m <= M; ++m) {
    cur[0][m] = pw;
    pw *= nodes_[n - 1];
  }
  cplx prod = nodes_[n - 1];
  for (int l = n - 2; l >= 0; --l) {
    const int s = n - l;  // size of the suffix starting at l
    const cplx l1 = nodes_[l];
    prod *= l1;
    Rows next(static_cast<size_t>(s), std::vector<cplx>(static_cast<size_t>(M) + 1, cplx(0.0)));
    for (int j = 1; j <= s; ++j) {
      if (j - 1 <= M) next[j - 1][j - 1] = 1.0;
    }
    // S_j(m) = sum_{i=0}^{m-s} l1^i P'_{j, m-i-1}, for the (s-1)-node table.
    Rows S(static_cast<size_t>(s - 1), std::vector<cplx>(static_cast<size_t>(M) + 1, cplx(0.0)));
    for (int j = 0; j < s - 1; ++j) {
      if (s > M) break;
      S[j][s] = cur[j][s - 1];
      for (int m = s; m < M; ++m) S[j][m + 1] = cur[j][m] + l1 * S[j][m];
    }
    const double sign = (s % 2 == 0) ? -1.0 : 1.0;  // (-1)^{s-1}
    cplx lp = l1;  // l1^{m-s+1}
    for (int m = s; m <= M; ++m) {
      next[s - 1][m] = lp + S[s - 2][m];
      lp *= l1;
      for (int j = 2; j < s; ++j) next[j - 1][m] = S[j - 2][m] - l1 * S[j - 1][m];
      // Moving the first column past the other s - 1 gives the sign.
      next[0][m] = sign * prod * next[s - 1][m - 1];
    }
    cur = std::move(next);
  }
  top_ = std::move(cur);
  M_ = M;
}

cplx p_recurrence(int n, int j, int m, const std::vector<cplx>& nodes) {
  if (n != static_cast<int>(nodes.size())) throw InputError("n must equal the node count");
  PTable t(nodes, std::max(m, n));
  return t(j, m);
}

GrowthProbe growth_bound_probe(int n, double alpha, double beta, int trials, int M, uint64_t seed) {
  if (!(alpha > 0.0 && alpha < beta)) throw InputError("growth probe needs 0 < alpha < beta");
  if (n < 1 || trials < 1 || M < 0) throw InputError("bad growth probe parameters");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GrowthProbe out;
  for (int q = 1; q <= 4; ++q) out.checkpoints.push_back(std::max(1, M * q / 4));
  std::vector<double> per_m(static_cast<size_t>(M) + 1, 0.0);
  for (int t = 0; t < trials; ++t) {
    std::vector<cplx> nodes;
    for (int i = 0; i < n; ++i) {
      const double rad = (t % 2 == 0) ? alpha : alpha * std::sqrt(unif(rng));
      nodes.push_back(std::polar(rad, 2.0 * std::numbers::pi * unif(rng)));
    }
    PTable table(nodes, M);
    for (int m = 0; m <= M; ++m) {
      const double bm = std::pow(beta, m);
      for (int j = 1; j <= n; ++j) per_m[m] = std::max(per_m[m], std::abs(table(j, m)) / bm);
    }
  }
  for (int m = 0; m <= M; ++m) {
    if (per_m[m] > out.c_hat) {
      out.c_hat = per_m[m];
      out.m_at_max = m;
    }
    if (2 * m > M) out.tail_max = std::max(out.tail_max, per_m[m]);
  }
  for (int cp : out.checkpoints) {
    double best = 0.0;
    for (int m = 0; m <= cp; ++m) best = std::max(best, per_m[m]);
    out.c_hat_at.push_back(best);
  }
  return out;
}

namespace {

// Probe constants are reused across calls with the same geometry.
double cached_growth_constant(int n, double alpha, double beta) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, double> cache;
  const auto key = std::make_tuple(n, alpha, beta);
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const GrowthProbe g = growth_bound_probe(n, alpha, beta, 64, 400, 0x5eedULL + n);
  // The probe is empirical; double it before using it in a tail bound.
  const double c = 2.0 * g.c_hat;
  std::scoped_lock lock(mu);
  cache.emplace(key, c);
  return c;
}

}  // namespace

FunctionalApprox phi_apply(const Lambda& lambda, int j, const TruncatedSeries& a, const SubstTuple& xi,
                           double tol) {
  const int n = lambda.n();
  if (j < 1 || j > n) throw InputError("functional index out of range");
  const double g = xi.gamma();
  if (!(lambda.radius_bound < g)) throw InputError("node radius must be below gamma(xi)");
  const double beta = 0.5 * (lambda.radius_bound + g);
  const double ratio = beta / g;
  FunctionalApprox out;
  out.lambda = lambda;
  out.j = j;
  out.c_hat = cached_growth_constant(n, std::max(lambda.radius_bound, 1e-12), beta);
  const double norm = l1_norm(a);
  int M = n;
  const auto tail = [&](int MM) { return out.c_hat * std::pow(ratio, MM + 1) / (1.0 - ratio) * norm; };
  while (tail(M) >= tol) {
    if (M > 20000) throw Error("functional tail does not converge fast enough");
    M += 8;
  }
  out.tail_bound = tail(M);
  PTable table(lambda.nodes, M);
  out.weights.resize(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) out.weights[m] = table(j, m);
  const std::vector<cplx> alpha = substitute(a, xi, M);
  cplx v = 0.0;
  for (int m = 0; m <= M; ++m) v += out.weights[m] * alpha[m];
  out.value = v;
  return out;
}

}  // namespace chaoslab
