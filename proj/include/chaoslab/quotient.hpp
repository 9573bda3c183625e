#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "chaoslab/poly.hpp"
#include "chaoslab/series.hpp"

namespace chaoslab {

struct L1Options {
  double gap_tol = 1e-10;  // relative duality gap
  int max_outer = 40;
  int max_newton = 80;
  double mu = 10.0;
  double prune_rel = 1e-12;
};

struct L1Solution {
  Eigen::VectorXcd x;
  double value = 0.0;     // |x|_1
  double lower = 0.0;     // dual objective of a feasible dual point
  double gap = 0.0;       // value - lower
  double residual = 0.0;  // max |Ax - b| in the caller's scaling
  int newton_steps = 0;
  bool converged = false;
};

// min sum |x_t| subject to A x = b over complex x. Log-barrier Newton on the
// dual max Re(b^H y) s.t. |a_t^H y| <= 1, with primal recovery by weighted
// projection. Throws Error("no representative at this truncation") when
// A x = b has no solution and Error("rank deficient constraint matrix") when
// the rows are dependent but consistent.
L1Solution solve_l1(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, const L1Options& opt = {});

enum class BoundTag { exact, upper_bound, lower_estimate };
std::string to_string(BoundTag t);

struct NormCertificate {
  double value = 0.0;
  TruncatedSeries witness{1, 0};
  // Replayed |constraint residual| per row, through a path independent of the
  // assembled matrix.
  std::vector<double> residuals;
  double solver_gap = 0.0;
  double lower_bound = 0.0;
  BoundTag tag = BoundTag::upper_bound;
  std::string encoding;
  int rows = 0;
  int columns = 0;
  bool truncation_active = false;

  [[nodiscard]] double max_residual() const;
};

void to_json(nlohmann::json& j, const NormCertificate& c);
// The witness is read back in k variables at truncation D.
NormCertificate certificate_from_json(const nlohmann::json& j, int k, int D);

enum class DivisorEncoding { jets, residues };

// Quotient seminorms for one substitution tuple at truncation degree D.
// Assembled constraint matrices are cached per (kind, parameters) and shared
// read-only between calls.
class QuotientContext {
 public:
  QuotientContext(SubstTuple xi, int D, L1Options opt = {});

  [[nodiscard]] const SubstTuple& xi() const { return xi_; }
  [[nodiscard]] int D() const { return D_; }

  // pi_{xi, z^n}(p).
  NormCertificate powers(const Poly& p, int n);
  // pi_{xi, q}(p); q is normalized to monic, all roots must lie in gamma(xi) D.
  NormCertificate divisor(const Poly& p, const Poly& q, DivisorEncoding enc = DivisorEncoding::jets);
  // Feasible a with Phi_xi(a) = p exactly, using monomials whose image has
  // degree <= max(D, deg p): an upper bound for pi_xi(p).
  NormCertificate interpolation(const Poly& p);

 private:
  struct Assembly {
    Eigen::MatrixXcd A;
    std::vector<MultiIndex> monomials;
  };
  std::shared_ptr<const Assembly> powers_matrix(int n);

  SubstTuple xi_;
  int D_;
  L1Options opt_;
  std::mutex mu_;
  std::map<int, std::shared_ptr<const Assembly>> powers_cache_;
};

NormCertificate quotient_norm_powers(const Poly& p, const SubstTuple& xi, int n, int D);
NormCertificate quotient_norm_divisor(const Poly& p, const SubstTuple& xi, const Poly& q, int D,
                                      DivisorEncoding enc = DivisorEncoding::jets);

struct PiEstimate {
  std::vector<double> values;  // pi_{xi, z^n}(p), n = 1..n_max
  std::vector<double> gaps;
  double lower = 0.0;          // last value: lower estimate of pi_xi(p)
  double upper = 0.0;          // interpolation bound; +inf when unavailable
  bool monotone = true;        // nondecreasing within gap + 1e-6
};
PiEstimate pi_xi_estimate(const Poly& p, const SubstTuple& xi, int D, int n_max);

struct Limi2Probe {
  std::vector<double> values;  // pi_{xi, q_t}(p)
  double limit = 0.0;          // pi_{xi, q_inf}(p)
  std::vector<double> diffs;
};
Limi2Probe limi2_probe(const Poly& p, const SubstTuple& xi, const std::vector<Poly>& q_seq, const Poly& q_inf,
                       int D);

// Monomials u^e with total degree <= max_degree in graded order.
std::vector<MultiIndex> monomials_up_to(int k, int max_degree);

}  // namespace chaoslab
