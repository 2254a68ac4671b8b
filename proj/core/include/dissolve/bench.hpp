#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dissolve/problem.hpp"
#include "dissolve/solvers.hpp"

namespace dissolve {

// A generated benchmark problem: objective, manifold, shared starting
// point, and the raw data it was built from (kind-dependent fields are
// left empty when not applicable).
struct BenchInstance {
  std::string kind;  // "ncm" | "nep" | "odl"
  Index n{0};
  Index p{0};
  double param{0.0};  // theta for ncm/odl, alpha for nep
  std::uint64_t seed{0};

  ObjectiveOracle objective;
  Manifold manifold;
  Point x0;

  Eigen::MatrixXd target_g;  // ncm: perturbed correlation target
  Eigen::MatrixXd weight_h;  // ncm: symmetric weights in [0, 1]
  Vector l_diag, l_off;      // nep: tridiagonal operator bands
  MatrixRM data_y;           // odl: observation rows
  MatrixRM ground_truth_q;   // odl: the planted orthogonal basis
};

// Weighted nearest-correlation objective 0.5 |H o (X X^T - G)|_F^2 on the
// oblique manifold.
ObjectiveOracle make_ncm_objective(Eigen::MatrixXd g, Eigen::MatrixXd h);
BenchInstance make_ncm(Index n, Index p, double theta, Rng& rng);

// Discretized Kohn-Sham-style total-energy objective
// 0.5 tr(X^T L X) + (alpha/4) rho(X)^T L^{-1} rho(X) on the Stiefel
// manifold, L = tridiag(-1, 2, -1) applied implicitly.
ObjectiveOracle make_nep_objective(Index n, double alpha);
BenchInstance make_nep(Index n, Index p, double alpha, Rng& rng);

// l4-norm maximization -sum (Y X)^4 over orthogonal X for dictionary
// recovery from Bernoulli-Gaussian data.
ObjectiveOracle make_odl_objective(MatrixRM y);
BenchInstance make_odl(Index n, Index m, double theta, Rng& rng);

// Fraction of ground-truth columns recovered up to sign by a greedy
// one-to-one matching on |Q^T X|, counting matches with |cosine| >= 0.99.
double recovery_score(const MatrixRM& x, const MatrixRM& q);

// One CSV/JSON row of the experiment runner.
struct BenchRecord {
  std::string problem;
  std::string solver;
  Index n{0};
  Index p{0};
  double beta{0.0};
  double fval{0.0};
  int iter{0};
  std::int64_t eval_f{0};
  std::int64_t eval_grad{0};
  double stat{0.0};
  double feas{0.0};
  double time_s{0.0};
  std::uint64_t seed{0};
  std::string status;
};

struct InstanceSpec {
  std::string problem;  // "ncm" | "nep" | "odl"
  Index n{0};
  Index p{0};
  Index m{0};          // odl only; defaults to 100 n
  double alpha{1.0};   // nep
  double theta{-1.0};  // ncm/odl; negative means kind default
};

struct BenchConfig {
  std::vector<InstanceSpec> instances;
  std::vector<std::string> solvers;
  BetaSpec beta = BetaSpec::automatic();
  std::uint64_t seed{42};
  double gtol{1e-5};
  int max_iter{10000};
  std::string output;  // CSV path; the JSON twin swaps the extension
};

// Realizes one spec: kind defaults are filled in (m = 100 n for odl,
// theta = 0.1 ncm / 0.3 odl) and all data is drawn from `rng`.
BenchInstance make_instance(const InstanceSpec& spec, Rng& rng);

// Parses the JSON config document
//   {"instances": [...], "solvers": [...], "beta": "auto"|number,
//    "seed": ..., "gtol": ..., "max_iter": ..., "output": ...}
// (schema in the README). Throws config_error naming the offending field.
BenchConfig parse_bench_config(const std::string& json_text);

// Builds every instance, tunes beta once per instance, then runs each
// configured solver from the instance's shared starting point. Writes CSV
// and JSON next to config.output when set. DISSOLVE_THREADS caps the
// number of concurrent runs (default 1).
std::vector<BenchRecord> run_bench(const BenchConfig& config);

// problem,solver,n,p,beta,fval,iter,eval_f,eval_grad,stat,feas,time_s,
// seed,status with floats in 6-significant-digit scientific notation.
void write_csv(const std::vector<BenchRecord>& records, std::ostream& out);
void write_json(const std::vector<BenchRecord>& records, std::ostream& out);

}  // namespace dissolve
