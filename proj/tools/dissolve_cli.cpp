// Command line front end: benchmark runs, manifold verification, mapping
// timings, and standalone penalty tuning. Exit codes: 0 success, 1 runtime
// or verification failure, 2 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dissolve/auto_manifold.hpp"
#include "dissolve/bench.hpp"
#include "dissolve/manifolds.hpp"
#include "dissolve/problem.hpp"
#include "dissolve/verify.hpp"

using namespace dissolve;

namespace {

struct BenchCliOpts {
  std::string config_path;
  std::string problem;
  long n = 0;
  long p = 0;
  long m = 0;
  double alpha = 1.0;
  double theta = -1.0;
  std::vector<std::string> solvers{"lbfgs", "cg", "tr"};
  std::string beta = "auto";
  std::uint64_t seed = 42;
  double gtol = 1e-5;
  int max_iter = 10000;
  std::string out;
};

struct VerifyOpts {
  std::string manifold = "stiefel";
  long rows = 50;
  long cols = 5;
  int samples = 20;
  std::uint64_t seed = 1;
  std::string out;
};

struct CompareOpts {
  std::string manifold = "stiefel";
  long cols = 10;
  std::vector<long> rows{500, 1000, 2000};
  int reps = 50;
  std::uint64_t seed = 1;
  std::string out;
};

struct TuneOpts {
  std::string problem;
  long n = 0;
  long p = 0;
  long m = 0;
  double alpha = 1.0;
  double theta = -1.0;
  std::uint64_t seed = 7;
};

[[noreturn]] void config_fail(const std::string& what) {
  throw Error(ErrorCode::config_error, what);
}

std::string slurp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BetaSpec parse_beta_flag(const std::string& text) {
  if (text == "auto") return BetaSpec::automatic();
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == nullptr || *end != '\0' || !(value > 0.0))
    config_fail("--beta expects 'auto' or a positive number, got '" + text +
                "'");
  return BetaSpec::fixed(value);
}

// Random strictly convex quadratic with a quartic tail, used to exercise
// the gradient checker from the verify subcommand.
ObjectiveOracle probe_objective(Index n, std::uint64_t seed) {
  Rng rng(seed);
  const MatrixRM m = rng.gaussian_matrix(n, n);
  auto q = std::make_shared<const Eigen::MatrixXd>(
      m.transpose() * m / static_cast<double>(n) +
      Eigen::MatrixXd::Identity(n, n));
  auto b = std::make_shared<const Vector>(rng.gaussian_vector(n));
  return ObjectiveOracle(
      [q, b](const Point& x) {
        return 0.5 * x.data.dot(*q * x.data) + b->dot(x.data) +
               0.025 * x.data.array().pow(4).sum();
      },
      [q, b](const Point& x) {
        return Vector(*q * x.data + *b +
                      0.1 * x.data.array().cube().matrix());
      });
}

InstanceSpec spec_from_flags(const std::string& problem, long n, long p,
                             long m, double alpha, double theta) {
  if (problem.empty()) config_fail("--problem is required");
  if (n < 1) config_fail("--n must be at least 1");
  InstanceSpec spec;
  spec.problem = problem;
  spec.n = n;
  spec.p = p;
  spec.m = m;
  spec.alpha = alpha;
  spec.theta = theta;
  return spec;
}

int cmd_bench(const BenchCliOpts& o, bool inline_flags_used) {
  BenchConfig config;
  if (!o.config_path.empty()) {
    if (inline_flags_used)
      config_fail("--config cannot be combined with inline problem flags");
    config = parse_bench_config(slurp_file(o.config_path));
    if (!o.out.empty()) config.output = o.out;
  } else {
    config.instances = {
        spec_from_flags(o.problem, o.n, o.p, o.m, o.alpha, o.theta)};
    config.solvers = o.solvers;
    config.beta = parse_beta_flag(o.beta);
    config.seed = o.seed;
    if (!(o.gtol > 0.0)) config_fail("--gtol must be positive");
    if (o.max_iter < 0) config_fail("--max-iter must be >= 0");
    config.gtol = o.gtol;
    config.max_iter = o.max_iter;
    config.output = o.out;
  }

  const std::vector<BenchRecord> records = run_bench(config);
  if (config.output.empty()) {
    write_csv(records, std::cout);
  } else {
    std::printf("wrote %zu records to %s\n", records.size(),
                config.output.c_str());
  }
  for (const BenchRecord& r : records)
    if (r.status != "Converged")
      std::fprintf(stderr, "note: %s/%s finished with status %s\n",
                   r.problem.c_str(), r.solver.c_str(), r.status.c_str());
  return 0;
}

int cmd_verify(const VerifyOpts& o) {
  const Rng root(o.seed);
  Rng param = root.split(0);
  const Manifold m = make_named_manifold(o.manifold, o.rows, o.cols, param);

  Rng axiom_rng = root.split(1);
  const AxiomReport rep = check_axioms(m, o.samples, axiom_rng);

  Rng grad_rng = root.split(2);
  CdfProblem probe(probe_objective(m.ambient_dim(), o.seed ^ 0x9e3779b9u), m,
                   3.0);
  const double grad_err = check_gradients(probe, o.samples, grad_rng);
  const bool grad_pass = grad_err <= 1e-6;
  const bool all_pass = rep.pass() && grad_pass;

  std::printf("manifold         %s (%ld x %ld), %d samples, seed %llu\n",
              m.describe().c_str(), o.rows, o.cols, o.samples,
              static_cast<unsigned long long>(o.seed));
  std::printf("fixed point      %.3e   (tol %.1e)  %s\n",
              rep.fixed_point_error, rep.tols.fixed_point,
              rep.fixed_point_pass ? "pass" : "FAIL");
  std::printf("decrease band    %.3f       (tol %.1f)    %s\n",
              rep.band_ratio, rep.tols.band_ratio,
              rep.quadratic_pass ? "pass" : "FAIL");
  std::printf("  fitted exponent %.3f (expect about 2)\n",
              rep.quadratic_exponent);
  std::printf("idempotency      %.3e   (tol %.1e)   %s\n",
              rep.idempotency_error, rep.tols.idempotency,
              rep.idempotency_pass ? "pass" : "FAIL");
  std::printf("adjoint duality  %.3e   (tol %.1e)   %s\n", rep.duality_error,
              rep.tols.duality, rep.duality_pass ? "pass" : "FAIL");
  std::printf("gradient check   %.3e   (tol 1.0e-06)  %s\n", grad_err,
              grad_pass ? "pass" : "FAIL");
  std::printf("verdict          %s\n", all_pass ? "PASS" : "FAIL");

  if (!o.out.empty()) {
    nlohmann::ordered_json doc;
    doc["manifold"] = o.manifold;
    doc["rows"] = o.rows;
    doc["cols"] = o.cols;
    doc["samples"] = o.samples;
    doc["seed"] = o.seed;
    doc["fixed_point_error"] = rep.fixed_point_error;
    doc["band_ratio"] = rep.band_ratio;
    doc["quadratic_exponent"] = rep.quadratic_exponent;
    doc["idempotency_error"] = rep.idempotency_error;
    doc["duality_error"] = rep.duality_error;
    doc["gradient_error"] = grad_err;
    doc["pass"] = all_pass;
    std::ofstream out(o.out);
    if (!out) config_fail("cannot open output file '" + o.out + "'");
    out << doc.dump(2) << '\n';
  }
  return all_pass ? 0 : 1;
}

int cmd_compare_maps(const CompareOpts& o) {
  const std::string kind = o.manifold;
  const long cols = o.cols;
  const std::uint64_t pseed = o.seed;

  // Both factories must realize the same constraint set per dimension, so
  // the generic variant is rebuilt from the closed-form one each call.
  auto predefined = [kind, cols, pseed](Index dim) {
    Rng param(pseed);
    return make_named_manifold(kind, dim, cols, param);
  };
  auto generic = [predefined](Index dim) {
    const Manifold model = predefined(dim);
    const Shape shape = model.shape();
    auto residual = [model, shape](const Vector& v) {
      return model.constraint(Point(v, shape));
    };
    if (model.has_constraint_jacobian()) {
      auto jacobian = [model, shape](const Vector& v) {
        return model.constraint_jacobian(Point(v, shape));
      };
      return make_auto_manifold(residual, jacobian, shape,
                                model.constraint_dim());
    }
    return make_auto_manifold(residual, shape, model.constraint_dim());
  };

  std::vector<Index> dims(o.rows.begin(), o.rows.end());
  Rng rng = Rng(o.seed).split(1);
  const std::vector<TimingRecord> rows =
      compare_map_timing(predefined, generic, dims, o.reps, rng);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) config_fail("cannot open output file '" + o.out + "'");
    out = &file;
  }
  *out << "manifold,variant,operation,dim,reps,mean_s,stddev_s\n";
  char buf[64];
  for (const TimingRecord& r : rows) {
    *out << r.manifold << ',' << r.variant << ',' << r.operation << ','
         << r.dim << ',' << r.reps;
    std::snprintf(buf, sizeof buf, ",%.5e,%.5e\n", r.mean_s, r.stddev_s);
    *out << buf;
  }

  // Human summary on stderr so the CSV stream stays clean.
  for (std::size_t i = 0; i + 3 < rows.size(); i += 4) {
    std::fprintf(stderr,
                 "dim %ld: closed-form A %.3e s, generic A %.3e s (%.1fx)\n",
                 static_cast<long>(rows[i].dim), rows[i].mean_s,
                 rows[i + 2].mean_s, rows[i + 2].mean_s / rows[i].mean_s);
  }
  return 0;
}

int cmd_tune_beta(const TuneOpts& o) {
  const InstanceSpec spec =
      spec_from_flags(o.problem, o.n, o.p, o.m, o.alpha, o.theta);
  const Rng root(o.seed);
  Rng gen = root.split(0);
  const BenchInstance inst = make_instance(spec, gen);

  Rng tune = root.split(1);
  const BetaEstimate est = estimate_beta(inst.objective, inst.manifold,
                                         BetaConfig{}, inst.x0, tune);

  std::printf("instance        %s n=%ld p=%ld", inst.kind.c_str(),
              static_cast<long>(inst.n), static_cast<long>(inst.p));
  if (inst.kind == "nep")
    std::printf(" alpha=%g\n", inst.param);
  else
    std::printf(" theta=%g\n", inst.param);
  std::printf("beta            %.5e\n", est.beta);
  std::printf("raw estimate    %.5e (safety factor %g applied)\n", est.raw,
              BetaConfig{}.safety);
  std::printf("max decrease    %.5e\n", est.max_decrease_ratio);
  std::printf("max adjoint     %.5e\n", est.max_adjoint_ratio);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constraint dissolving optimization toolkit"};
  app.require_subcommand(1);

  BenchCliOpts bench_opts;
  CLI::App* bench = app.add_subcommand(
      "bench", "run benchmark instances and write CSV/JSON records");
  bench->add_option("--config", bench_opts.config_path,
                    "JSON config file (see README for the schema)");
  std::vector<CLI::Option*> bench_inline;
  bench_inline.push_back(
      bench->add_option("--problem", bench_opts.problem, "ncm | nep | odl"));
  bench_inline.push_back(
      bench->add_option("--n", bench_opts.n, "problem rows"));
  bench_inline.push_back(
      bench->add_option("--p", bench_opts.p, "problem columns"));
  bench_inline.push_back(bench->add_option(
      "--m", bench_opts.m, "odl observation count (default 100 n)"));
  bench_inline.push_back(
      bench->add_option("--alpha", bench_opts.alpha, "nep coupling weight"));
  bench_inline.push_back(bench->add_option(
      "--theta", bench_opts.theta, "ncm perturbation / odl sparsity"));
  bench_inline.push_back(bench
                             ->add_option("--solver", bench_opts.solvers,
                                          "comma separated subset of "
                                          "lbfgs,cg,tr")
                             ->delimiter(','));
  bench_inline.push_back(bench->add_option(
      "--beta", bench_opts.beta, "'auto' or a positive value"));
  bench_inline.push_back(
      bench->add_option("--seed", bench_opts.seed, "root seed"));
  bench_inline.push_back(bench->add_option("--gtol", bench_opts.gtol,
                                           "gradient norm tolerance"));
  bench_inline.push_back(bench->add_option("--max-iter", bench_opts.max_iter,
                                           "iteration budget"));
  bench->add_option("--out", bench_opts.out,
                    "CSV path (a .json sibling is written as well)");

  VerifyOpts verify_opts;
  CLI::App* verify = app.add_subcommand(
      "verify", "check mapping axioms and gradients for one manifold");
  verify->add_option("--manifold", verify_opts.manifold,
                     "manifold kind (see README for the list)");
  verify->add_option("--rows", verify_opts.rows, "ambient rows");
  verify->add_option("--cols", verify_opts.cols, "ambient columns");
  verify->add_option("--samples", verify_opts.samples, "sample count");
  verify->add_option("--seed", verify_opts.seed, "rng seed");
  verify->add_option("--out", verify_opts.out, "optional JSON report path");

  CompareOpts compare_opts;
  CLI::App* compare = app.add_subcommand(
      "compare-maps",
      "time closed-form mappings against the generic fallback");
  compare->add_option("--manifold", compare_opts.manifold, "manifold kind");
  compare->add_option("--cols", compare_opts.cols, "columns per instance");
  compare->add_option("--rows", compare_opts.rows,
                      "comma separated row counts")
      ->delimiter(',');
  compare->add_option("--reps", compare_opts.reps,
                      "timed repetitions per operation (>= 30)");
  compare->add_option("--seed", compare_opts.seed, "rng seed");
  compare->add_option("--out", compare_opts.out, "CSV path (default stdout)");

  TuneOpts tune_opts;
  CLI::App* tune = app.add_subcommand(
      "tune-beta", "estimate the penalty weight for one instance");
  tune->add_option("--problem", tune_opts.problem, "ncm | nep | odl");
  tune->add_option("--n", tune_opts.n, "problem rows");
  tune->add_option("--p", tune_opts.p, "problem columns");
  tune->add_option("--m", tune_opts.m, "odl observation count");
  tune->add_option("--alpha", tune_opts.alpha, "nep coupling weight");
  tune->add_option("--theta", tune_opts.theta,
                   "ncm perturbation / odl sparsity");
  tune->add_option("--seed", tune_opts.seed, "rng seed");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(bench)) {
      bool inline_used = false;
      for (const CLI::Option* opt : bench_inline)
        inline_used = inline_used || opt->count() > 0;
      return cmd_bench(bench_opts, inline_used);
    }
    if (app.got_subcommand(verify)) return cmd_verify(verify_opts);
    if (app.got_subcommand(compare)) return cmd_compare_maps(compare_opts);
    if (app.got_subcommand(tune)) return cmd_tune_beta(tune_opts);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == ErrorCode::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
