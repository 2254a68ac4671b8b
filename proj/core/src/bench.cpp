#include "dissolve/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "dissolve/linalg.hpp"
#include "dissolve/manifolds.hpp"

namespace dissolve {

namespace {

BenchInstance base_instance(std::string kind, Index n, Index p, double param,
                            std::uint64_t seed, ObjectiveOracle objective,
                            Manifold manifold, Point x0) {
  return BenchInstance{std::move(kind), n,
                       p,               param,
                       seed,            std::move(objective),
                       std::move(manifold), std::move(x0),
                       {},              {},
                       {},              {},
                       {},              {}};
}

// ----------------------------------------------------------------------
// Nearest correlation matrix

struct NcmData {
  Eigen::MatrixXd g;
  Eigen::MatrixXd h;
  Eigen::MatrixXd h_sq;  // H o H, precomputed for the gradient
};

}  // namespace

ObjectiveOracle make_ncm_objective(Eigen::MatrixXd g, Eigen::MatrixXd h) {
  if (g.rows() != g.cols() || h.rows() != h.cols() || g.rows() != h.rows())
    fail(ErrorCode::invalid_dims,
         "ncm objective needs square G and H of equal size");
  auto data = std::make_shared<NcmData>();
  data->h_sq = h.cwiseProduct(h);
  data->g = std::move(g);
  data->h = std::move(h);
  return ObjectiveOracle(
      [data](const Point& x) {
        const auto xm = x.mat();
        const Eigen::MatrixXd r = xm * xm.transpose() - data->g;
        return 0.5 * data->h.cwiseProduct(r).squaredNorm();
      },
      [data](const Point& x) {
        const auto xm = x.mat();
        const Eigen::MatrixXd r = xm * xm.transpose() - data->g;
        const MatrixRM grad = 2.0 * (data->h_sq.cwiseProduct(r) * xm);
        return Vector(Eigen::Map<const Vector>(grad.data(), grad.size()));
      });
}

BenchInstance make_ncm(Index n, Index p, double theta, Rng& rng) {
  if (p < 1 || p > n)
    fail(ErrorCode::invalid_dims, "ncm needs 1 <= p <= n");
  if (theta < 0.0 || theta > 1.0)
    fail(ErrorCode::invalid_dims, "ncm perturbation theta must be in [0, 1]");

  // Factor-model correlation target: G_D = F F^T + diag(d), rescaled to
  // unit diagonal, then blended with a random symmetric unit-diagonal E.
  const MatrixRM f = rng.gaussian_matrix(n, 2 * p);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = rng.uniform() + 0.1;
  Eigen::MatrixXd gd = f * f.transpose();
  gd.diagonal() += d;
  const Vector inv_sqrt = gd.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd g_hat = inv_sqrt.asDiagonal() * gd * inv_sqrt.asDiagonal();

  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double v = 2.0 * rng.uniform() - 1.0;
      e(i, j) = v;
      e(j, i) = v;
    }
  Eigen::MatrixXd g = (1.0 - theta) * g_hat + theta * e;

  Eigen::MatrixXd h(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      const double v = rng.uniform();
      h(i, j) = v;
      h(j, i) = v;
    }

  Manifold manifold = make_oblique(n, p);
  Point x0 = manifold.init_point(rng);
  BenchInstance instance =
      base_instance("ncm", n, p, theta, rng.seed(), make_ncm_objective(g, h),
                    std::move(manifold), std::move(x0));
  instance.target_g = std::move(g);
  instance.weight_h = std::move(h);
  return instance;
}

// ----------------------------------------------------------------------
// Nonlinear eigenvalue problem

namespace {

// (L X)(i, :) = 2 X(i, :) - X(i-1, :) - X(i+1, :)
MatrixRM apply_tridiag_laplacian(const Eigen::Map<const MatrixRM>& x) {
  const Index n = x.rows();
  MatrixRM out = 2.0 * x;
  if (n > 1) {
    out.topRows(n - 1) -= x.bottomRows(n - 1);
    out.bottomRows(n - 1) -= x.topRows(n - 1);
  }
  return out;
}

Vector row_squared_norms(const Eigen::Map<const MatrixRM>& x) {
  return x.rowwise().squaredNorm();
}

}  // namespace

ObjectiveOracle make_nep_objective(Index n, double alpha) {
  if (n < 1) fail(ErrorCode::invalid_dims, "nep needs n >= 1");
  if (alpha < 0.0)
    fail(ErrorCode::invalid_dims, "nep coupling alpha must be >= 0");
  auto l_diag = std::make_shared<const Vector>(Vector::Constant(n, 2.0));
  auto l_off =
      std::make_shared<const Vector>(Vector::Constant(std::max<Index>(n - 1, 0), -1.0));
  return ObjectiveOracle(
      [l_diag, l_off, alpha](const Point& x) {
        const auto xm = x.mat();
        const MatrixRM lx = apply_tridiag_laplacian(xm);
        double val = 0.5 * (xm.array() * lx.array()).sum();
        if (alpha > 0.0) {
          const Vector rho = row_squared_norms(xm);
          val += 0.25 * alpha * rho.dot(tridiag_solve(*l_diag, *l_off, rho));
        }
        return val;
      },
      [l_diag, l_off, alpha](const Point& x) {
        const auto xm = x.mat();
        MatrixRM grad = apply_tridiag_laplacian(xm);
        if (alpha > 0.0) {
          const Vector rho = row_squared_norms(xm);
          const Vector w = tridiag_solve(*l_diag, *l_off, rho);
          grad += alpha * (w.asDiagonal() * xm);
        }
        return Vector(Eigen::Map<const Vector>(grad.data(), grad.size()));
      });
}

BenchInstance make_nep(Index n, Index p, double alpha, Rng& rng) {
  if (p < 1 || p > n)
    fail(ErrorCode::invalid_dims, "nep needs 1 <= p <= n");
  if (alpha < 0.0)
    fail(ErrorCode::invalid_dims, "nep coupling alpha must be >= 0");

  Manifold manifold = make_stiefel(n, p);
  const Vector l_diag = Vector::Constant(n, 2.0);
  const Vector l_off = Vector::Constant(std::max<Index>(n - 1, 0), -1.0);

  // Start from the leading invariant subspace of the operator linearized
  // at a random feasible point.
  const Point x_probe = manifold.init_point(rng);
  const Vector rho = row_squared_norms(x_probe.mat());
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n, n);
  op.diagonal().array() = 2.0;
  for (Index i = 0; i + 1 < n; ++i) {
    op(i, i + 1) = -1.0;
    op(i + 1, i) = -1.0;
  }
  if (alpha > 0.0)
    op.diagonal() += alpha * tridiag_solve(l_diag, l_off, rho);
  const EighResult eig = sym_eigh(op);
  MatrixRM x0_mat(n, p);
  for (Index j = 0; j < p; ++j)
    x0_mat.col(j) = eig.eigenvectors.col(n - p + j);

  BenchInstance instance = base_instance(
      "nep", n, p, alpha, rng.seed(), make_nep_objective(n, alpha),
      std::move(manifold), Point::from_matrix(x0_mat));
  instance.l_diag = l_diag;
  instance.l_off = l_off;
  return instance;
}

// ----------------------------------------------------------------------
// Orthogonal dictionary learning

ObjectiveOracle make_odl_objective(MatrixRM y) {
  if (y.rows() < 1 || y.cols() < 1)
    fail(ErrorCode::invalid_dims, "odl objective needs nonempty data");
  auto data = std::make_shared<const MatrixRM>(std::move(y));
  return ObjectiveOracle(
      [data](const Point& x) {
        const Eigen::MatrixXd yx = *data * x.mat();
        return -yx.array().square().square().sum();
      },
      [data](const Point& x) {
        const Eigen::MatrixXd yx = *data * x.mat();
        const MatrixRM grad =
            -4.0 * (data->transpose() * yx.array().cube().matrix());
        return Vector(Eigen::Map<const Vector>(grad.data(), grad.size()));
      });
}

BenchInstance make_odl(Index n, Index m, double theta, Rng& rng) {
  if (n < 2) fail(ErrorCode::invalid_dims, "odl needs n >= 2");
  if (m < n) fail(ErrorCode::invalid_dims, "odl needs m >= n");
  if (theta <= 0.0 || theta >= 1.0)
    fail(ErrorCode::invalid_dims, "odl sparsity theta must be in (0, 1)");

  const MatrixRM q = random_orthonormal(n, n, rng);
  MatrixRM z = MatrixRM::Zero(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      if (rng.uniform() < theta) z(i, j) = rng.gaussian();
  const MatrixRM y = (q * z).transpose();

  Manifold manifold = make_stiefel(n, n);
  Point x0 = manifold.init_point(rng);
  BenchInstance instance =
      base_instance("odl", n, n, theta, rng.seed(), make_odl_objective(y),
                    std::move(manifold), std::move(x0));
  instance.data_y = y;
  instance.ground_truth_q = q;
  return instance;
}

double recovery_score(const MatrixRM& x, const MatrixRM& q) {
  if (x.rows() != x.cols() || q.rows() != q.cols() || x.rows() != q.rows())
    fail(ErrorCode::dimension_mismatch,
         "recovery score needs square matrices of equal size");
  const Index n = x.rows();
  Eigen::MatrixXd overlap = (q.transpose() * x).cwiseAbs();
  std::vector<bool> row_used(n, false), col_used(n, false);
  Index hits = 0;
  for (Index round = 0; round < n; ++round) {
    double best = -1.0;
    Index bi = 0, bj = 0;
    for (Index i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (Index j = 0; j < n; ++j) {
        if (col_used[j]) continue;
        if (overlap(i, j) > best) {
          best = overlap(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[bj] = true;
    if (best >= 0.99) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

// ----------------------------------------------------------------------
// Config parsing

namespace {

using Json = nlohmann::json;

[[noreturn]] void config_fail(const std::string& where,
                              const std::string& what) {
  fail(ErrorCode::config_error, where + ": " + what);
}

double as_positive_number(const Json& v, const std::string& where) {
  if (!v.is_number()) config_fail(where, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0)) config_fail(where, "must be positive");
  return x;
}

InstanceSpec parse_instance(const Json& v, const std::string& where) {
  if (!v.is_object()) config_fail(where, "expected an object");
  InstanceSpec spec;
  for (const auto& [key, value] : v.items()) {
    if (key == "problem") {
      if (!value.is_string()) config_fail(where + ".problem", "expected a string");
      spec.problem = value.get<std::string>();
    } else if (key == "n" || key == "p" || key == "m") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 1)
        config_fail(where + "." + key, "expected a positive integer");
      const Index x = value.get<Index>();
      if (key == "n") spec.n = x;
      else if (key == "p") spec.p = x;
      else spec.m = x;
    } else if (key == "alpha") {
      if (!value.is_number() || value.get<double>() < 0.0)
        config_fail(where + ".alpha", "expected a number >= 0");
      spec.alpha = value.get<double>();
    } else if (key == "theta") {
      if (!value.is_number()) config_fail(where + ".theta", "expected a number");
      spec.theta = value.get<double>();
    } else {
      config_fail(where + "." + key, "unknown field");
    }
  }
  if (spec.problem != "ncm" && spec.problem != "nep" && spec.problem != "odl")
    config_fail(where + ".problem", "expected one of ncm, nep, odl");
  if (spec.n < 1) config_fail(where + ".n", "required");
  if (spec.problem != "odl" && spec.p < 1) config_fail(where + ".p", "required");
  if (spec.theta >= 0.0) {
    if (spec.problem == "ncm" && spec.theta > 1.0)
      config_fail(where + ".theta", "must be in [0, 1] for ncm");
    if (spec.problem == "odl" && (spec.theta <= 0.0 || spec.theta >= 1.0))
      config_fail(where + ".theta", "must be in (0, 1) for odl");
  }
  return spec;
}

}  // namespace

BenchConfig parse_bench_config(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::config_error, std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) config_fail("config", "top level must be an object");

  BenchConfig config;
  bool saw_instances = false, saw_solvers = false;
  for (const auto& [key, value] : doc.items()) {
    if (key == "instances") {
      if (!value.is_array() || value.empty())
        config_fail("instances", "expected a nonempty array");
      for (std::size_t i = 0; i < value.size(); ++i)
        config.instances.push_back(parse_instance(
            value[i], "instances[" + std::to_string(i) + "]"));
      saw_instances = true;
    } else if (key == "solvers") {
      if (!value.is_array() || value.empty())
        config_fail("solvers", "expected a nonempty array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string where = "solvers[" + std::to_string(i) + "]";
        if (!value[i].is_string()) config_fail(where, "expected a string");
        const std::string name = value[i].get<std::string>();
        if (name != "lbfgs" && name != "cg" && name != "tr")
          config_fail(where, "expected one of lbfgs, cg, tr");
        config.solvers.push_back(name);
      }
      saw_solvers = true;
    } else if (key == "beta") {
      if (value.is_string()) {
        if (value.get<std::string>() != "auto")
          config_fail("beta", "expected \"auto\" or a positive number");
        config.beta = BetaSpec::automatic();
      } else {
        config.beta = BetaSpec::fixed(as_positive_number(value, "beta"));
      }
    } else if (key == "seed") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        config_fail("seed", "expected a nonnegative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "gtol") {
      config.gtol = as_positive_number(value, "gtol");
    } else if (key == "max_iter") {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0)
        config_fail("max_iter", "expected a nonnegative integer");
      config.max_iter = value.get<int>();
    } else if (key == "output") {
      if (!value.is_string()) config_fail("output", "expected a string");
      config.output = value.get<std::string>();
    } else {
      config_fail(key, "unknown field");
    }
  }
  if (!saw_instances) config_fail("instances", "required");
  if (!saw_solvers) config_fail("solvers", "required");
  return config;
}

// ----------------------------------------------------------------------
// Runner

BenchInstance make_instance(const InstanceSpec& spec, Rng& rng) {
  if (spec.problem == "ncm")
    return make_ncm(spec.n, spec.p, spec.theta < 0.0 ? 0.1 : spec.theta, rng);
  if (spec.problem == "nep") return make_nep(spec.n, spec.p, spec.alpha, rng);
  if (spec.problem == "odl")
    return make_odl(spec.n, spec.m > 0 ? spec.m : 100 * spec.n,
                    spec.theta < 0.0 ? 0.3 : spec.theta, rng);
  fail(ErrorCode::config_error, "unknown problem kind '" + spec.problem + "'");
}

namespace {

int worker_count() {
  const char* env = std::getenv("DISSOLVE_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long parsed = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || parsed < 1) return 1;
  return static_cast<int>(std::min<long>(parsed, 64));
}

std::string json_sibling_path(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0)
    return csv_path.substr(0, csv_path.size() - suffix.size()) + ".json";
  return csv_path + ".json";
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  if (config.instances.empty())
    fail(ErrorCode::config_error, "bench config has no instances");
  if (config.solvers.empty())
    fail(ErrorCode::config_error, "bench config has no solvers");
  for (const std::string& s : config.solvers)
    if (s != "lbfgs" && s != "cg" && s != "tr")
      fail(ErrorCode::config_error, "unknown solver '" + s + "'");

  // Instances and penalties are prepared sequentially so the run is a pure
  // function of the config regardless of the worker count.
  struct Prepared {
    BenchInstance instance;
    double beta;
  };
  const Rng root(config.seed);
  std::vector<Prepared> prepared;
  prepared.reserve(config.instances.size());
  for (std::size_t i = 0; i < config.instances.size(); ++i) {
    Rng gen = root.split(2 * i);
    BenchInstance instance = make_instance(config.instances[i], gen);
    double beta;
    if (config.beta.is_auto) {
      // The tuner samples around a generic feasible point drawn from the
      // manifold, not around the solver start. Benchmark starts can sit in
      // atypical corners of the landscape (the NEP eigenvector start
      // concentrates all mass on a few coordinates) and inflate the
      // estimate well past what exactness needs.
      Rng tune = root.split(2 * i + 1);
      beta = estimate_beta(instance.objective, instance.manifold, BetaConfig{},
                           std::nullopt, tune)
                 .beta;
    } else {
      beta = config.beta.value;
    }
    prepared.push_back(Prepared{std::move(instance), beta});
  }

  SolverOptions opts;
  opts.gtol = config.gtol;
  opts.max_iter = config.max_iter;

  const std::size_t total = prepared.size() * config.solvers.size();
  std::vector<BenchRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      const Prepared& pr = prepared[k / config.solvers.size()];
      const std::string& solver_name =
          config.solvers[k % config.solvers.size()];
      try {
        CdfProblem problem(pr.instance.objective.fork(), pr.instance.manifold,
                           pr.beta);
        const SolverReport rep = solve(solver_name, problem, pr.instance.x0, opts);
        BenchRecord& r = records[k];
        r.problem = pr.instance.kind;
        r.solver = solver_name;
        r.n = pr.instance.n;
        r.p = pr.instance.p;
        r.beta = pr.beta;
        r.fval = rep.fval;
        r.iter = rep.iter;
        r.eval_f = rep.eval_f;
        r.eval_grad = rep.eval_grad;
        r.stat = rep.stat;
        r.feas = rep.feas;
        r.time_s = rep.time_s;
        r.seed = pr.instance.seed;
        r.status = to_string(rep.status);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::min<int>(worker_count(), static_cast<int>(total));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (!config.output.empty()) {
    std::ofstream csv(config.output);
    if (!csv)
      fail(ErrorCode::config_error,
           "cannot open output file '" + config.output + "'");
    write_csv(records, csv);
    const std::string json_path = json_sibling_path(config.output);
    std::ofstream json_out(json_path);
    if (!json_out)
      fail(ErrorCode::config_error,
           "cannot open output file '" + json_path + "'");
    write_json(records, json_out);
  }
  return records;
}

void write_csv(const std::vector<BenchRecord>& records, std::ostream& out) {
  out << "problem,solver,n,p,beta,fval,iter,eval_f,eval_grad,stat,feas,"
         "time_s,seed,status\n";
  for (const BenchRecord& r : records) {
    out << r.problem << ',' << r.solver << ',' << r.n << ',' << r.p << ','
        << format_sci(r.beta) << ',' << format_sci(r.fval) << ',' << r.iter
        << ',' << r.eval_f << ',' << r.eval_grad << ',' << format_sci(r.stat)
        << ',' << format_sci(r.feas) << ',' << format_sci(r.time_s) << ','
        << r.seed << ',' << r.status << '\n';
  }
}

void write_json(const std::vector<BenchRecord>& records, std::ostream& out) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const BenchRecord& r : records) {
    nlohmann::ordered_json row;
    row["problem"] = r.problem;
    row["solver"] = r.solver;
    row["n"] = r.n;
    row["p"] = r.p;
    row["beta"] = r.beta;
    row["fval"] = r.fval;
    row["iter"] = r.iter;
    row["eval_f"] = r.eval_f;
    row["eval_grad"] = r.eval_grad;
    row["stat"] = r.stat;
    row["feas"] = r.feas;
    row["time_s"] = r.time_s;
    row["seed"] = r.seed;
    row["status"] = r.status;
    doc.push_back(std::move(row));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace dissolve
