#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "dissolve/bench.hpp"
#include "dissolve/finite_diff.hpp"
#include "dissolve/manifolds.hpp"
#include "support.hpp"

using namespace dissolve;

namespace {

// Relative fd agreement of the instance gradient at a mild perturbation
// of its start point.
double gradient_fd_error(const BenchInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  Point x = inst.x0;
  x.data += 0.01 * rng.gaussian_vector(x.size());
  const Vector g = inst.objective.gradient(x);
  ObjectiveOracle probe = inst.objective.fork();
  const Vector g_fd = fd_gradient(
      [&probe, &x](const Vector& v) {
        return probe.value(Point(v, x.shape));
      },
      x.data);
  return (g - g_fd).norm() / (1.0 + g.norm());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CSV text with the time_s column blanked, so two runs can be compared
// byte for byte.
std::string strip_time_column(const std::string& csv) {
  std::stringstream out;
  std::stringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    int column = 0;
    std::string kept;
    std::stringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      if (column++ == 11) field = "-";
      if (!kept.empty()) kept += ',';
      kept += field;
    }
    out << kept << '\n';
  }
  return out.str();
}

BenchConfig tiny_config() {
  BenchConfig config;
  InstanceSpec ncm;
  ncm.problem = "ncm";
  ncm.n = 10;
  ncm.p = 2;
  InstanceSpec nep;
  nep.problem = "nep";
  nep.n = 12;
  nep.p = 2;
  nep.alpha = 1.0;
  config.instances = {ncm, nep};
  config.solvers = {"lbfgs", "cg", "tr"};
  config.seed = 99;
  return config;
}

}  // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("correlation fit is zero at an exactly representable target") {
  Rng rng(21);
  Manifold oblique = make_oblique(8, 3);
  const Point x0 = oblique.init_point(rng);
  const Eigen::MatrixXd g = x0.mat() * x0.mat().transpose();
  const Eigen::MatrixXd h = Eigen::MatrixXd::Ones(8, 8);
  ObjectiveOracle obj = make_ncm_objective(g, h);
  CHECK(obj.value(x0) <= 1e-24);

  // The weighted residual is a squared norm, so never negative.
  const Point y(rng.gaussian_vector(24), Shape{8, 3});
  CHECK(obj.value(y) >= 0.0);

  CHECK_ERROR_CODE(make_ncm_objective(g, Eigen::MatrixXd::Ones(7, 7)),
                   ErrorCode::invalid_dims);
}

TEST_CASE("correlation instance draws a valid weighted target") {
  Rng rng(33);
  const BenchInstance inst = make_ncm(20, 3, 0.1, rng);
  CHECK(inst.kind == "ncm");
  CHECK(inst.n == 20);
  CHECK(inst.p == 3);

  const Eigen::MatrixXd& g = inst.target_g;
  const Eigen::MatrixXd& h = inst.weight_h;
  CHECK((g - g.transpose()).norm() <= 1e-12);
  CHECK((g.diagonal() - Vector::Ones(20)).norm() <= 1e-12);
  CHECK((h - h.transpose()).norm() <= 1e-12);
  CHECK(h.minCoeff() >= 0.0);
  CHECK(h.maxCoeff() <= 1.0);
  CHECK(inst.manifold.feasibility(inst.x0) <= 1e-10);

  CHECK(gradient_fd_error(inst, 4) <= 1e-6);

  CHECK_ERROR_CODE(make_ncm(5, 6, 0.1, rng), ErrorCode::invalid_dims);
  CHECK_ERROR_CODE(make_ncm(5, 2, 1.5, rng), ErrorCode::invalid_dims);
}

TEST_CASE("eigenvalue instance matches the explicit trace form") {
  Rng rng(8);
  const BenchInstance inst = make_nep(14, 3, 0.0, rng);
  CHECK((inst.l_diag - Vector::Constant(14, 2.0)).norm() == 0.0);
  CHECK((inst.l_off - Vector::Constant(13, -1.0)).norm() == 0.0);
  CHECK(inst.manifold.feasibility(inst.x0) <= 1e-10);

  // At alpha=0 the value is the plain quadratic trace.
  const Eigen::MatrixXd x = inst.x0.mat();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(14, 14);
  l.diagonal().setConstant(2.0);
  l.diagonal(1).setConstant(-1.0);
  l.diagonal(-1).setConstant(-1.0);
  const double expected = 0.5 * (x.transpose() * l * x).trace();
  CHECK(inst.objective.value(inst.x0) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Row squared norms of a feasible point sum to the column count.
  CHECK(x.rowwise().squaredNorm().sum() == doctest::Approx(3.0).epsilon(1e-12));

  // The repulsion term adds a nonnegative quadratic form at every point.
  ObjectiveOracle with_repulsion = make_nep_objective(14, 1.0);
  CHECK(with_repulsion.value(inst.x0) > expected);

  Rng r2(8);
  const BenchInstance coulomb = make_nep(14, 3, 1.0, r2);
  CHECK(gradient_fd_error(coulomb, 5) <= 1e-6);
}

TEST_CASE("dictionary instance hides an orthogonal basis in the data") {
  Rng rng(55);
  const BenchInstance inst = make_odl(10, 200, 0.3, rng);
  CHECK(inst.data_y.rows() == 200);
  CHECK(inst.data_y.cols() == 10);
  CHECK((inst.ground_truth_q.transpose() * inst.ground_truth_q -
         Eigen::MatrixXd::Identity(10, 10))
            .norm() <= 1e-12);
  CHECK(inst.manifold.feasibility(inst.x0) <= 1e-10);

  // Evaluating at the planted basis exposes the spiky rows of Z.
  const Point q_point = Point::from_matrix(inst.ground_truth_q);
  CHECK(inst.objective.value(q_point) < 0.0);

  CHECK(gradient_fd_error(inst, 6) <= 1e-5);

  CHECK_ERROR_CODE(make_odl(10, 5, 0.3, rng), ErrorCode::invalid_dims);
  CHECK_ERROR_CODE(make_odl(10, 200, 0.0, rng), ErrorCode::invalid_dims);
}

TEST_CASE("recovery score counts matched columns up to sign and order") {
  Rng rng(2);
  const MatrixRM q = random_orthonormal(6, 6, rng);
  CHECK(recovery_score(q, q) == doctest::Approx(1.0));

  // Signed permutation of the columns is a perfect recovery.
  MatrixRM shuffled(6, 6);
  const int perm[6] = {3, 0, 5, 1, 4, 2};
  for (int j = 0; j < 6; ++j)
    shuffled.col(j) = (j % 2 == 0 ? 1.0 : -1.0) * q.col(perm[j]);
  CHECK(recovery_score(shuffled, q) == doctest::Approx(1.0));

  MatrixRM negated = q;
  negated.col(2) *= -1.0;
  CHECK(recovery_score(negated, q) == doctest::Approx(1.0));

  double unrelated = 0.0;
  for (int t = 0; t < 10; ++t) {
    unrelated += recovery_score(random_orthonormal(30, 30, rng),
                                random_orthonormal(30, 30, rng));
  }
  CHECK(unrelated / 10.0 < 0.2);

  CHECK_ERROR_CODE(recovery_score(MatrixRM::Identity(4, 3), q),
                   ErrorCode::dimension_mismatch);
}

TEST_CASE("instances are reproducible and fill in kind defaults") {
  InstanceSpec spec;
  spec.problem = "odl";
  spec.n = 8;
  Rng r1(42), r2(42);
  const BenchInstance a = make_instance(spec, r1);
  const BenchInstance b = make_instance(spec, r2);
  CHECK(a.data_y.rows() == 800);  // 100 n observations when unset
  CHECK(a.param == 0.3);
  CHECK((a.data_y - b.data_y).norm() == 0.0);
  CHECK((a.x0.data - b.x0.data).norm() == 0.0);

  spec.problem = "ncm";
  spec.p = 2;
  Rng r3(1);
  CHECK(make_instance(spec, r3).param == 0.1);

  spec.problem = "qap";
  CHECK_ERROR_CODE(make_instance(spec, r3), ErrorCode::config_error);
}

TEST_CASE("config parsing applies defaults and rejects malformed input") {
  const BenchConfig config = parse_bench_config(R"({
    "instances": [{"problem": "nep", "n": 50, "p": 4, "alpha": 2.0}],
    "solvers": ["lbfgs", "tr"],
    "beta": "auto",
    "seed": 7,
    "gtol": 1e-6,
    "max_iter": 500,
    "output": "runs.csv"
  })");
  REQUIRE(config.instances.size() == 1);
  CHECK(config.instances[0].problem == "nep");
  CHECK(config.instances[0].n == 50);
  CHECK(config.instances[0].alpha == 2.0);
  CHECK((config.solvers == std::vector<std::string>{"lbfgs", "tr"}));
  CHECK(config.beta.is_auto);
  CHECK(config.seed == 7);
  CHECK(config.gtol == 1e-6);
  CHECK(config.max_iter == 500);
  CHECK(config.output == "runs.csv");

  const BenchConfig defaults = parse_bench_config(
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2}],
          "solvers": ["cg"], "beta": 2.5})");
  CHECK(defaults.seed == 42);
  CHECK(defaults.gtol == 1e-5);
  CHECK(defaults.max_iter == 10000);
  CHECK(defaults.output.empty());
  CHECK_FALSE(defaults.beta.is_auto);
  CHECK(defaults.beta.value == 2.5);

  const char* bad[] = {
      "{not json",
      R"({"solvers": ["lbfgs"]})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2}]})",
      R"({"instances": [], "solvers": ["lbfgs"]})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2}], "solvers": ["sgd"]})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2}], "solvers": ["lbfgs"], "beta": "fast"})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2}], "solvers": ["lbfgs"], "typo": 1})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2, "theta": 3.0}], "solvers": ["lbfgs"]})",
      R"({"instances": [{"problem": "ncm", "n": 10, "p": 2, "m": -5}], "solvers": ["lbfgs"]})",
      R"({"instances": [{"problem": "ncm", "n": 0, "p": 2}], "solvers": ["lbfgs"]})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_ERROR_CODE(parse_bench_config(text), ErrorCode::config_error);
  }
}

TEST_CASE("bench runs produce one well-formed record per pairing") {
  const std::vector<BenchRecord> records = run_bench(tiny_config());
  REQUIRE(records.size() == 6);
  for (const BenchRecord& r : records) {
    CHECK((r.problem == "ncm" || r.problem == "nep"));
    CHECK(r.beta > 0.0);
    CHECK(r.iter >= 0);
    CHECK(r.eval_f > 0);
    CHECK(r.time_s >= 0.0);
    if (r.status == "Converged") {
      CHECK(r.stat <= 1e-5);
      CHECK(r.feas <= 1e-8);
    }
  }
  // Records come out instance-major in config order.
  CHECK(records[0].problem == "ncm");
  CHECK(records[0].solver == "lbfgs");
  CHECK(records[3].problem == "nep");
  CHECK(records[5].solver == "tr");
}

TEST_CASE("csv output is deterministic apart from wall time") {
  std::stringstream a, b;
  write_csv(run_bench(tiny_config()), a);
  write_csv(run_bench(tiny_config()), b);

  const std::string header = a.str().substr(0, a.str().find('\n'));
  CHECK(header ==
        "problem,solver,n,p,beta,fval,iter,eval_f,eval_grad,stat,feas,"
        "time_s,seed,status");
  CHECK(strip_time_column(a.str()) == strip_time_column(b.str()));
}

TEST_CASE("bench writes the requested output files") {
  namespace fs = std::filesystem;
  const fs::path csv =
      fs::temp_directory_path() / "dissolve_bench_test_output.csv";
  const fs::path json = csv.parent_path() / "dissolve_bench_test_output.json";
  std::error_code ignored;
  fs::remove(csv, ignored);
  fs::remove(json, ignored);

  BenchConfig config = tiny_config();
  config.instances.resize(1);
  config.solvers = {"lbfgs"};
  config.output = csv.string();
  run_bench(config);

  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(json));
  const std::string csv_text = slurp(csv);
  CHECK(csv_text.rfind("problem,solver,", 0) == 0);

  const std::string json_text = slurp(json);
  CHECK(json_text.find("\"problem\"") != std::string::npos);
  CHECK(json_text.find("\"ncm\"") != std::string::npos);

  fs::remove(csv, ignored);
  fs::remove(json, ignored);
}

TEST_SUITE_END();
