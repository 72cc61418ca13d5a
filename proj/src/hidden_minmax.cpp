// Copyright 2026 The atmg-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "atmg/hidden_minmax.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace atmg {

Eigen::VectorXd Box::project(const Eigen::VectorXd& z) const {
  return z.cwiseMax(lo).cwiseMin(hi);
}

double Box::linear_max(const Eigen::VectorXd& direction,
                       const Eigen::VectorXd& at) const {
  double total = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double best = direction(i) >= 0.0 ? hi(i) : lo(i);
    total += direction(i) * (best - at(i));
  }
  return total;
}

double maximizer_holder_constant(const HiddenConcaveProblem& p) {
  const double diam_x = p.x_set.diameter();
  const double diam_u = p.diam_u > 0.0 ? p.diam_u : p.y_set.diameter();
  return (2.0 * p.ell_H * std::sqrt(diam_x) +
          2.0 * std::sqrt(p.nu * (1.0 + 2.0 * p.ell_H) * p.L_c * diam_u +
                          2.0 * p.nu * p.L_c * p.L_H)) /
         (2.0 * p.nu);
}

double phi_holder_constant(const HiddenConcaveProblem& p) {
  return ((1.0 + p.L_c_inv) * std::sqrt(p.x_set.diameter()) +
          p.L_c_inv * maximizer_holder_constant(p)) *
         p.ell;
}

SaddleCertificate make_certificate(const HiddenConcaveProblem& problem,
                                   const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y) {
  SaddleCertificate cert;
  cert.x = x;
  cert.y = y;
  cert.deviation_x = problem.x_set.linear_max(-problem.grad_x(x, y), x);
  cert.deviation_y = problem.y_set.linear_max(problem.grad_y(x, y), y);
  return cert;
}

Eigen::VectorXd solve_inner_max(const HiddenConcaveProblem& problem,
                                const Eigen::VectorXd& x, double tol) {
  if (problem.y_star_exact) return problem.y_set.project(problem.y_star_exact(x));
  Eigen::VectorXd best_y;
  double best_value = -std::numeric_limits<double>::infinity();
  const int starts = 3;
  for (int k = 0; k < starts; ++k) {
    const double w = starts == 1 ? 0.5 : double(k) / (starts - 1);
    Eigen::VectorXd y = problem.y_set.lo +
                        w * (problem.y_set.hi - problem.y_set.lo);
    double value = problem.f(x, y);
    double eta = 1.0;
    for (long iter = 0; iter < 100000; ++iter) {
      const Eigen::VectorXd g = problem.grad_y(x, y);
      const double residual = (problem.y_set.project(y + g) - y).norm();
      if (residual < tol) break;
      bool moved = false;
      for (int back = 0; back < 60; ++back) {
        const Eigen::VectorXd y_next = problem.y_set.project(y + eta * g);
        const double value_next = problem.f(x, y_next);
        if (value_next >= value + 1e-4 * g.dot(y_next - y) - 1e-15) {
          y = y_next;
          value = value_next;
          eta = std::min(eta * 1.5, 1e3);
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) break;
    }
    if (value > best_value) {
      best_value = value;
      best_y = y;
    }
  }
  return best_y;
}

Eigen::VectorXd max_oracle_sga(const HiddenConcaveProblem& problem,
                               const Eigen::VectorXd& x, double zeta,
                               std::uint64_t seed,
                               const MaxOracleOptions& options) {
  ATMG_CHECK(zeta > 0.0, UsageError, "oracle accuracy must be positive");
  const double sigma_sq = options.sigma * options.sigma;
  double eta = 2.0 / (9.0 * problem.L);
  if (options.sigma > 0.0) {
    eta = std::min(eta, problem.L_c * problem.L_c * problem.nu * zeta /
                            (10.0 * problem.L * sigma_sq));
  }
  // e-folding times of the ascent: 9 L / (2 L_c^2 nu) under the smooth cap
  // and 10 L sigma^2 / (L_c^2 nu^2 zeta) under the variance-limited step,
  // times a log factor for the target accuracy
  const double base =
      5.0 * problem.L / (problem.L_c * problem.L_c * problem.nu) +
      (options.sigma > 0.0
           ? 10.0 * problem.L * sigma_sq /
                 (std::pow(problem.L_c, 4) * problem.nu * problem.nu * zeta)
           : 0.0);
  long iterations = static_cast<long>(
      std::ceil(base * std::log(1.0 + 1.0 / zeta)));
  iterations = std::max<long>(iterations, 10);
  iterations = std::min<long>(iterations, options.max_iterations);

  Eigen::VectorXd y = problem.y_set.project(
      0.5 * (problem.y_set.lo + problem.y_set.hi));
  for (long t = 0; t < iterations; ++t) {
    Eigen::VectorXd g = problem.grad_y(x, y);
    if (options.sigma > 0.0) {
      Eigen::VectorXd noise = Eigen::VectorXd::Zero(y.size());
      for (int j = 0; j < options.batch; ++j) {
        CounterRng rng(seed, std::uint64_t(t), std::uint64_t(j));
        for (int i = 0; i < y.size(); ++i) {
          noise(i) += options.sigma * rng.next_gaussian();
        }
      }
      g += noise / double(options.batch);
    }
    y = problem.y_set.project(y + eta * g);
  }
  return y;
}

SgdmaxSchedule sgdmax_schedule(const HiddenConcaveProblem& problem, double eps,
                               double sigma_sq, double budget_scale) {
  ATMG_CHECK(eps > 0.0, UsageError, "eps must be positive");
  SgdmaxSchedule s;
  s.eta_x = 0.25 / std::max(problem.ell, 1e-9);
  s.iterations = static_cast<long>(std::ceil(
      budget_scale / (problem.nu * problem.nu * eps * eps * eps)));
  s.iterations = std::max<long>(s.iterations, 10);
  s.iterations = std::min<long>(s.iterations, 200000);
  s.oracle_accuracy = problem.nu * eps * eps / (problem.ell * problem.ell);
  s.batch =
      std::max(1, static_cast<int>(std::ceil(4.5 * sigma_sq / (eps * eps))));
  return s;
}

SgdmaxResult sgdmax(const HiddenConcaveProblem& problem,
                    const SgdmaxSchedule& schedule,
                    const MaxOracleFn& max_oracle,
                    const StochasticGradX& grad_x_oracle, std::uint64_t seed) {
  ATMG_CHECK(schedule.eta_x > 0.0 && schedule.iterations >= 1, UsageError,
             "invalid schedule");
  SgdmaxResult out;
  Eigen::VectorXd x = problem.x_set.project(
      schedule.start ? *schedule.start
                     : 0.5 * (problem.x_set.lo + problem.x_set.hi));

  Eigen::VectorXd best_x = x, best_y;
  double best_dev = std::numeric_limits<double>::infinity();

  for (long t = 0; t < schedule.iterations; ++t) {
    const Eigen::VectorXd y =
        max_oracle(x, schedule.oracle_accuracy, seed ^ (0xabc0 + t));
    const SaddleCertificate cert = make_certificate(problem, x, y);
    const double dev = std::max(cert.deviation_x, cert.deviation_y);
    out.deviation_trace.push_back(dev);
    if (dev < best_dev) {
      best_dev = dev;
      best_x = x;
      best_y = y;
    }

    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (int j = 0; j < schedule.batch; ++j) {
      CounterRng rng(seed, std::uint64_t(t), std::uint64_t(j));
      g += grad_x_oracle(x, y, rng);
    }
    g /= double(schedule.batch);
    ATMG_CHECK(g.allFinite(), NumericError,
               "non-finite x-gradient at iteration " << t);
    x = problem.x_set.project(x - schedule.eta_x * g);
  }
  const Eigen::VectorXd y_final = max_oracle(
      x, schedule.oracle_accuracy, seed ^ (0xabc0 + schedule.iterations));
  const SaddleCertificate final_cert = make_certificate(problem, x, y_final);
  if (std::max(final_cert.deviation_x, final_cert.deviation_y) < best_dev) {
    best_dev = std::max(final_cert.deviation_x, final_cert.deviation_y);
    best_x = x;
    best_y = y_final;
  }

  out.x_star = best_x;
  out.y_star = best_y;
  out.certificate = make_certificate(problem, best_x, best_y);
  return out;
}

HolderCheckResult hidden_holder_check(
    const HiddenConcaveProblem& problem,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
    double inner_tol) {
  HolderCheckResult out;
  for (const auto& [x1, x2] : pairs) {
    const double dist = (x1 - x2).norm();
    if (dist < 1e-6) continue;  // degenerate pair
    const Eigen::VectorXd u1 =
        problem.c(solve_inner_max(problem, x1, inner_tol), x1);
    const Eigen::VectorXd u2 =
        problem.c(solve_inner_max(problem, x2, inner_tol), x2);
    const double ratio = (u1 - u2).norm() / std::sqrt(dist);
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.pairs_used;
  }
  return out;
}

namespace {

Eigen::VectorXd constant1(double v) {
  return Eigen::VectorXd::Constant(1, v);
}

HiddenConcaveProblem make_quadratic_problem() {
  HiddenConcaveProblem p;
  p.name = "quadratic";
  p.x_set = {constant1(-1.0), constant1(1.0)};
  p.y_set = p.x_set;
  p.nu = 2.0;
  p.f = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return 2.0 * x(0) * y(0) - y(0) * y(0);
  };
  p.grad_x = [](const Eigen::VectorXd&, const Eigen::VectorXd& y) {
    return constant1(2.0 * y(0));
  };
  p.grad_y = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return constant1(2.0 * x(0) - 2.0 * y(0));
  };
  p.c = [](const Eigen::VectorXd& y, const Eigen::VectorXd&) { return y; };
  p.c_inv = [](const Eigen::VectorXd& u, const Eigen::VectorXd&) { return u; };
  p.L = p.L_H = 5.0;
  p.ell = p.ell_H = 4.0;
  p.L_c = p.L_c_inv = 1.0;
  p.diam_u = 2.0;
  p.y_star_exact = [](const Eigen::VectorXd& x) { return x; };
  return p;
}

HiddenConcaveProblem make_sine_affine_problem() {
  HiddenConcaveProblem p;
  p.name = "sine-affine";
  p.x_set = {constant1(-1.0), constant1(1.0)};
  p.y_set = p.x_set;
  p.nu = 1.0;
  auto u_of = [](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    return y(0) + 0.1 * x(0);
  };
  p.f = [u_of](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double u = u_of(y, x);
    return std::sin(3.0 * x(0)) * u - 0.5 * u * u;
  };
  p.grad_x = [u_of](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double u = u_of(y, x);
    return constant1(3.0 * std::cos(3.0 * x(0)) * u +
                     0.1 * (std::sin(3.0 * x(0)) - u));
  };
  p.grad_y = [u_of](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return constant1(std::sin(3.0 * x(0)) - u_of(y, x));
  };
  p.c = [](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    return constant1(y(0) + 0.1 * x(0));
  };
  p.c_inv = [](const Eigen::VectorXd& u, const Eigen::VectorXd& x) {
    return constant1(u(0) - 0.1 * x(0));
  };
  p.L = p.L_H = 4.5;
  p.ell = p.ell_H = 11.0;
  p.L_c = p.L_c_inv = 1.0;
  p.diam_u = 2.2;
  return p;
}

}  // namespace

HiddenConcaveProblem make_hidden_test_problem(const std::string& name) {
  if (name == "quadratic") return make_quadratic_problem();
  if (name == "sine-affine") return make_sine_affine_problem();
  throw UsageError("unknown hidden test problem: " + name);
}

std::vector<std::string> hidden_test_problem_names() {
  return {"quadratic", "sine-affine"};
}

std::vector<MinmaxSuiteRow> run_minmax_suite(double eps, std::uint64_t seed) {
  std::vector<MinmaxSuiteRow> rows;
  for (const std::string& name : hidden_test_problem_names()) {
    const HiddenConcaveProblem p = make_hidden_test_problem(name);
    SgdmaxSchedule schedule;
    schedule.eta_x = 0.25 / p.ell;
    schedule.iterations = 500;
    schedule.batch = 1;
    schedule.oracle_accuracy = p.nu * eps * eps / (p.ell * p.ell);
    schedule.start = constant1(0.8);
    const SgdmaxResult result = sgdmax(
        p, schedule,
        [&p](const Eigen::VectorXd& x, double zeta, std::uint64_t s) {
          return max_oracle_sga(p, x, zeta, s);
        },
        [&p](const Eigen::VectorXd& x, const Eigen::VectorXd& y, CounterRng&) {
          return p.grad_x(x, y);
        },
        seed);
    MinmaxSuiteRow row;
    row.problem = name;
    row.deviation_x = result.certificate.deviation_x;
    row.deviation_y = result.certificate.deviation_y;
    row.target = eps;
    row.pass = row.deviation_x <= eps && row.deviation_y <= eps;
    rows.push_back(row);
  }
  return rows;
}

void write_minmax_suite_csv(const std::vector<MinmaxSuiteRow>& rows,
                            const std::string& path) {
  std::ofstream out(path);
  ATMG_CHECK(out.good(), ParseError, "cannot open for writing: " << path);
  out << "problem,deviation_x,deviation_y,target,pass\n";
  out.precision(17);
  for (const MinmaxSuiteRow& row : rows) {
    out << row.problem << "," << row.deviation_x << "," << row.deviation_y
        << "," << row.target << "," << (row.pass ? "pass" : "fail") << "\n";
  }
}

Eigen::MatrixXd AtmgHiddenProblem::map_to_measure(
    const std::vector<AgentPolicy>& team, const AgentPolicy& y) const {
  return exact_visitation(*spec, {team, y}).lambda;
}

AgentPolicy AtmgHiddenProblem::map_to_policy(
    const Eigen::MatrixXd& lambda) const {
  AgentPolicy y(lambda.rows(), lambda.cols());
  for (int s = 0; s < lambda.rows(); ++s) {
    const double row = lambda.row(s).sum();
    ATMG_CHECK(row > 0.0, NumericError,
               "visitation row sum vanished; rho must be full-support");
    y.row(s) = lambda.row(s) / row;
  }
  return y;
}

double AtmgHiddenProblem::hidden_objective(
    const std::vector<AgentPolicy>& team, const Eigen::MatrixXd& lambda) const {
  const Eigen::MatrixXd rx = adversary_reward_matrix(*spec, team);
  return (rx.array() * lambda.array()).sum() - 0.5 * nu * lambda.squaredNorm();
}

double AtmgHiddenProblem::objective(const std::vector<AgentPolicy>& team,
                                    const AgentPolicy& y) const {
  return exact_regularized_value(*spec, {team, y}, nu);
}

AtmgHiddenProblem atmg_as_hidden_problem(const GameSpec& spec, double nu) {
  ATMG_CHECK(nu > 0.0, UsageError,
             "hidden reformulation requires nu > 0 for strong concavity");
  AtmgHiddenProblem problem;
  problem.spec = &spec;
  problem.nu = nu;
  return problem;
}

}  // namespace atmg
