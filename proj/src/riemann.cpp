#include "carnot/riemann.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace carnot {

using Eigen::MatrixXd;

double s_K(double K, double t) {
  if (std::abs(K) * t * t < 1e-8) return t - K * t * t * t / 6.0;
  if (K > 0) {
    const double r = std::sqrt(K);
    if (std::abs(t) >= std::numbers::pi / r) throw std::domain_error("s_K: t must be below pi/sqrt(K) for K > 0");
    return std::sin(r * t) / r;
  }
  const double r = std::sqrt(-K);
  return std::sinh(r * t) / r;
}

double s_K_prime(double K, double t) {
  if (std::abs(K) * t * t < 1e-8) return 1.0 - K * t * t / 2.0;
  if (K > 0) return std::cos(std::sqrt(K) * t);
  return std::cosh(std::sqrt(-K) * t);
}

double myers_radius(double K, int n) {
  if (!(K > 0)) return std::numeric_limits<double>::infinity();
  return std::numbers::pi * std::sqrt((n - 1) / K);
}

CurvatureFn constant_curvature_model(double K, int n) {
  if (n < 2) throw std::invalid_argument("constant_curvature_model: n must be >= 2");
  const MatrixXd R = MatrixXd::Identity(n - 1, n - 1) * (K / (n - 1));
  return [R](double) { return R; };
}

MatrixXd JacobiSolution::U(std::size_t k) const {
  return J[k].transpose().partialPivLu().solve(Jdot[k].transpose()).transpose();
}

namespace {

MatrixXd checked_curvature(const CurvatureFn& curvature, double t, int d) {
  MatrixXd R = curvature(t);
  if (R.rows() != d || R.cols() != d) throw std::invalid_argument("curvature matrix must be (n-1)x(n-1)");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("curvature matrix is not symmetric at t = " + std::to_string(t));
  }
  return R;
}

double sigma_min_sq(const MatrixXd& J) {
  Eigen::JacobiSVD<MatrixXd> svd(J);
  const double s = svd.singularValues().minCoeff();
  return s * s;
}

}  // namespace

JacobiSolution jacobi_integrate(const CurvatureFn& curvature, int n, double T, int steps) {
  if (n < 2) throw std::invalid_argument("jacobi_integrate: n must be >= 2");
  if (steps < 1 || !(T > 0)) throw std::invalid_argument("jacobi_integrate: need steps >= 1 and T > 0");
  const int d = n - 1;
  const double dt = T / steps;
  JacobiSolution sol;
  sol.n = n;
  MatrixXd J = MatrixXd::Zero(d, d);
  MatrixXd P = MatrixXd::Identity(d, d);
  MatrixXd R0 = checked_curvature(curvature, 0.0, d);
  auto record = [&](double t, const MatrixXd& R) {
    sol.t.push_back(t);
    sol.J.push_back(J);
    sol.Jdot.push_back(P);
    sol.R.push_back(R);
    sol.D.push_back(J.determinant());
  };
  record(0.0, R0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const MatrixXd& Ra = sol.R.back();
    const MatrixXd Rm = checked_curvature(curvature, t + 0.5 * dt, d);
    const MatrixXd Rb = checked_curvature(curvature, (k + 1 == steps) ? T : t + dt, d);
    const MatrixXd k1J = P, k1P = -Ra * J;
    const MatrixXd k2J = P + 0.5 * dt * k1P, k2P = -Rm * (J + 0.5 * dt * k1J);
    const MatrixXd k3J = P + 0.5 * dt * k2P, k3P = -Rm * (J + 0.5 * dt * k2J);
    const MatrixXd k4J = P + dt * k3P, k4P = -Rb * (J + dt * k3J);
    J += dt / 6.0 * (k1J + 2.0 * k2J + 2.0 * k3J + k4J);
    P += dt / 6.0 * (k1P + 2.0 * k2P + 2.0 * k3P + k4P);
    record((k + 1 == steps) ? T : t + dt, Rb);
  }

  // First zero of det J: first local minimum of sigma_min(J)^2 that drops
  // below 1e-6, refined by the vertex of the parabola through three nodes.
  std::vector<double> sig(sol.t.size());
  for (std::size_t k = 0; k < sig.size(); ++k) sig[k] = sigma_min_sq(sol.J[k]);
  for (std::size_t k = 1; k + 1 < sig.size(); ++k) {
    if (sig[k] < 1e-6 && sig[k] <= sig[k - 1] && sig[k] <= sig[k + 1]) {
      const double a = sig[k - 1], b = sig[k], c = sig[k + 1];
      const double denom = a - 2.0 * b + c;
      const double shift = (denom > 0) ? 0.5 * (a - c) / denom : 0.0;
      sol.has_cut = true;
      sol.t_cut = sol.t[k] + shift * dt;
      break;
    }
  }
  return sol;
}

double riccati_residual(const JacobiSolution& sol) {
  const std::size_t K = sol.t.size();
  if (K < 5) return 0.0;
  const double dt = sol.t[1] - sol.t[0];
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < K; ++k) {
    if (!(std::abs(sol.D[k]) > 1e-8)) continue;
    const MatrixXd Jdd = (-sol.Jdot[k + 2] + 8.0 * sol.Jdot[k + 1] - 8.0 * sol.Jdot[k - 1] + sol.Jdot[k - 2]) / (12.0 * dt);
    const auto lu = sol.J[k].transpose().partialPivLu();
    const MatrixXd U = lu.solve(sol.Jdot[k].transpose()).transpose();
    const MatrixXd Uprime = lu.solve(Jdd.transpose()).transpose() - U * U;
    worst = std::max(worst, (Uprime + U * U + sol.R[k]).norm());
  }
  return worst;
}

double riccati_symmetry_defect(const JacobiSolution& sol) {
  double worst = 0.0;
  for (std::size_t k = 1; k < sol.t.size(); ++k) {
    if (!(std::abs(sol.D[k]) > 1e-8)) continue;
    const MatrixXd U = sol.U(k);
    worst = std::max(worst, (U - U.transpose()).norm());
  }
  return worst;
}

ComparisonReport comparison_check(double K, int n, const CurvatureFn& model, double T, int steps) {
  if (n < 2) throw std::invalid_argument("comparison_check: n must be >= 2");
  steps = std::max(4, (steps + 3) / 4 * 4);
  const JacobiSolution sol = jacobi_integrate(model, n, T, steps);
  ComparisonReport rep;
  rep.K = K;
  rep.n = n;
  rep.T = T;
  rep.t = sol.t;
  rep.D = sol.D;
  rep.has_cut = sol.has_cut;
  rep.t_cut = sol.t_cut;
  rep.riccati_residual = riccati_residual(sol);
  rep.weight_s = {0.25, 0.5, 0.75};
  rep.weight_margin.resize(rep.weight_s.size());

  const double root = std::sqrt(static_cast<double>(n - 1));
  const double radius = myers_radius(K, n);
  const double limit = std::min(radius, sol.has_cut ? sol.t_cut : std::numeric_limits<double>::infinity());
  bool any = false;
  auto note = [&](double m) {
    rep.min_margin = any ? std::min(rep.min_margin, m) : m;
    rep.max_abs_margin = std::max(rep.max_abs_margin, std::abs(m));
    any = true;
  };
  for (std::size_t k = 1; k < sol.t.size(); ++k) {
    const double t = sol.t[k];
    if (t >= limit || !(sol.D[k] > 1e-8)) continue;
    const double model_rate = root * s_K_prime(K, t / root) / s_K(K, t / root);
    const double m = model_rate - sol.U(k).trace();
    rep.margin_t.push_back(t);
    rep.log_derivative_margin.push_back(m);
    note(m);
  }
  for (std::size_t k = 4; k < sol.t.size(); k += 4) {
    const double t = sol.t[k];
    if (t >= limit || !(sol.D[k] > 1e-8)) continue;
    bool ok = true;
    std::vector<double> row;
    for (double s : rep.weight_s) {
      const std::size_t ks = static_cast<std::size_t>(std::llround(s * static_cast<double>(k)));
      if (!(sol.D[ks] > 1e-8)) {
        ok = false;
        break;
      }
      const double model = (n - 1) * std::log(s_K(K, t / root) / s_K(K, s * t / root));
      row.push_back(model - std::log(sol.D[k] / sol.D[ks]));
    }
    if (!ok) continue;
    rep.weight_t.push_back(t);
    for (std::size_t i = 0; i < row.size(); ++i) {
      rep.weight_margin[i].push_back(row[i]);
      note(row[i]);
    }
  }
  return rep;
}

std::string ComparisonReport::to_json() const {
  nlohmann::json j;
  j["K"] = K;
  j["n"] = n;
  j["T"] = T;
  j["t"] = t;
  j["D"] = D;
  j["margin_t"] = margin_t;
  j["log_derivative_margin"] = log_derivative_margin;
  j["weight_s"] = weight_s;
  j["weight_t"] = weight_t;
  j["weight_margin"] = weight_margin;
  j["min_margin"] = min_margin;
  j["max_abs_margin"] = max_abs_margin;
  j["riccati_residual"] = riccati_residual;
  j["t_cut"] = has_cut ? nlohmann::json(t_cut) : nlohmann::json(nullptr);
  return j.dump(2);
}

void write_determinant_csv(std::ostream& out, const JacobiSolution& sol) {
  out << "t,D\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < sol.t.size(); ++k) out << sol.t[k] << ',' << sol.D[k] << '\n';
  out.precision(old);
}

}  // namespace carnot
