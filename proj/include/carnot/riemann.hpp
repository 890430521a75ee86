#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace carnot {

/// sin(sqrt(K) t)/sqrt(K), t, or sinh(sqrt(-K) t)/sqrt(-K).
/// Throws std::domain_error if K > 0 and t >= pi/sqrt(K).
double s_K(double K, double t);
/// d/dt s_K(K, t).
double s_K_prime(double K, double t);

/// Myers bound pi*sqrt((n-1)/K) on the cut time for Ric >= K > 0.
double myers_radius(double K, int n);

/// t -> R(t), an (n-1)x(n-1) symmetric curvature matrix along the geodesic.
using CurvatureFn = std::function<Eigen::MatrixXd(double)>;

/// R = (K/(n-1)) I: the model with Ric = K.
CurvatureFn constant_curvature_model(double K, int n);

struct JacobiSolution {
  int n = 0;  // manifold dimension; matrices are (n-1)x(n-1)
  std::vector<double> t;
  std::vector<Eigen::MatrixXd> J;
  std::vector<Eigen::MatrixXd> Jdot;
  std::vector<Eigen::MatrixXd> R;
  std::vector<double> D;  // det J
  bool has_cut = false;
  double t_cut = 0.0;     // first zero of D, if has_cut

  /// U = J' J^{-1}; requires D(t_k) != 0.
  Eigen::MatrixXd U(std::size_t k) const;
};

/// RK4 on J'' + R J = 0, J(0) = 0, J'(0) = I. Throws std::invalid_argument
/// when R(t) is not symmetric (1e-12) or the sizes do not match n - 1.
JacobiSolution jacobi_integrate(const CurvatureFn& curvature, int n, double T, int steps);

/// max_k |U' + U^2 + R|_F over nodes with D > 1e-8 (interior nodes only).
double riccati_residual(const JacobiSolution& sol);

/// Largest |U - U^T|_F where D > 1e-8.
double riccati_symmetry_defect(const JacobiSolution& sol);

struct ComparisonReport {
  double K = 0.0;
  int n = 0;
  double T = 0.0;
  std::vector<double> t;
  std::vector<double> D;
  /// sqrt(n-1) s_K'(t/sqrt(n-1))/s_K(t/sqrt(n-1)) - tr U, per node (D > 1e-8, t > 0).
  std::vector<double> log_derivative_margin;
  std::vector<double> margin_t;
  /// (n-1) ln[s_K(t/sqrt(n-1))/s_K(s t/sqrt(n-1))] - ln[D(t)/D(s t)]
  /// for s in weight_s; the weight inequality D(st)/D(t) >= (s_K ratio)^{n-1}.
  std::vector<double> weight_s;
  std::vector<std::vector<double>> weight_margin;
  std::vector<double> weight_t;
  double min_margin = 0.0;
  double max_abs_margin = 0.0;
  double riccati_residual = 0.0;
  bool has_cut = false;
  double t_cut = 0.0;

  std::string to_json() const;
};

/// Integrates the model and compares against the Ric >= K bounds on [0, T].
/// Nodes at or beyond the model radius pi/sqrt(K/(n-1)) are skipped for K > 0.
/// steps is rounded up to a multiple of 4.
ComparisonReport comparison_check(double K, int n, const CurvatureFn& model, double T, int steps = 4000);

/// t,D rows with 17 significant digits.
void write_determinant_csv(std::ostream& out, const JacobiSolution& sol);

}  // namespace carnot
