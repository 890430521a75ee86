#pragma once

#include "carnot/parallel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>

/// Closed forms for the first Heisenberg group H1 with X = d_x - y/2 d_z,
/// Y = d_y + x/2 d_z and the eps-Riemannian family that adds eps^2 p_z^2 to
/// the Hamiltonian. Covectors p = (p_x, p_y, p_z) are initial momenta at the
/// origin; cylindrical covectors are (theta, rho, p_z).
namespace carnot::heisenberg {

using Vec3 = Eigen::Vector3d;

struct FlowState {
  Vec3 position;
  Vec3 momentum;  // (p_x, p_y, p_z)(t)
};

/// Position at time t of the geodesic with initial covector p.
Vec3 flow(const Vec3& p, double t, double eps = 0.0);
FlowState flow_state(const Vec3& p, double t, double eps = 0.0);

/// Right-hand side of the Hamiltonian system at (x, p).
FlowState hamiltonian_rhs(const Vec3& x, const Vec3& p, double eps = 0.0);

struct CylPoint {
  double e_rho;
  double e_z;
};

/// e_rho = rho |sin(p/2)/(p/2)|, e_z = eps^2 p + rho^2/(2p) (1 - sin(p)/p).
CylPoint exp_cyl(double rho, double pz, double eps = 0.0);

/// eps^2 sin(p/2)/(p/2) + (2 rho^2/p^3)(sin(p/2) - (p/2) cos(p/2)).
double jac_cyl(double rho, double pz, double eps = 0.0);

/// sin(l)/l and sin(l) - l cos(l) on (0, pi]; std::domain_error outside.
double h_fun(double lambda);
double k_fun(double lambda);

/// Left side minus right side of
///   s^3 rho h(s p/2) Jac(s rho, s p) >= s^5 rho h(p/2) Jac(rho, p).
double pointwise_mcp_check(double rho, double pz, double s, double eps = 0.0);

/// Sub-Riemannian distance from the origin (eps = 0 only), by bisection on
/// the monotone ratio e_z/e_rho^2 over p in (0, 2 pi).
double distance_origin(const Vec3& point, double eps = 0.0);

/// c with d(0, flow(p, 1)) >= c * rho for every covector in the chart
/// |p_z| < 2 pi (includes a 1% safety margin).
double chart_radius_constant();

/// Region A of the group, as a predicate on endpoints.
struct SetSpec {
  enum class Kind { annulus, box };
  Kind kind = Kind::annulus;
  double r_in = 0.5;
  double r_out = 1.0;
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  static SetSpec annulus(double r_in, double r_out);
  static SetSpec box(const Vec3& lo, const Vec3& hi);
  /// {"type": "annulus", "r_in", "r_out"} or {"type": "box", "min": [3], "max": [3]}.
  /// Throws std::invalid_argument on malformed input.
  static SetSpec from_json(std::string_view text);
  std::string to_json() const;

  bool contains(const Vec3& point) const;
  /// Upper bound for d(0, x) over the set.
  double max_distance() const;
};

struct MonteCarloReport {
  SetSpec set;
  double s = 1.0;
  double N = 5.0;
  double eps = 0.0;
  long long samples = 0;
  long long hits = 0;
  double vol_A = 0.0;
  double vol_As = 0.0;
  double ratio = 0.0;       // vol(A_s) / (s^N vol(A))
  double std_error = 0.0;   // delta-method standard error of ratio
  double rel_std_error = 0.0;
  bool empty = false;
  std::uint64_t seed = 0;

  /// ratio >= 1 - 3 rel_std_error.
  bool pass() const { return !empty && ratio >= 1.0 - 3.0 * rel_std_error; }
  std::string to_json() const;
};

inline constexpr int kMonteCarloBlock = 4096;

/// Uniform covector sampling on theta in [0, 2pi), rho in [0, rho_max],
/// p_z in (-2pi, 2pi), weighted by rho h(p/2) |Jac|; A_s is the image of the
/// scaled covectors s p. Block b of 4096 samples uses stream_engine(seed, b),
/// and block sums are combined in block order, so serial and parallel runs
/// agree bit for bit. Throws std::invalid_argument for s outside (0, 1] or
/// fewer than 1000 samples.
MonteCarloReport mcp_monte_carlo(const SetSpec& set, double s, double N, long long n_samples, double eps,
                                 std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace carnot::heisenberg
