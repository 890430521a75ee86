#pragma once

#include "carnot/lie_core.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace carnot {

inline constexpr int kDefaultSteps = 1000;

/// Right-hand side of the Euler-Arnold system for the layered momentum:
///   dh_a/dt = <h, [u, v_a]>,  u = sum_i h^1_i e_i^1,
/// i.e. dh^l/dt = sum_k h^{l+1}_k A_k^{1l} h^1 and dh^s/dt = 0.
Covector euler_arnold_rhs(const CarnotSpec& spec, const Covector& h);

/// Time samples of a normal extremal starting at the identity.
struct GeodesicPath {
  std::vector<double> t;
  std::vector<AlgebraVector> c;  // exponential coordinates of the curve
  std::vector<Covector> h;       // momentum; the control is h^1
  std::vector<double> u_norm;    // |h^1(t)|

  int steps() const { return static_cast<int>(t.size()) - 1; }
  const GroupPoint& endpoint() const { return c.back(); }
  /// max_t | |u(t)| - |u(0)| |.
  double speed_drift() const;
};

/// Reusable RK4 integrator for the coupled system
///   dh/dt = euler_arnold(h),   dc/dt = B(c)^{-1} u(h),
/// holding its own scratch buffers. Not thread-safe; use one per worker.
/// The spec must outlive the integrator and have an orthonormal first layer.
class ExtremalIntegrator {
public:
  using Observer = std::function<void(int node, double t, const double* h, const double* c)>;

  explicit ExtremalIntegrator(const CarnotSpec& spec);

  /// Integrates on [0, T] with `steps` equal RK4 steps. h_out/c_out receive
  /// the terminal state (length n each). observer, if set, sees every node.
  void run(const double* h0, double T, int steps, double* h_out, double* c_out,
           const Observer* observer = nullptr);

  GroupPoint endpoint(const Covector& h0, double T = 1.0, int steps = kDefaultSteps);

  const CarnotSpec& spec() const { return *spec_; }

private:
  struct Coupling {
    int first;   // index in V_1 (control component)
    int target;  // derivative component
    int source;  // momentum component
    double coeff;
  };

  void rhs(const double* h, const double* c, double* dh, double* dc);
  void dexpinv_solve_into(const double* c, const double* rhs, double* x);

  const CarnotSpec* spec_;
  int n_;
  int m_;
  int s_;
  std::vector<Coupling> couplings_;
  std::vector<double> dexp_coeff_;  // (-1)^k/(k+1)!, k = 0..s-1
  std::vector<double> buf_;
};

/// RK4 integration of the normal extremal with initial momentum h0 on [0, T],
/// recording every node. Throws std::invalid_argument for steps < 1 or T <= 0.
GeodesicPath integrate_normal_extremal(const CarnotSpec& spec, const Covector& h0, double T, int steps);

/// Psi(h) = c_h(1).
GroupPoint exp_map(const CarnotSpec& spec, const Covector& h0, int steps = kDefaultSteps);

/// Trapezoid-rule integral of |u(t)|.
double path_length(const GeodesicPath& path);

/// One row per derivative order l = 1..L of c at t = 0.
struct LayerOrderEntry {
  int order = 0;
  double forbidden_norm = 0.0;    // norm of the components that must vanish
  double derivative_norm = 0.0;   // norm of the full fitted derivative
  double tolerance = 0.0;
  bool pass = true;
};

struct LayerOrderReport {
  std::vector<LayerOrderEntry> orders;
  double condition_number = 0.0;
  bool ill_conditioned = false;

  bool pass() const;
  double max_forbidden() const;
};

/// Fits a degree-L polynomial to c(t) on [0, t_max] (uniform nodes) and checks
/// c'(0) in V_1 and c^(l)(0) in V_1 + ... + V_{l-1} for l >= 2.
LayerOrderReport taylor_layer_orders(const CarnotSpec& spec, const Covector& h0, int max_order = 6,
                                     double t_max = 1e-2, int nodes = 50);

/// CSV with header t,c_1..c_n,h_1..h_n,u_norm and 17 significant digits.
void write_curve_csv(std::ostream& out, const GeodesicPath& path);

}  // namespace carnot
