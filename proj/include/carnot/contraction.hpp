#pragma once

#include "carnot/geodesic.hpp"
#include "carnot/lie_core.hpp"
#include "carnot/parallel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

/// Knobs for Jacobians of the exponential map.
struct DensityOptions {
  double fd_step = 1e-5;  // relative to |h|, with an absolute floor of 1e-12
  int steps = kDefaultSteps;
};

/// dPsi/dh by central differences of exp_map.
Matrix jacobian(const CarnotSpec& spec, const Covector& h, const DensityOptions& opt = {});

/// D(h) = det(dPsi/dh), signed.
double density(const CarnotSpec& spec, const Covector& h, const DensityOptions& opt = {});

struct DensityProfile {
  Covector h;
  std::vector<double> s;
  std::vector<double> D;         // D(s h)
  std::vector<double> scaled;    // s^n D(s h)
  bool truncated = false;        // some grid points had D <= 0 and were dropped
};

DensityProfile scaled_density_profile(const CarnotSpec& spec, const Covector& h, const std::vector<double>& s_grid,
                                      const DensityOptions& opt = {});

struct SlopeEstimate {
  double slope = 0.0;
  double std_error = 0.0;
  int points = 0;
  bool degenerate = false;  // fewer than 5 positive samples in the smallest decade
};

/// Least-squares slope of ln D(sh) against ln s over [s_min, 10 s_min].
SlopeEstimate vanishing_order(const DensityProfile& profile);

/// N_req = n + ln(D(sh)/D(h)) / ln s. Throws std::domain_error for s outside
/// (0, 1) or nonpositive densities.
double required_exponent(const CarnotSpec& spec, const Covector& h, double s, const DensityOptions& opt = {});
double required_exponent_from(int n, double D_h, double D_sh, double s);

struct SamplerConfig {
  int samples = 1000;
  double beta = 3.0;                 // higher layers uniform in [-beta, beta]
  double density_threshold = 1e-10;  // reject D(h) <= threshold
  int max_attempts = 100;            // draws per sample before giving up
  double tolerance = 1e-3;           // violation iff N_req > N + tolerance
  DensityOptions density;
};

struct McpViolation {
  Covector h;
  double s = 0.0;
  double N_req = 0.0;
};

struct McpReport {
  std::string group;
  double N_tested = 0.0;
  int samples = 0;
  int rejected = 0;
  double sup_required_exponent = 0.0;
  Covector sup_h;
  double sup_s = 0.0;
  std::vector<McpViolation> violations;
  std::uint64_t seed = 0;
  double tolerance = 0.0;

  bool pass() const { return violations.empty(); }
  std::string to_json() const;
};

/// Geometric grid from 1e-3 to 0.9 with 25 points.
std::vector<double> default_s_grid();
std::vector<double> geometric_grid(double lo, double hi, int points);

/// Draws h^1 uniform on the unit sphere of V_1, higher layers uniform in
/// [-beta, beta]; redraws while D(h) <= threshold (each redraw counted).
/// Sample i uses stream_engine(seed, i) only, so results do not depend on
/// the execution mode or thread count. Throws std::runtime_error if every
/// sample was rejected.
McpReport estimate_curvature_exponent(const CarnotSpec& spec, const SamplerConfig& config,
                                      const std::vector<double>& s_grid, std::uint64_t seed, double N_tested,
                                      Execution exec = Execution::parallel);

/// D + n - m.
int theorem2_bound(const CarnotSpec& spec);

/// s (s_K(s d/sqrt(N-1)) / s_K(d/sqrt(N-1)))^{N-1}.
double mcp_weight(double K, double N, double d, double s);

}  // namespace carnot
