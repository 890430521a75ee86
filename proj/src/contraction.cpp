#include "carnot/contraction.hpp"

#include "carnot/riemann.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace carnot {

namespace {

Matrix jacobian_with(ExtremalIntegrator& integrator, const Covector& h, const DensityOptions& opt) {
  const int n = static_cast<int>(h.size());
  const double delta = std::max(opt.fd_step * h.norm(), 1e-12);
  Matrix J(n, n);
  Covector hp = h;
  GroupPoint plus(n), minus(n);
  for (int j = 0; j < n; ++j) {
    hp(j) = h(j) + delta;
    integrator.run(hp.data(), 1.0, opt.steps, nullptr, plus.data());
    hp(j) = h(j) - delta;
    integrator.run(hp.data(), 1.0, opt.steps, nullptr, minus.data());
    hp(j) = h(j);
    J.col(j) = (plus - minus) / (2.0 * delta);
  }
  return J;
}

double density_with(ExtremalIntegrator& integrator, const Covector& h, const DensityOptions& opt) {
  return jacobian_with(integrator, h, opt).determinant();
}

struct SampleResult {
  bool accepted = false;
  int rejected = 0;
  Covector h;
  std::vector<double> n_req;  // per s_grid entry; +inf where D(sh) <= 0
};

}  // namespace

Matrix jacobian(const CarnotSpec& spec, const Covector& h, const DensityOptions& opt) {
  if (h.size() != spec.dim()) throw std::invalid_argument("jacobian: covector has wrong dimension");
  if (!(opt.fd_step > 0)) throw std::invalid_argument("jacobian: fd_step must be positive");
  ExtremalIntegrator integrator(spec);
  return jacobian_with(integrator, h, opt);
}

double density(const CarnotSpec& spec, const Covector& h, const DensityOptions& opt) {
  return jacobian(spec, h, opt).determinant();
}

DensityProfile scaled_density_profile(const CarnotSpec& spec, const Covector& h, const std::vector<double>& s_grid,
                                      const DensityOptions& opt) {
  if (h.size() != spec.dim()) throw std::invalid_argument("scaled_density_profile: covector has wrong dimension");
  ExtremalIntegrator integrator(spec);
  DensityProfile prof;
  prof.h = h;
  const int n = spec.dim();
  for (double s : s_grid) {
    if (!(s > 0 && s <= 1)) throw std::invalid_argument("scaled_density_profile: s must lie in (0, 1]");
    const double D = density_with(integrator, Covector(s * h), opt);
    if (!(D > 0)) {
      prof.truncated = true;
      continue;
    }
    prof.s.push_back(s);
    prof.D.push_back(D);
    prof.scaled.push_back(std::pow(s, n) * D);
  }
  return prof;
}

SlopeEstimate vanishing_order(const DensityProfile& profile) {
  SlopeEstimate est;
  if (profile.s.empty()) {
    est.degenerate = true;
    return est;
  }
  const double s_min = *std::min_element(profile.s.begin(), profile.s.end());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < profile.s.size(); ++i) {
    if (profile.s[i] <= 10.0 * s_min * (1 + 1e-12) && profile.D[i] > 0) {
      x.push_back(std::log(profile.s[i]));
      y.push_back(std::log(profile.D[i]));
    }
  }
  est.points = static_cast<int>(x.size());
  if (est.points < 5) {
    est.degenerate = true;
    return est;
  }
  const double k = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  est.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - est.slope * (x[i] - mx);
    rss += r * r;
  }
  est.std_error = std::sqrt(rss / (k - 2.0) / sxx);
  return est;
}

double required_exponent_from(int n, double D_h, double D_sh, double s) {
  if (!(s > 0 && s < 1)) throw std::domain_error("required_exponent: s must lie in (0, 1)");
  if (!(D_h > 0) || !(D_sh > 0)) throw std::domain_error("required_exponent: densities must be positive");
  return n + std::log(D_sh / D_h) / std::log(s);
}

double required_exponent(const CarnotSpec& spec, const Covector& h, double s, const DensityOptions& opt) {
  if (!(s > 0 && s < 1)) throw std::domain_error("required_exponent: s must lie in (0, 1)");
  ExtremalIntegrator integrator(spec);
  const double D_h = density_with(integrator, h, opt);
  const double D_sh = density_with(integrator, Covector(s * h), opt);
  return required_exponent_from(spec.dim(), D_h, D_sh, s);
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0) || !(hi > lo)) throw std::invalid_argument("geometric_grid: need 0 < lo < hi, points >= 2");
  std::vector<double> g(points);
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_s_grid() { return geometric_grid(1e-3, 0.9, 25); }

McpReport estimate_curvature_exponent(const CarnotSpec& spec, const SamplerConfig& config,
                                      const std::vector<double>& s_grid, std::uint64_t seed, double N_tested,
                                      Execution exec) {
  if (config.samples < 1) throw std::invalid_argument("estimate_curvature_exponent: samples must be >= 1");
  for (double s : s_grid) {
    if (!(s > 0 && s < 1)) throw std::invalid_argument("estimate_curvature_exponent: s_grid must lie in (0, 1)");
  }
  const int n = spec.dim();
  const int m = spec.rank();
  std::vector<SampleResult> results(config.samples);

  auto run_sample = [&](ExtremalIntegrator& integrator, int i) {
    auto eng = stream_engine(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> box(-config.beta, config.beta);
    SampleResult& r = results[i];
    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
      Covector h(n);
      for (int a = 0; a < m; ++a) h(a) = normal(eng);
      const double norm = h.head(m).norm();
      if (!(norm > 0)) {
        ++r.rejected;
        continue;
      }
      h.head(m) /= norm;
      for (int a = m; a < n; ++a) h(a) = box(eng);
      const double D_h = density_with(integrator, h, config.density);
      if (!(D_h > config.density_threshold)) {
        ++r.rejected;
        continue;
      }
      r.accepted = true;
      r.h = h;
      r.n_req.resize(s_grid.size());
      for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double D_sh = density_with(integrator, Covector(s_grid[k] * h), config.density);
        r.n_req[k] = (D_sh > 0) ? required_exponent_from(n, D_h, D_sh, s_grid[k])
                                : std::numeric_limits<double>::infinity();
      }
      return;
    }
  };

  if (exec == Execution::serial) {
    ExtremalIntegrator integrator(spec);
    for (int i = 0; i < config.samples; ++i) run_sample(integrator, i);
  } else {
#pragma omp parallel
    {
      ExtremalIntegrator integrator(spec);
#pragma omp for schedule(dynamic, 1)
      for (int i = 0; i < config.samples; ++i) run_sample(integrator, i);
    }
  }

  McpReport rep;
  rep.group = spec.name();
  rep.N_tested = N_tested;
  rep.seed = seed;
  rep.tolerance = config.tolerance;
  bool any = false;
  for (const auto& r : results) {
    rep.rejected += r.rejected;
    if (!r.accepted) continue;
    ++rep.samples;
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
      const double v = r.n_req[k];
      if (!any || v > rep.sup_required_exponent) {
        rep.sup_required_exponent = v;
        rep.sup_h = r.h;
        rep.sup_s = s_grid[k];
        any = true;
      }
      if (v > N_tested + config.tolerance) rep.violations.push_back({r.h, s_grid[k], v});
    }
  }
  if (rep.samples == 0) throw std::runtime_error("estimate_curvature_exponent: every sample was rejected");
  return rep;
}

std::string McpReport::to_json() const {
  nlohmann::json j;
  j["group"] = group;
  j["N_tested"] = N_tested;
  j["samples"] = samples;
  j["rejected"] = rejected;
  j["sup_required_exponent"] = sup_required_exponent;
  j["estimate_kind"] = "density-level lower estimate";
  j["tolerance"] = tolerance;
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : violations) {
    viol.push_back({{"h", std::vector<double>(v.h.data(), v.h.data() + v.h.size())}, {"s", v.s}, {"N_req", v.N_req}});
  }
  j["violations"] = viol;
  j["seed"] = seed;
  return j.dump(2);
}

int theorem2_bound(const CarnotSpec& spec) { return homogeneous_dimension(spec) + spec.dim() - spec.rank(); }

double mcp_weight(double K, double N, double d, double s) {
  if (!(N > 1)) throw std::domain_error("mcp_weight: N must exceed 1");
  if (!(s >= 0 && s <= 1)) throw std::domain_error("mcp_weight: s must lie in [0, 1]");
  if (K > 0 && !(d < std::numbers::pi * std::sqrt((N - 1) / K))) {
    throw std::domain_error("mcp_weight: d must be below pi*sqrt((N-1)/K) for K > 0");
  }
  if (s == 0) return 0.0;
  if (K == 0 || d == 0) return std::pow(s, N);
  const double r = std::sqrt(N - 1);
  return s * std::pow(s_K(K, s * d / r) / s_K(K, d / r), N - 1);
}

}  // namespace carnot
