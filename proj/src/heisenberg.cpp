#include "carnot/heisenberg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace carnot::heisenberg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesCut = 0.05;

// sin(a)/a
double sinc(double a) {
  if (std::abs(a) < kSeriesCut) {
    const double a2 = a * a;
    return 1.0 - a2 / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0 * (1.0 - a2 / 72.0)));
  }
  return std::sin(a) / a;
}

// (1 - cos a)/a
double versin_over(double a) {
  if (std::abs(a) < kSeriesCut) {
    const double a2 = a * a;
    return a / 2.0 * (1.0 - a2 / 12.0 * (1.0 - a2 / 30.0 * (1.0 - a2 / 56.0)));
  }
  return (1.0 - std::cos(a)) / a;
}

// (a - sin a)/a^2
double w_fun(double a) {
  if (std::abs(a) < kSeriesCut) {
    const double a2 = a * a;
    return a / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0 * (1.0 - a2 / 72.0)));
  }
  return (a - std::sin(a)) / (a * a);
}

// (sin l - l cos l)/l^3
double k_over_cube(double l) {
  if (std::abs(l) < kSeriesCut) {
    const double l2 = l * l;
    return 1.0 / 3.0 - l2 / 30.0 + l2 * l2 / 840.0 - l2 * l2 * l2 / 45360.0;
  }
  return (std::sin(l) - l * std::cos(l)) / (l * l * l);
}

// e_z / e_rho^2 for a unit-speed covector, p in (0, 2 pi).
double height_ratio(double p) {
  const double h = sinc(p / 2.0);
  return 0.5 * w_fun(p) / (h * h);
}

void check_monotone_ratio() {
  static const bool ok = [] {
    constexpr int kGrid = 10000;
    double prev = 0.0;
    for (int i = 1; i < kGrid; ++i) {
      const double v = height_ratio(2.0 * kPi * i / kGrid);
      if (!(v > prev)) return false;
      prev = v;
    }
    return true;
  }();
  if (!ok) throw std::runtime_error("distance_origin: e_z/e_rho^2 is not monotone on the grid");
}

}  // namespace

FlowState flow_state(const Vec3& p, double t, double eps) {
  const double px = p(0), py = p(1), pz = p(2);
  const double a = pz * t;
  const double c1 = versin_over(a);
  const double sn = sinc(a);
  const double rho2 = px * px + py * py;
  FlowState st;
  st.position << -py * t * c1 + px * t * sn, px * t * c1 + py * t * sn,
      eps * eps * pz * t + 0.5 * rho2 * t * t * w_fun(a);
  const double ca = std::cos(a), sa = std::sin(a);
  const double h1 = px * ca - py * sa;
  const double h2 = px * sa + py * ca;
  st.momentum << h1 + 0.5 * st.position(1) * pz, h2 - 0.5 * st.position(0) * pz, pz;
  return st;
}

Vec3 flow(const Vec3& p, double t, double eps) { return flow_state(p, t, eps).position; }

FlowState hamiltonian_rhs(const Vec3& x, const Vec3& p, double eps) {
  // H = (h1^2 + h2^2)/2 + eps^2 pz^2/2, h1 = px - y pz/2, h2 = py + x pz/2.
  const double h1 = p(0) - 0.5 * x(1) * p(2);
  const double h2 = p(1) + 0.5 * x(0) * p(2);
  FlowState d;
  d.position << h1, h2, -0.5 * x(1) * h1 + 0.5 * x(0) * h2 + eps * eps * p(2);
  d.momentum << -0.5 * p(2) * h2, 0.5 * p(2) * h1, 0.0;
  return d;
}

CylPoint exp_cyl(double rho, double pz, double eps) {
  if (rho < 0) throw std::domain_error("exp_cyl: rho must be nonnegative");
  return {rho * std::abs(sinc(pz / 2.0)), eps * eps * pz + 0.5 * rho * rho * w_fun(pz)};
}

double jac_cyl(double rho, double pz, double eps) {
  return eps * eps * sinc(pz / 2.0) + 0.25 * rho * rho * k_over_cube(pz / 2.0);
}

double h_fun(double lambda) {
  if (!(lambda > 0 && lambda <= kPi)) throw std::domain_error("h_fun: argument must lie in (0, pi]");
  return sinc(lambda);
}

double k_fun(double lambda) {
  if (!(lambda > 0 && lambda <= kPi)) throw std::domain_error("k_fun: argument must lie in (0, pi]");
  return std::sin(lambda) - lambda * std::cos(lambda);
}

double pointwise_mcp_check(double rho, double pz, double s, double eps) {
  if (!(s > 0 && s <= 1)) throw std::domain_error("pointwise_mcp_check: s must lie in (0, 1]");
  if (!(std::abs(pz) < 2.0 * kPi)) throw std::domain_error("pointwise_mcp_check: |p_z| must be below 2 pi");
  if (!(rho >= 0)) throw std::domain_error("pointwise_mcp_check: rho must be nonnegative");
  const double lhs = s * s * s * rho * sinc(s * pz / 2.0) * jac_cyl(s * rho, s * pz, eps);
  const double rhs = std::pow(s, 5) * rho * sinc(pz / 2.0) * jac_cyl(rho, pz, eps);
  return lhs - rhs;
}

double distance_origin(const Vec3& point, double eps) {
  if (eps != 0.0) throw std::invalid_argument("distance_origin: only the sub-Riemannian case eps = 0 is supported");
  const double r = std::hypot(point(0), point(1));
  const double z = std::abs(point(2));
  if (z == 0.0) return r;
  if (r == 0.0) return std::sqrt(4.0 * kPi * z);
  check_monotone_ratio();
  const double target = z / (r * r);
  double lo = 0.0, hi = 2.0 * kPi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (height_ratio(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double p = 0.5 * (lo + hi);
  const double h = sinc(p / 2.0);
  if (h > 0.5) return r / h;
  return std::sqrt(2.0 * z / w_fun(p));
}

double chart_radius_constant() {
  static const double c = [] {
    constexpr int kGrid = 20000;
    double best = 1.0;
    for (int i = 1; i < kGrid; ++i) {
      const double p = 2.0 * kPi * i / kGrid;
      const double v = std::max(sinc(p / 2.0), std::sqrt(4.0 * kPi * 0.5 * w_fun(p)));
      best = std::min(best, v);
    }
    return 0.99 * best;
  }();
  return c;
}

SetSpec SetSpec::annulus(double r_in, double r_out) {
  if (!(r_in >= 0 && r_out > r_in)) throw std::invalid_argument("annulus needs 0 <= r_in < r_out");
  SetSpec s;
  s.kind = Kind::annulus;
  s.r_in = r_in;
  s.r_out = r_out;
  return s;
}

SetSpec SetSpec::box(const Vec3& lo, const Vec3& hi) {
  if (!((hi - lo).minCoeff() > 0)) throw std::invalid_argument("box needs min < max in every coordinate");
  SetSpec s;
  s.kind = Kind::box;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SetSpec SetSpec::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    if (type == "annulus") {
      for (const auto& [k, _] : j.items()) {
        if (k != "type" && k != "r_in" && k != "r_out") throw std::invalid_argument("unknown key '" + k + "' in set spec");
      }
      return annulus(j.at("r_in").get<double>(), j.at("r_out").get<double>());
    }
    if (type == "box") {
      for (const auto& [k, _] : j.items()) {
        if (k != "type" && k != "min" && k != "max") throw std::invalid_argument("unknown key '" + k + "' in set spec");
      }
      const auto lo = j.at("min").get<std::vector<double>>();
      const auto hi = j.at("max").get<std::vector<double>>();
      if (lo.size() != 3 || hi.size() != 3) throw std::invalid_argument("box min/max need 3 entries");
      return box(Vec3(lo[0], lo[1], lo[2]), Vec3(hi[0], hi[1], hi[2]));
    }
    throw std::invalid_argument("set type must be \"annulus\" or \"box\"");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad set spec: ") + e.what());
  }
}

std::string SetSpec::to_json() const {
  nlohmann::json j;
  if (kind == Kind::annulus) {
    j = {{"type", "annulus"}, {"r_in", r_in}, {"r_out", r_out}};
  } else {
    j = {{"type", "box"}, {"min", {lo(0), lo(1), lo(2)}}, {"max", {hi(0), hi(1), hi(2)}}};
  }
  return j.dump();
}

bool SetSpec::contains(const Vec3& point) const {
  if (kind == Kind::box) {
    return (point.array() > lo.array()).all() && (point.array() < hi.array()).all();
  }
  const double d = distance_origin(point);
  return d > r_in && d < r_out;
}

double SetSpec::max_distance() const {
  if (kind == Kind::annulus) return r_out;
  double r = 0.0, z = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const double x = (corner & 1) ? hi(0) : lo(0);
    const double y = (corner & 2) ? hi(1) : lo(1);
    const double zz = (corner & 4) ? hi(2) : lo(2);
    r = std::max(r, std::hypot(x, y));
    z = std::max(z, std::abs(zz));
  }
  return r + std::sqrt(4.0 * kPi * z);
}

namespace {

struct BlockSums {
  long long count = 0;
  long long hits = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
};

}  // namespace

MonteCarloReport mcp_monte_carlo(const SetSpec& set, double s, double N, long long n_samples, double eps,
                                 std::uint64_t seed, Execution exec) {
  if (!(s > 0 && s <= 1)) throw std::invalid_argument("mcp_monte_carlo: s must lie in (0, 1]");
  if (n_samples < 1000) throw std::invalid_argument("mcp_monte_carlo: need at least 1000 samples");
  const double rho_max = set.max_distance() / chart_radius_constant();
  const double box_vol = 2.0 * kPi * rho_max * 4.0 * kPi;
  const double sN = std::pow(s, N);
  const long long blocks = (n_samples + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<BlockSums> sums(static_cast<std::size_t>(blocks));

  auto run_block = [&](long long b) {
    auto eng = stream_engine(seed, static_cast<std::uint64_t>(b), 0x6d63);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> radius(0.0, rho_max);
    std::uniform_real_distribution<double> height(-2.0 * kPi, 2.0 * kPi);
    const long long begin = b * kMonteCarloBlock;
    const long long end = std::min(n_samples, begin + kMonteCarloBlock);
    BlockSums acc;
    for (long long i = begin; i < end; ++i) {
      const double theta = angle(eng);
      const double rho = radius(eng);
      const double pz = height(eng);
      ++acc.count;
      const Vec3 p(rho * std::cos(theta), rho * std::sin(theta), pz);
      if (!set.contains(flow(p, 1.0, eps))) continue;
      ++acc.hits;
      const double x = box_vol * rho * std::abs(sinc(pz / 2.0)) * std::abs(jac_cyl(rho, pz, eps));
      const double ws = box_vol * s * s * s * rho * std::abs(sinc(s * pz / 2.0)) * std::abs(jac_cyl(s * rho, s * pz, eps));
      const double y = ws / sN;
      acc.sx += x;
      acc.sy += y;
      acc.sxx += x * x;
      acc.syy += y * y;
      acc.sxy += x * y;
    }
    sums[static_cast<std::size_t>(b)] = acc;
  };

  if (exec == Execution::serial) {
    for (long long b = 0; b < blocks; ++b) run_block(b);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long b = 0; b < blocks; ++b) run_block(b);
  }

  BlockSums tot;
  for (const auto& b : sums) {
    tot.count += b.count;
    tot.hits += b.hits;
    tot.sx += b.sx;
    tot.sy += b.sy;
    tot.sxx += b.sxx;
    tot.syy += b.syy;
    tot.sxy += b.sxy;
  }

  MonteCarloReport rep;
  rep.set = set;
  rep.s = s;
  rep.N = N;
  rep.eps = eps;
  rep.seed = seed;
  rep.samples = tot.count;
  rep.hits = tot.hits;
  const double n = static_cast<double>(tot.count);
  const double mx = tot.sx / n;
  const double my = tot.sy / n;
  rep.vol_A = mx;
  rep.vol_As = my * sN;
  if (tot.hits == 0 || !(mx > 0)) {
    rep.empty = true;
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.ratio = my / mx;
  const double vx = tot.sxx / n - mx * mx;
  const double vy = tot.syy / n - my * my;
  const double cxy = tot.sxy / n - mx * my;
  const double R = rep.ratio;
  const double var = std::max(0.0, (vy - 2.0 * R * cxy + R * R * vx) / (n * mx * mx));
  rep.std_error = std::sqrt(var);
  rep.rel_std_error = rep.std_error / R;
  return rep;
}

std::string MonteCarloReport::to_json() const {
  nlohmann::json j;
  j["set"] = nlohmann::json::parse(set.to_json());
  j["s"] = s;
  j["N"] = N;
  j["eps"] = eps;
  j["samples"] = samples;
  j["hits"] = hits;
  j["vol_A"] = vol_A;
  j["vol_A_s"] = vol_As;
  j["ratio"] = empty ? nlohmann::json(nullptr) : nlohmann::json(ratio);
  j["std_error"] = std_error;
  j["rel_std_error"] = rel_std_error;
  j["empty"] = empty;
  j["pass"] = pass();
  j["seed"] = seed;
  return j.dump(2);
}

}  // namespace carnot::heisenberg
