#include "carnot/contraction.hpp"
#include "carnot/group_io.hpp"
#include "carnot/heisenberg.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace carnot;

namespace {

constexpr double kPi = std::numbers::pi;

Covector cov(std::initializer_list<double> xs) {
  Covector h(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) h(i++) = x;
  return h;
}

// det d(flow)/dp of the closed-form Heisenberg exponential, by central differences.
double closed_form_density(const Covector& h) {
  const double e = 1e-6;
  Eigen::Matrix3d J;
  for (int k = 0; k < 3; ++k) {
    heisenberg::Vec3 p(h(0), h(1), h(2)), q = p;
    p(k) += e;
    q(k) -= e;
    J.col(k) = (heisenberg::flow(p, 1.0) - heisenberg::flow(q, 1.0)) / (2 * e);
  }
  return J.determinant();
}

// Same density from the cylindrical Jacobian: dp = rho drho dtheta dpz, dx = r dr dphi dz.
double cylindrical_density(const Covector& h) {
  const double pz = h(2);
  const double sinc = pz == 0.0 ? 1.0 : std::sin(pz / 2) / (pz / 2);
  return std::abs(sinc) * heisenberg::jac_cyl(std::hypot(h(0), h(1)), pz);
}

}  // namespace

TEST_SUITE("contraction") {
  TEST_CASE("abelian Jacobian is the identity") {
    const CarnotSpec ab = load_group("abelian3");
    const Matrix J = jacobian(ab, cov({0.3, -2, 1.1}));
    CHECK((J - Matrix::Identity(3, 3)).norm() <= 1e-8);
    CHECK(density(ab, cov({5, 1, -1})) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("density examples") {
    const CarnotSpec h1 = load_group("heisenberg1");
    CHECK(density(h1, cov({1, 0, 0})) > 0.0);
    CHECK(density(h1, cov({1, 0, 0})) == doctest::Approx(1.0 / 12).epsilon(1e-6));
    CHECK(std::abs(density(h1, cov({1, 0, 2 * kPi}), {1e-5, 4000})) <= 1e-6);

    const Covector h = cov({0.6, -0.8, 2.0});
    DensityOptions a, b;
    a.fd_step = 1e-5;
    b.fd_step = 0.5e-5;
    const double da = density(h1, h, a), db = density(h1, h, b);
    CHECK(std::abs(da - db) <= 1e-6 * std::abs(da));
    CHECK_THROWS_AS(jacobian(h1, h, {0.0, 100}), std::invalid_argument);
  }

  TEST_CASE("density agrees with the closed-form Heisenberg map") {
    const CarnotSpec h1 = load_group("heisenberg1");
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uxy(-1.5, 1.5), uz(-2 * kPi * 0.95, 2 * kPi * 0.95);
    double worst_fd = 0.0, worst_cyl = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Covector h = cov({uxy(rng), uxy(rng), uz(rng)});
      const double d = density(h1, h, {1e-5, 2000});
      worst_fd = std::max(worst_fd, std::abs(d - closed_form_density(h)));
      worst_cyl = std::max(worst_cyl, std::abs(d - cylindrical_density(h)));
    }
    CHECK(worst_fd <= 1e-6);
    CHECK(worst_cyl <= 1e-6);
  }

  TEST_CASE("scaled profile") {
    const CarnotSpec ab = load_group("abelian3");
    const std::vector<double> grid = geometric_grid(1e-3, 1.0, 8);
    const DensityProfile pa = scaled_density_profile(ab, cov({1, 2, 3}), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(pa.D[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(pa.scaled[i] == doctest::Approx(std::pow(grid[i], 3)).epsilon(1e-9));
    }
    CHECK_FALSE(pa.truncated);

    const CarnotSpec h1 = load_group("heisenberg1");
    const Covector h = cov({0.8, 0.6, 2.5});
    const DensityProfile p = scaled_density_profile(h1, h, grid);
    CHECK(p.D.back() == doctest::Approx(density(h1, h)).epsilon(1e-12));
    // D(sh)/s^2 settles to a positive constant.
    const double c0 = p.D[0] / (grid[0] * grid[0]), c1 = p.D[1] / (grid[1] * grid[1]);
    CHECK(c0 > 0.0);
    CHECK(c0 == doctest::Approx(c1).epsilon(1e-2));
    CHECK_THROWS_AS(scaled_density_profile(h1, h, {0.0, 0.5}), std::invalid_argument);
  }

  TEST_CASE("vanishing order") {
    DensityProfile synth;
    synth.s = geometric_grid(1e-3, 1e-2, 10);
    for (double s : synth.s) synth.D.push_back(7.0 * s * s);
    const SlopeEstimate e = vanishing_order(synth);
    CHECK(e.slope == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_FALSE(e.degenerate);

    DensityProfile few;
    few.s = {1e-3, 2e-3};
    few.D = {1, 1};
    CHECK(vanishing_order(few).degenerate);

    const CarnotSpec h1 = load_group("heisenberg1");
    const auto grid = geometric_grid(1e-3, 1e-2, 10);
    CHECK(vanishing_order(scaled_density_profile(h1, cov({1, 0, 2 * kPi * 0.9}), grid)).slope ==
          doctest::Approx(2.0).epsilon(0.025));
    CHECK(std::abs(vanishing_order(scaled_density_profile(load_group("abelian3"), cov({1, 1, 1}), grid)).slope) <=
          1e-6);
    const double order = vanishing_order(scaled_density_profile(h1, cov({0.3, 0.9, -1.7}), grid)).slope;
    CHECK(std::abs(order + h1.dim() - theorem2_bound(h1)) <= 0.05);
  }

  TEST_CASE("required exponent") {
    CHECK(required_exponent_from(3, 2.0, 2.0 * 0.25, 0.5) == doctest::Approx(5.0));
    CHECK_THROWS_AS(required_exponent_from(3, 0.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(required_exponent_from(3, 1.0, 1.0, 1.0), std::domain_error);

    CHECK(required_exponent(load_group("abelian3"), cov({1, -2, 0.4}), 0.3) == doctest::Approx(3.0).epsilon(1e-8));
    // D(h) = 4/pi^4 and D(sh) = s^2/12 (1 + O(s^2)) give 5 - ln(pi^4/48)/ln(1000) + O(1e-6).
    const double n = required_exponent(load_group("heisenberg1"), cov({1, 0, kPi}), 1e-3);
    CHECK(n == doctest::Approx(5.0 - std::log(std::pow(kPi, 4) / 48) / std::log(1000.0)).epsilon(1e-6));
    CHECK(n < 5.0);
  }

  TEST_CASE("required exponent is dilation invariant") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (const char* name : {"heisenberg1", "engel"}) {
      const CarnotSpec spec = load_group(name);
      for (int i = 0; i < 5; ++i) {
        Covector h(spec.dim());
        for (int k = 0; k < spec.dim(); ++k) h(k) = u(rng);
        for (double lambda : {0.5, 2.0}) {
          const double a = required_exponent(spec, h, 0.2, {1e-5, 4000});
          const double b = required_exponent(spec, covector_dilate(spec, lambda, h), 0.2, {1e-5, 4000});
          CAPTURE(name);
          CHECK(std::abs(a - b) <= 1e-6);
        }
      }
    }
  }

  TEST_CASE("curvature exponent estimator") {
    SamplerConfig cfg;
    cfg.samples = 20;
    const McpReport ab = estimate_curvature_exponent(load_group("abelian3"), cfg, geometric_grid(1e-3, 0.9, 5), 1, 3.0);
    CHECK(ab.sup_required_exponent == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(ab.pass());

    cfg.samples = 30;
    const McpReport h1 = estimate_curvature_exponent(load_group("heisenberg1"), cfg, default_s_grid(), 3, 5.0);
    CHECK(h1.sup_required_exponent <= 5.0 + 1e-3);
    CHECK(h1.sup_required_exponent >= 4.9);
    CHECK(h1.pass());
    CHECK(h1.samples == 30);

    const McpReport strict = estimate_curvature_exponent(load_group("heisenberg1"), cfg, default_s_grid(), 3, 4.5);
    CHECK_FALSE(strict.pass());
    for (const auto& v : strict.violations) CHECK(v.N_req > 4.5 + cfg.tolerance);
    CHECK(strict.sup_required_exponent == h1.sup_required_exponent);

    const std::string js = h1.to_json();
    for (const char* key : {"\"group\"", "\"N_tested\"", "\"samples\"", "\"rejected\"", "\"sup_required_exponent\"",
                            "\"violations\"", "\"seed\""}) {
      CHECK(js.find(key) != std::string::npos);
    }
  }

  TEST_CASE("default grid") {
    const auto g = default_s_grid();
    REQUIRE(g.size() == 25);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(0.9));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  }

  TEST_CASE("lower bound arithmetic") {
    CHECK(theorem2_bound(load_group("heisenberg1")) == 5);
    CHECK(theorem2_bound(load_group("heisenberg2")) == 7);
    CHECK(theorem2_bound(load_group("engel")) == 9);
    CHECK(theorem2_bound(load_group("abelian3")) == 3);
    for (int n = 1; n <= 5; ++n) {
      std::vector<BracketTerm> br;
      for (int i = 0; i < n; ++i) br.push_back({i, i + n, 2 * n, 1.0});
      CHECK(theorem2_bound(CarnotSpec("H" + std::to_string(n), {2 * n, 1}, br)) == 2 * n + 3);
    }
  }

  TEST_CASE("model weight") {
    for (double s : {0.0, 0.1, 0.5, 1.0}) CHECK(mcp_weight(0.0, 5.0, 1.0, s) == doctest::Approx(std::pow(s, 5)));
    CHECK(mcp_weight(0.0, 3.0, 2.0, 0.4) == std::pow(0.4, 3.0));
    CHECK(mcp_weight(1.0, 4.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(mcp_weight(-1.0, 4.0, 1.0, 0.0) == 0.0);
    // s * (sin(s d/sqrt(N-1)) / sin(d/sqrt(N-1)))^(N-1), by hand.
    const double r = std::sqrt(3.0);
    CHECK(mcp_weight(1.0, 4.0, 2.0, 0.5) == doctest::Approx(0.5 * std::pow(std::sin(1.0 / r) / std::sin(2.0 / r), 3)));
    CHECK_THROWS_AS(mcp_weight(1.0, 4.0, 10.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(mcp_weight(0.0, 1.0, 1.0, 0.5), std::domain_error);
    for (double s = 0.05; s < 1.0; s += 0.1) {
      const double w = mcp_weight(-2.0, 5.0, 1.5, s);
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
    }
  }

  TEST_CASE("density-level pass implies set-level pass on H1") {
    SamplerConfig cfg;
    cfg.samples = 20;
    const McpReport rep = estimate_curvature_exponent(load_group("heisenberg1"), cfg, {0.25, 0.5, 0.75}, 8, 5.0);
    REQUIRE(rep.pass());
    for (double s : {0.25, 0.5, 0.75}) {
      CHECK(heisenberg::mcp_monte_carlo(heisenberg::SetSpec::annulus(0.5, 1.0), s, 5.0, 20000, 0.0, 8).pass());
    }
  }
}
