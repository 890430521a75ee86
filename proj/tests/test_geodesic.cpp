#include "carnot/geodesic.hpp"
#include "carnot/group_io.hpp"
#include "carnot/heisenberg.hpp"
#include "carnot/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace carnot;

namespace {

constexpr double kPi = std::numbers::pi;

Covector cov(std::initializer_list<double> xs) {
  Covector h(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) h(i++) = x;
  return h;
}

Covector random_covector(const CarnotSpec& spec, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Covector h(spec.dim());
  for (int i = 0; i < spec.dim(); ++i) h(i) = u(rng);
  return h;
}

// Basis of the left-translated first layer at x: d/de (x * e v_i) at e = 0.
Matrix horizontal_frame(const CarnotSpec& spec, const GroupPoint& x) {
  const double e = 1e-6;
  Matrix F(spec.dim(), spec.rank());
  for (int i = 0; i < spec.rank(); ++i) {
    GroupPoint v = GroupPoint::Zero(spec.dim());
    v(i) = e;
    F.col(i) = (group_product(spec, x, v) - group_product(spec, x, -v)) / (2 * e);
  }
  return F;
}

}  // namespace

TEST_SUITE("geodesic") {
  TEST_CASE("Euler-Arnold right-hand side") {
    const CarnotSpec h1 = load_group("heisenberg1");
    const Covector d = euler_arnold_rhs(h1, cov({1, 0, 2 * kPi}));
    CHECK(d(0) == doctest::Approx(0.0));
    CHECK(d(1) == doctest::Approx(2 * kPi));
    CHECK(d(2) == 0.0);

    const CarnotSpec engel = load_group("engel");
    CHECK(euler_arnold_rhs(engel, cov({0.3, -1.2, 0, 0})).norm() == 0.0);
    CHECK(euler_arnold_rhs(load_group("abelian3"), cov({1, 2, 3})).norm() == 0.0);

    // Top layer constant; bilinear in (h^{l+1}, h^1).
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Covector a = random_covector(engel, rng);
      const Covector da = euler_arnold_rhs(engel, a);
      CHECK(da(3) == 0.0);
      Covector b = a;
      b.head(2) *= 2.0;
      CHECK((euler_arnold_rhs(engel, b) - 2.0 * da).norm() <= 1e-12);
      Covector c = a;
      c.tail(2) *= 3.0;
      CHECK((euler_arnold_rhs(engel, c) - 3.0 * da).norm() <= 1e-12);
    }
  }

  TEST_CASE("endpoint examples") {
    const CarnotSpec h1 = load_group("heisenberg1");
    CHECK((exp_map(h1, cov({1, 0, 0})) - cov({1, 0, 0})).norm() <= 1e-12);
    CHECK((exp_map(h1, cov({1, 0, 2 * kPi}), 10000) - cov({0, 0, 1 / (4 * kPi)})).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((exp_map(h1, cov({1, 0, kPi}), 10000) - cov({0, 2 / kPi, 1 / (2 * kPi)})).lpNorm<Eigen::Infinity>() <= 1e-10);

    const GeodesicPath path = integrate_normal_extremal(h1, cov({1, 0, 2 * kPi}), 1.0, 1000);
    CHECK(path.steps() == 1000);
    CHECK(path.c.front().norm() == 0.0);
    CHECK(path.t.back() == doctest::Approx(1.0));
    CHECK(path.h.back()(2) == 2 * kPi);  // top layer exactly constant
    CHECK(path_length(path) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("invalid arguments") {
    const CarnotSpec h1 = load_group("heisenberg1");
    CHECK_THROWS_AS(integrate_normal_extremal(h1, cov({1, 0, 0}), 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(integrate_normal_extremal(h1, cov({1, 0, 0}), 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(exp_map(h1, cov({1, 0})), std::invalid_argument);
    const CarnotSpec skew = parse_group_json(R"({"name":"g","step":2,"layer_dims":[2,1],
      "brackets":[{"i":1,"j":2,"coeffs":{"3":1.0}}],"metric_first_layer":[[2,0],[0,1]]})");
    CHECK_THROWS_AS(ExtremalIntegrator{skew}, std::invalid_argument);
    CHECK_NOTHROW(ExtremalIntegrator{skew.orthonormalized()});
  }

  TEST_CASE("path length") {
    const CarnotSpec engel = load_group("engel");
    CHECK(path_length(integrate_normal_extremal(engel, cov({0, 0, 1, 2}), 1.0, 100)) == 0.0);
    const double l1 = path_length(integrate_normal_extremal(engel, cov({0.6, 0.8, 1.5, -0.7}), 1.0, 1000));
    const double l2 = path_length(integrate_normal_extremal(engel, cov({1.2, 1.6, 1.5, -0.7}), 1.0, 1000));
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(l2 == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("agreement with the closed-form Heisenberg flow") {
    const CarnotSpec h1 = load_group("heisenberg1");
    ExtremalIntegrator integ(h1);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uxy(-1.0, 1.0), uz(-kPi, kPi);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Covector h = cov({uxy(rng), uxy(rng), uz(rng)});
      const GroupPoint got = integ.endpoint(h, 1.0, 10000);
      const heisenberg::Vec3 want = heisenberg::flow(heisenberg::Vec3(h(0), h(1), h(2)), 1.0);
      worst = std::max(worst, (got - Vector(want)).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("speed is conserved") {
    std::mt19937_64 rng(11);
    for (const char* name : {"heisenberg1", "heisenberg2", "engel", "step2-nonfat"}) {
      const CarnotSpec spec = load_group(name);
      for (int i = 0; i < 10; ++i) {
        const GeodesicPath p = integrate_normal_extremal(spec, random_covector(spec, rng, 3.0), 1.0, 1000);
        CAPTURE(name);
        CHECK(p.speed_drift() <= 1e-8);
      }
    }
  }

  TEST_CASE("dilation equivariance") {
    std::mt19937_64 rng(17);
    for (const char* name : {"heisenberg1", "heisenberg2", "engel"}) {
      const CarnotSpec spec = load_group(name);
      for (int i = 0; i < 10; ++i) {
        const Covector h = random_covector(spec, rng);
        for (double lambda : {0.5, 2.0, 0.3, 1.7}) {
          const GroupPoint lhs = exp_map(spec, covector_dilate(spec, lambda, h), 4000);
          const GroupPoint rhs = dilate(spec, lambda, exp_map(spec, h, 4000));
          CAPTURE(name);
          CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-8);
        }
      }
    }
  }

  TEST_CASE("fourth-order convergence") {
    const CarnotSpec engel = load_group("engel");
    const Covector h = cov({0.6, 0.8, 2.0, -1.5});
    ExtremalIntegrator integ(engel);
    auto err = [&](int steps) { return (integ.endpoint(h, 1.0, steps) - integ.endpoint(h, 1.0, 10 * steps)).norm(); };
    const double ratio = err(20) / err(40);
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
  }

  TEST_CASE("left-translated curves stay horizontal") {
    std::mt19937_64 rng(23);
    for (const char* name : {"heisenberg1", "engel", "step2-nonfat"}) {
      const CarnotSpec spec = load_group(name);
      const Covector h = random_covector(spec, rng, 2.0);
      const GeodesicPath path = integrate_normal_extremal(spec, h, 1.0, 10000);
      const GroupPoint z = random_covector(spec, rng, 2.0);
      const double dt = path.t[1] - path.t[0];
      double worst = 0.0;
      for (int k = 1; k < path.steps(); k += 250) {
        const GroupPoint x = group_product(spec, z, path.c[k]);
        const Vector v =
            (group_product(spec, z, path.c[k + 1]) - group_product(spec, z, path.c[k - 1])) / (2 * dt);
        const Matrix F = horizontal_frame(spec, x);
        const Vector coeffs = F.colPivHouseholderQr().solve(v);
        worst = std::max(worst, (F * coeffs - v).norm());
      }
      CAPTURE(name);
      CHECK(worst <= 1e-5);
    }
  }

  TEST_CASE("observer sees every node") {
    const CarnotSpec h1 = load_group("heisenberg1");
    ExtremalIntegrator integ(h1);
    const Covector h = cov({1, 0, 1});
    Vector hout(3), cout(3);
    int calls = 0;
    double last_t = -1;
    ExtremalIntegrator::Observer obs = [&](int, double t, const double*, const double*) {
      ++calls;
      last_t = t;
    };
    integ.run(h.data(), 1.0, 50, hout.data(), cout.data(), &obs);
    CHECK(calls == 51);
    CHECK(last_t == doctest::Approx(1.0));
    CHECK((cout - integ.endpoint(h, 1.0, 50)).norm() == 0.0);
  }

  TEST_CASE("initial derivatives respect the layer orders") {
    const LayerOrderReport h1 = taylor_layer_orders(load_group("heisenberg1"), cov({1, 0, 2 * kPi}));
    CHECK(h1.pass());
    CHECK_FALSE(h1.ill_conditioned);
    REQUIRE(h1.orders.size() >= 2);
    CHECK(h1.orders[1].forbidden_norm <= 1e-6);
    CHECK(h1.orders[1].derivative_norm > 1.0);  // c'' has a nonzero first-layer part

    const LayerOrderReport line = taylor_layer_orders(load_group("engel"), cov({0.6, 0.8, 0, 0}));
    CHECK(line.pass());
    for (const auto& e : line.orders) CHECK(e.forbidden_norm <= e.tolerance);
    REQUIRE(line.orders.size() >= 2);
    CHECK(line.orders[1].derivative_norm <= 1e-6);

    const LayerOrderReport engel = taylor_layer_orders(load_group("engel"), cov({0.6, 0.8, 1.5, -0.7}));
    CHECK(engel.pass());
    REQUIRE(engel.orders.size() >= 3);
    CHECK(engel.orders[2].forbidden_norm <= 1e-6);

    CHECK_THROWS_AS(taylor_layer_orders(load_group("engel"), cov({1, 0, 0, 0}), 7), std::invalid_argument);
  }

  TEST_CASE("curve CSV layout") {
    const GeodesicPath p = integrate_normal_extremal(load_group("heisenberg1"), cov({1, 0, kPi}), 1.0, 4);
    std::ostringstream out;
    write_curve_csv(out, p);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,c_1,c_2,c_3,h_1,h_2,h_3,u_norm");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
  }
}
