#include "carnot/group_io.hpp"
#include "carnot/singularity.hpp"

#include <doctest.h>

#include <random>

using namespace carnot;

namespace {

Covector cov(std::initializer_list<double> xs) {
  Covector h(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) h(i++) = x;
  return h;
}

// Random covector vanishing on the first layer.
Covector vertical(const CarnotSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Covector h = Covector::Zero(spec.dim());
  for (int i = spec.rank(); i < spec.dim(); ++i) h(i) = g(rng);
  return h;
}

}  // namespace

TEST_SUITE("singularity") {
  TEST_CASE("S matrix examples") {
    const CarnotSpec h1 = load_group("heisenberg1");
    const Matrix S = s_matrix(h1, cov({0, 0, 1}));
    REQUIRE(S.rows() == 2);
    REQUIRE(S.cols() == 2);
    Matrix want(2, 2);
    want << 0, -1, 1, 0;
    CHECK((S - want).norm() == 0.0);
    CHECK(s_matrix(h1, cov({0, 0, 0})).norm() == 0.0);
    CHECK_THROWS_AS(s_matrix(h1, cov({1, 0, 1})), std::invalid_argument);
    CHECK_THROWS_AS(s_matrix(h1, cov({0, 1})), std::invalid_argument);

    const CarnotSpec nf = load_group("step2-nonfat");
    const Matrix S3 = s_matrix(nf, cov({0, 0, 0, 1}));
    REQUIRE(S3.rows() == 3);
    REQUIRE(S3.cols() == 3);
    CHECK((S3 + S3.transpose()).norm() == 0.0);
    CHECK((S3 * Vector::Unit(3, 2)).norm() == 0.0);
    CHECK(S3.fullPivLu().rank() == 2);

    const CarnotSpec engel = load_group("engel");
    CHECK(s_matrix(engel, cov({0, 0, 0, 1})).rows() == 3);
  }

  TEST_CASE("S matrix is linear") {
    std::mt19937_64 rng(1);
    for (const char* name : {"heisenberg2", "engel", "step2-nonfat"}) {
      const CarnotSpec spec = load_group(name);
      for (int i = 0; i < 20; ++i) {
        const Covector a = vertical(spec, rng), b = vertical(spec, rng);
        const Matrix lhs = s_matrix(spec, 2.5 * a - 0.75 * b);
        const Matrix rhs = 2.5 * s_matrix(spec, a) - 0.75 * s_matrix(spec, b);
        CHECK((lhs - rhs).norm() <= 1e-14);
      }
    }
  }

  TEST_CASE("witness search") {
    const WitnessSearchResult h1 = singular_witness_search(load_group("heisenberg1"), 100, 0);
    CHECK_FALSE(h1.witness.has_value());
    CHECK(h1.min_singular_value == doctest::Approx(1.0).epsilon(1e-8));

    const CarnotSpec nf = load_group("step2-nonfat");
    const WitnessSearchResult r = singular_witness_search(nf, 100, 3);
    REQUIRE(r.witness.has_value());
    CHECK(verify_witness(nf, *r.witness));
    CHECK(std::abs(std::abs(r.witness->u(2)) - 1.0) <= 1e-9);
    CHECK(r.witness->hbar.norm() == doctest::Approx(1.0));
    CHECK(r.witness->hbar.head(3).norm() == 0.0);
    // Independent residual.
    CHECK((s_matrix(nf, r.witness->hbar) * r.witness->u).norm() <= 1e-10);

    const CarnotSpec engel = load_group("engel");
    const WitnessSearchResult e = singular_witness_search(engel, 100, 7);
    REQUIRE(e.witness.has_value());
    CHECK(verify_witness(engel, *e.witness));
    CHECK((s_matrix(engel, e.witness->hbar) * e.witness->u).norm() <= 1e-10);
    CHECK(e.witness->u.norm() == doctest::Approx(1.0));

    SingularWitness fake{cov({0, 0, 1}), Vector::Unit(2, 0), 0.0};
    CHECK_FALSE(verify_witness(load_group("heisenberg1"), fake));
    CHECK_THROWS_AS(singular_witness_search(engel, 0, 7), std::invalid_argument);

    const WitnessSearchResult ab = singular_witness_search(load_group("abelian3"), 10, 0);
    CHECK_FALSE(ab.witness.has_value());
  }

  TEST_CASE("fat check") {
    const FatResult h1 = fat_check_step2(load_group("heisenberg1"));
    CHECK(h1.verdict == FatVerdict::fat);
    CHECK(h1.exact);
    CHECK(fat_check_step2(load_group("heisenberg2")).verdict == FatVerdict::fat);

    const FatResult nf = fat_check_step2(load_group("step2-nonfat"));
    CHECK(nf.verdict == FatVerdict::not_fat);
    CHECK(nf.exact);
    REQUIRE(nf.witness_v.size() == 3);
    CHECK(std::abs(std::abs(nf.witness_v(2)) - 1.0) <= 1e-9);

    CHECK_THROWS_AS(fat_check_step2(load_group("abelian3")), std::invalid_argument);
    CHECK_THROWS_AS(fat_check_step2(load_group("engel")), std::invalid_argument);

    // dims [4,2] with [v1,v2] = v5, [v3,v4] = v5, [v1,v3] = v6, [v4,v2] = v6: fat, but m_2 > 1 so the
    // randomized check can only report that no witness was found.
    const CarnotSpec q("q", {4, 2}, {{0, 1, 4, 1}, {2, 3, 4, 1}, {0, 2, 5, 1}, {1, 3, 5, -1}});
    REQUIRE(validate_spec(q).ok());
    const FatResult fq = fat_check_step2(q);
    CHECK(fq.verdict == FatVerdict::inconclusive);
    CHECK_FALSE(fq.exact);
    CHECK(fq.min_singular_value > 0.5);
    // dims [3,2] with [v1,v2] = v4, [v1,v3] = v5: v = v1 direction is fine, v = v2 is not.
    const CarnotSpec t("t", {3, 2}, {{0, 1, 3, 1}, {0, 2, 4, 1}});
    const FatResult ft = fat_check_step2(t);
    CHECK(ft.verdict == FatVerdict::not_fat);
  }

  TEST_CASE("growth vector screen") {
    CHECK(growth_vector_ideal_screen(load_group("engel")).verdict == IdealVerdict::not_ideal);
    CHECK(growth_vector_ideal_screen(load_group("heisenberg1")).verdict == IdealVerdict::inconclusive);
    CHECK(growth_vector_ideal_screen(load_group("step2-nonfat")).verdict == IdealVerdict::not_ideal);
    // dims [3,3,1]: m_2 = m_1, screen silent.
    const CarnotSpec g331("g331", {3, 3, 1}, {{0, 1, 3, 1}, {0, 2, 4, 1}, {1, 2, 5, 1}, {0, 5, 6, 1}, {1, 4, 6, 1}});
    REQUIRE(validate_spec(g331).ok());
    const ScreenResult sr = growth_vector_ideal_screen(g331);
    CHECK(sr.verdict == IdealVerdict::inconclusive);
    CHECK_FALSE(sr.reason.empty());
  }

  TEST_CASE("audit verdicts") {
    const AuditVerdict h1 = singularity_audit(load_group("heisenberg1"), 100, 0);
    CHECK(h1.verdict == "fat");
    CHECK_FALSE(h1.witness.has_value());
    CHECK_FALSE(h1.found_singular());

    const AuditVerdict nf = singularity_audit(load_group("step2-nonfat"), 100, 0);
    CHECK(nf.found_singular());
    REQUIRE(nf.witness.has_value());
    CHECK(verify_witness(load_group("step2-nonfat"), *nf.witness));

    const AuditVerdict e = singularity_audit(load_group("engel"), 100, 7);
    CHECK(e.verdict == "not-ideal");
    CHECK(e.found_singular());

    const std::string js = e.to_json();
    for (const char* key : {"\"group\"", "\"verdict\"", "\"witness_hbar\"", "\"witness_u\"", "\"min_singular_value\"",
                            "\"budget\"", "\"seed\""}) {
      CHECK(js.find(key) != std::string::npos);
    }
    CHECK(h1.to_json().find("\"witness_hbar\": null") != std::string::npos);
  }

  TEST_CASE("fat groups never yield witnesses") {
    for (const char* name : {"heisenberg1", "heisenberg2"}) {
      const CarnotSpec spec = load_group(name);
      REQUIRE(fat_check_step2(spec).verdict == FatVerdict::fat);
      for (int budget : {1, 10, 200}) CHECK_FALSE(singular_witness_search(spec, budget, 5).witness.has_value());
    }
  }
}
