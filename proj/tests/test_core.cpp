#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "sppsbl/core.hpp"
#include "sppsbl/errors.hpp"

using namespace sppsbl;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("prior precisions: small cases") {
  CHECK(prior_precisions(PrecisionField(vec({1, 1, 1})), CouplingVector(vec({0, 0}))) == vec({1, 1, 1}));
  CHECK(prior_precisions(PrecisionField(vec({1, 2, 3})), CouplingVector(vec({1, 1}))) == vec({3, 6, 5}));
}

TEST_CASE("prior precisions: two coefficients use virtual zero boundaries") {
  const Vector lam = prior_precisions(PrecisionField(vec({2, 5})), CouplingVector(vec({0.5})));
  CHECK(lam[0] == doctest::Approx(2 + 0.5 * 5));
  CHECK(lam[1] == doctest::Approx(5 + 0.5 * 2));
}

TEST_CASE("prior precisions match the dense T alpha product") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  std::uniform_int_distribution<int> len(2, 40);
  for (int draw = 0; draw < 200; ++draw) {
    const int n = draw == 0 ? 8 : len(rng);
    std::vector<double> a(n), b(n - 1);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const Vector lam = prior_precisions(PrecisionField(Eigen::Map<Vector>(a.data(), n)),
                                        CouplingVector(Eigen::Map<Vector>(b.data(), n - 1)));
    const auto ref = oracle::precisions_via_matrix(a, b);
    for (int i = 0; i < n; ++i) CHECK(oracle::rel_err(lam[i], ref[i]) < 1e-12);

    const Matrix t = build_coupling_matrix(CouplingScheme::spp(), CouplingVector(Eigen::Map<Vector>(b.data(), n - 1)), n);
    const Vector via_t = t * Eigen::Map<Vector>(a.data(), n);
    for (int i = 0; i < n; ++i) CHECK(oracle::rel_err(lam[i], via_t[i]) < 1e-12);
  }
}

TEST_CASE("zero coupling returns alpha unchanged") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  Vector a(17);
  for (Index i = 0; i < a.size(); ++i) a[i] = u(rng);
  CHECK(prior_precisions(PrecisionField(a), CouplingVector::constant(17, 0.0)) == a);
}

TEST_CASE("coupling matrices") {
  CHECK(build_coupling_matrix(CouplingScheme::none(), CouplingVector(), 4) == Matrix::Identity(4, 4));

  const Matrix t1 = build_coupling_matrix(CouplingScheme::pc_fixed(1.0), CouplingVector(), 3);
  Matrix expect(3, 3);
  expect << 1, 1, 0, 1, 1, 1, 0, 1, 1;
  CHECK(t1 == expect);

  const Matrix ts = build_coupling_matrix(CouplingScheme::spp(), CouplingVector(vec({0.5, 2})), 3);
  CHECK(ts(0, 1) == 0.5);
  CHECK(ts(1, 2) == 2.0);
  CHECK(ts(0, 2) == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int draw = 0; draw < 50; ++draw) {
    Vector b(9);
    for (Index i = 0; i < 9; ++i) b[i] = u(rng);
    for (const auto& scheme : {CouplingScheme::spp(), CouplingScheme::pc_fixed(u(rng)), CouplingScheme::none()}) {
      const Matrix t = build_coupling_matrix(scheme, CouplingVector(b), 10);
      for (Index r = 0; r < 10; ++r)
        for (Index c = 0; c < 10; ++c) CHECK(t(r, c) == t(c, r));
    }
  }
}

TEST_CASE("sensing problem validation") {
  Matrix phi = Matrix::Ones(3, 4);
  CHECK_NOTHROW(SensingProblem::make(phi, Vector::Ones(3)));
  CHECK_THROWS_AS(SensingProblem::make(phi, Vector::Ones(2)), DimensionError);
  CHECK_THROWS_AS(SensingProblem::make(Matrix::Ones(3, 1), Vector::Ones(3)), DimensionError);
  CHECK_THROWS_AS(SensingProblem::make(phi, Vector::Ones(3), Vector::Ones(5)), DimensionError);
  Matrix bad = phi;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SensingProblem::make(bad, Vector::Ones(3)), DomainError);

  const auto p = SensingProblem::make(phi, Vector::Ones(3), vec({0, 2, 0, -1}));
  REQUIRE(p.true_support);
  CHECK(*p.true_support == SupportSet{1, 3});

  SensingProblem q = p;
  q.true_support = SupportSet{0};
  CHECK_THROWS_AS(q.validate(), DomainError);
}

TEST_CASE("hyperpriors") {
  HyperPriors h;
  CHECK(h.a == 1e-4);
  CHECK(h.b == 1e-4);
  CHECK(h.c == 10.0);
  CHECK(h.d == 1.0);
  CHECK(h.g == 1e-4);
  CHECK(h.h == 1e-4);
  CHECK_NOTHROW(h.validate());
  h.c = 1.0;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h.c = 2.0;
  h.b = 0.0;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h.b = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(h.validate(), DomainError);
}

TEST_CASE("precision field and coupling vector domains") {
  CHECK_THROWS_AS(PrecisionField(vec({1, 0})), DomainError);
  CHECK_THROWS_AS(PrecisionField(vec({1, 2e10})), DomainError);
  CHECK_NOTHROW(PrecisionField(vec({1, 1e10})));
  CHECK_THROWS_AS(CouplingVector(vec({-1})), DomainError);
  CHECK_THROWS_AS(prior_precisions(PrecisionField(vec({1, 1, 1})), CouplingVector(vec({1}))), DimensionError);
  const CouplingVector b(vec({0.5, 0.25}));
  CHECK(b.at_or_zero(-1) == 0.0);
  CHECK(b.at_or_zero(2) == 0.0);
  CHECK(b.at_or_zero(1) == 0.25);
}

TEST_CASE("scheme names parse") {
  CHECK(parse_scheme_kind("SPP") == CouplingScheme::Kind::kSpp);
  CHECK(parse_scheme_kind("pc_fixed") == CouplingScheme::Kind::kPcFixed);
  CHECK(parse_scheme_kind("none") == CouplingScheme::Kind::kNone);
  CHECK_THROWS_AS(parse_scheme_kind("t2"), ConfigError);
  CHECK(CouplingScheme::none().name() == "none");
  CHECK_FALSE(CouplingScheme::pc_fixed(1).learns_beta());
  CHECK(CouplingScheme::spp().learns_beta());
}
