#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nmg/problems.hpp"
#include "test_util.hpp"

using namespace nmg;
using nmg::test::random_vector;
using nmg::test::rel_error;

namespace {

ProblemSpec spec_1d(std::size_t n, double alpha, Regularization reg = Regularization::tikhonov) {
  ProblemSpec s;
  s.n = n;
  s.alpha = alpha;
  s.regularization = reg;
  return s;
}

void check_linear(const LinearOperator& op, std::uint64_t seed) {
  const auto x = random_vector(op.size(), seed), y = random_vector(op.size(), seed + 1);
  const double a = 0.7, b = -1.3;
  std::vector<double> comb(op.size());
  for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = a * x[i] + b * y[i];
  const auto ax = op.apply(x), ay = op.apply(y), ac = op.apply(comb);
  std::vector<double> want(op.size());
  for (std::size_t i = 0; i < want.size(); ++i) want[i] = a * ax[i] + b * ay[i];
  CHECK(rel_error(ac, want) < 1e-12);
}

void check_densify_consistent(const LinearOperator& op) {
  const auto d = op.densify();
  std::vector<double> e(op.size(), 0.0);
  for (std::size_t j = 0; j < op.size(); ++j) {
    e[j] = 1.0;
    const auto col = op.apply(e);
    for (std::size_t i = 0; i < op.size(); ++i) REQUIRE(d(i, j) == doctest::Approx(col[i]).epsilon(1e-14));
    e[j] = 0.0;
  }
}

}  // namespace

TEST_CASE("gaussian kernel") {
  SUBCASE("tiny sigma is a delta") {
    const auto k = build_gaussian_kernel(16, 1e-6);
    CHECK(k.at(3, 3) == doctest::Approx(1.0));
    CHECK(std::abs(k.at(3, 4)) < 1e-12);
  }
  SUBCASE("rows sum to one and kernel is symmetric") {
    const auto k = build_gaussian_kernel(8, 1.5);
    CHECK(k.first_col == k.first_row);
    for (std::size_t i = 0; i < 8; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 8; ++j) s += k.at(i, j);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Zero-padded kernel: interior rows carry the full mass, edge rows lose some.
    const auto z = build_gaussian_kernel(32, 1.5, SigmaUnits::mesh, KernelBoundary::toeplitz_zero);
    CHECK(z.first_col == z.first_row);
    double mid = 0.0, edge = 0.0;
    for (std::size_t j = 0; j < 32; ++j) {
      mid += z.at(16, j);
      edge += z.at(0, j);
    }
    CHECK(mid == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(edge < 0.7);
  }
  SUBCASE("profile follows exp(-d^2 / 2 sigma^2)") {
    const auto k = build_gaussian_kernel(64, 1.5);
    for (std::size_t d = 1; d < 5; ++d)
      CHECK(k.first_col[d] / k.first_col[0] ==
            doctest::Approx(std::exp(-static_cast<double>(d * d) / (2.0 * 1.5 * 1.5))).epsilon(1e-12));
    CHECK(k.circulant());
  }
  SUBCASE("physical units") {
    const auto a = build_gaussian_kernel(32, 1.5);
    const auto b = build_gaussian_kernel(32, 1.5 / 32.0, SigmaUnits::physical);
    CHECK(rel_error(a.first_col, b.first_col) < 1e-12);
  }
  CHECK_THROWS_AS(build_gaussian_kernel(8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_gaussian_kernel(8, -1.0), std::invalid_argument);
}

TEST_CASE("ProblemSpec validation") {
  ProblemSpec s;
  CHECK_NOTHROW(s.validate());
  s.n = 12;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.n = 4;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.n = 64;
  s.alpha = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.alpha = 1e-4;
  s.dimension = 2;
  s.regularization = Regularization::pde;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.regularization = Regularization::anisotropic;
  CHECK_THROWS_AS(build_problem(s), std::invalid_argument);
  s.regularization = Regularization::tikhonov;
  CHECK_NOTHROW(s.validate());

  const auto a = spec_1d(64, 1e-4), b = spec_1d(64, 1e-4), c = spec_1d(64, 1e-5);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("build_integral_1d") {
  SUBCASE("zero kernel hook gives alpha * identity") {
    const std::vector<double> zero(16, 0.0);
    const auto op = build_integral_1d_with_kernel(spec_1d(16, 1.0), ToeplitzKernel(zero, zero));
    const auto x = random_vector(16, 1);
    CHECK(rel_error(op->apply(x), x) < 1e-15);
  }
  SUBCASE("n=16 tikhonov is symmetric with eigenvalues >= alpha") {
    const double alpha = 1e-2;
    const auto op = build_integral_1d(spec_1d(16, alpha));
    const auto d = op->densify();
    CHECK(d.asymmetry() < 1e-14);
    const auto e = eig_sym(d);
    CHECK(e.values.front() >= alpha - 1e-10);
    CHECK(op->symmetric());
    CHECK(op->spd());
  }
  SUBCASE("constant input gives (alpha + 1) times the constant") {
    const auto op = build_integral_1d(spec_1d(32, 0.25));
    const std::vector<double> c(32, 3.0);
    for (double v : op->apply(c)) CHECK(v == doctest::Approx(3.75).epsilon(1e-12));
  }
  SUBCASE("anisotropic D is symmetric, tridiagonal, annihilates constants") {
    const auto d = build_anisotropic_d(32, KernelBoundary::circulant)->densify();
    CHECK(d.asymmetry() < 1e-14);
    for (std::size_t i = 0; i < 32; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 32; ++j) {
        s += d(i, j);
        const std::size_t dist = std::min((i + 32 - j) % 32, (j + 32 - i) % 32);
        if (dist > 1) CHECK(d(i, j) == 0.0);
      }
      CHECK(std::abs(s) < 1e-13);
    }
    // Varying coefficients: a(z) = 1 + 0.5 sin(2 pi z) at the face between cells 0 and 1.
    const double face = 1.0 / 32.0;
    CHECK(-d(0, 1) == doctest::Approx(1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * face)));
    const auto op = build_integral_1d(spec_1d(32, 1e-3, Regularization::anisotropic));
    CHECK(op->densify().asymmetry() < 1e-14);
    CHECK(eig_sym(op->densify()).values.front() > 0.0);
  }
}

TEST_CASE("build_pde_1d") {
  SUBCASE("n=16 stencil") {
    const double alpha = 1e-4;
    const auto op = build_pde_1d(16, alpha);
    CHECK(op->size() == 15);
    const auto d = op->densify();
    const double h2 = 16.0 * 16.0;
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t j = 0; j < 15; ++j) {
        double want = 0.0;
        if (i == j) want = alpha + 2.0 * h2;
        if (i + 1 == j || j + 1 == i) want = -h2;
        CHECK(d(i, j) == doctest::Approx(want).epsilon(1e-14));
      }
    CHECK(d.asymmetry() == 0.0);
    CHECK(op->spd());
  }
  SUBCASE("sin(pi z) is an approximate eigenfunction with O(h^2) error") {
    const double alpha = 1e-4;
    std::vector<double> errs;
    for (std::size_t n : {64, 128}) {
      const auto op = build_pde_1d(n, alpha);
      std::vector<double> u(n - 1), want(n - 1);
      for (std::size_t i = 0; i < n - 1; ++i) {
        const double z = static_cast<double>(i + 1) / static_cast<double>(n);
        u[i] = std::sin(std::numbers::pi * z);
        want[i] = (alpha + std::numbers::pi * std::numbers::pi) * u[i];
      }
      errs.push_back(rel_error(op->apply(u), want));
    }
    CHECK(errs[0] < 1e-3);
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(build_pde_1d(4, 1e-4), std::invalid_argument);
}

TEST_CASE("build_integral_2d") {
  SUBCASE("identity kernel hook gives 2X for alpha = 1") {
    std::vector<double> e(8, 0.0);
    e[0] = 1.0;
    const auto op = build_integral_2d_with_kernel(8, 1.0, ToeplitzKernel(e, e));
    const auto x = random_vector(64, 5);
    std::vector<double> want(64);
    for (std::size_t i = 0; i < 64; ++i) want[i] = 2.0 * x[i];
    CHECK(rel_error(op->apply(x), want) < 1e-15);
  }
  SUBCASE("n=4 matches the explicit 16x16 matrix") {
    const double alpha = 0.3;
    const auto k = build_gaussian_kernel(4, 1.5);
    DenseMatrix big(16, 16);
    for (std::size_t i1 = 0; i1 < 4; ++i1)
      for (std::size_t i2 = 0; i2 < 4; ++i2)
        for (std::size_t j1 = 0; j1 < 4; ++j1)
          for (std::size_t j2 = 0; j2 < 4; ++j2)
            big(i1 * 4 + i2, j1 * 4 + j2) = k.at(i1, j1) * k.at(i2, j2) + (i1 == j1 && i2 == j2 ? alpha : 0.0);
    const auto op = build_integral_2d_with_kernel(4, alpha, k);
    const auto x = random_vector(16, 9);
    CHECK(rel_error(op->apply(x), big.matvec(x)) < 1e-12);
  }
  SUBCASE("all-ones input") {
    const auto op = build_integral_2d(16, 0.5);
    const std::vector<double> ones(256, 1.0);
    for (double v : op->apply(ones)) CHECK(v == doctest::Approx(1.5).epsilon(1e-12));
  }
}

TEST_CASE("invariants: linearity, densify consistency, SPD") {
  std::vector<OperatorPtr> ops{
      build_integral_1d(spec_1d(64, 1e-3)),
      build_integral_1d(spec_1d(64, 1e-3, Regularization::anisotropic)),
      build_pde_1d(64, 1e-4),
      build_integral_2d(8, 1e-3),
      build_integral_2d(8, 1e-3, 1.5, SigmaUnits::mesh, KernelBoundary::toeplitz_zero),
  };
  auto zero_spec = spec_1d(64, 1e-3);
  zero_spec.boundary = KernelBoundary::toeplitz_zero;
  ops.push_back(build_integral_1d(zero_spec));
  std::uint64_t seed = 100;
  for (const auto& op : ops) {
    check_linear(*op, seed++);
    check_densify_consistent(*op);
  }
  for (double alpha : {1e-2, 1e-3}) {
    auto e1 = eig_sym(build_integral_1d(spec_1d(64, alpha))->densify());
    CHECK(e1.values.front() >= alpha * (1.0 - 1e-8));
    auto e2 = eig_sym(build_integral_2d(8, alpha)->densify());
    CHECK(e2.values.front() >= alpha * (1.0 - 1e-8));
  }
}
