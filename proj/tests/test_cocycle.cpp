#include <cmath>
#include <vector>

#include "doctest.h"
#include "rdslab/cocycle.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

namespace {

Matrix random_well_conditioned(int d, Rng& rng) {
  Matrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.at(i, j) = rng.next_double() - 0.5 + (i == j ? 2.0 : 0.0);
  return m;
}

}  // namespace

TEST_CASE("generator evaluation") {
  const CocycleGenerator id = CocycleGenerator::constant(Matrix::identity(2));
  CHECK(approx_equal(id.eval(0.123), Matrix::identity(2), 1e-15));

  const CocycleGenerator pw = CocycleGenerator::piecewise_constant(
      {0.0, 0.5, 1.0}, {Matrix::diag({2.0, 1.0}), Matrix::diag({1.0, 3.0})});
  // boundary belongs to the right cell by the half-open rule
  CHECK(approx_equal(pw.eval(0.5), Matrix::diag({1.0, 3.0}), 1e-15));
  CHECK(approx_equal(pw.eval(0.499), Matrix::diag({2.0, 1.0}), 1e-15));

  const CocycleGenerator par = CocycleGenerator::parametric(
      2, {Expr::parse("1"), Expr::parse("x"), Expr::parse("0"), Expr::parse("1")});
  const Matrix m = par.eval(0.25);
  CHECK(m.at(0, 1) == 0.25);
  CHECK(m.at(0, 0) == 1.0);

  CHECK_THROWS_AS(id.eval(1.0), DomainError);
  const CocycleGenerator sing =
      CocycleGenerator::parametric(1, {Expr::parse("x - 0.5")});
  CHECK_THROWS_AS(sing.eval(0.5), SingularityError);
  CHECK_THROWS_AS(CocycleGenerator::constant(Matrix(2, {1, 2, 2, 4})), SingularityError);
}

TEST_CASE("scaled_multiply basics and overflow safety") {
  const ScaledMatrix id = ScaledMatrix::identity(2);
  const ScaledMatrix p = scaled_multiply(id, Matrix::diag({2.0, 2.0}));
  CHECK(p.log_scale + std::log(p.core.singular_values().front()) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  // 400 multiplications by diag(10,10): the naive product overflows, the
  // scaled one carries 400 log 10 exactly.
  ScaledMatrix q = ScaledMatrix::identity(2);
  for (int i = 0; i < 400; ++i) q = scaled_multiply(q, Matrix::diag({10.0, 10.0}));
  const double total = q.log_scale + std::log(q.core.singular_values().front());
  CHECK(total == doctest::Approx(400.0 * std::log(10.0)).epsilon(1e-8));
  const double f = q.core.frobenius();
  CHECK(f >= 1e-8);
  CHECK(f <= 1e8);
}

TEST_CASE("scaled product matches naive product for well-conditioned chains") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Matrix> chain;
    for (int i = 0; i < 20; ++i) chain.push_back(random_well_conditioned(3, rng));
    ScaledMatrix p = ScaledMatrix::identity(3);
    Matrix naive = Matrix::identity(3);
    for (const auto& m : chain) {
      p = scaled_multiply(p, m);
      naive = m * naive;
    }
    const double scale = std::exp(p.log_scale);
    Matrix reconstructed = p.core;
    reconstructed *= scale;
    CHECK(approx_equal(reconstructed, naive, 1e-9));
  }
}

TEST_CASE("norms of diagonal, orthogonal and shear matrices") {
  const NormPair d = norms({Matrix::diag({3.0, 0.5}), 0.0});
  CHECK(d.log_smax == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(d.log_smin == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

  const double th = 1.1;
  const NormPair q = norms({Matrix(2, {std::cos(th), -std::sin(th), std::sin(th), std::cos(th)}), 0.0});
  CHECK(std::abs(q.log_smax) < 1e-12);
  CHECK(std::abs(q.log_smin) < 1e-12);

  const NormPair s = norms({Matrix(2, {1.0, 1.0, 0.0, 1.0}), 0.0});
  CHECK(s.log_smax == doctest::Approx(std::log((1.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-10));
}

TEST_CASE("norm pair scale invariance") {
  Rng rng(5);
  const Matrix m = random_well_conditioned(3, rng);
  const NormPair a = norms({m, 1.25});
  for (double c : {1e-3, 0.1, 7.0, 1e4}) {
    Matrix scaled = m;
    scaled *= c;
    const NormPair b = norms({scaled, 1.25 - std::log(c)});
    CHECK(b.log_smax == doctest::Approx(a.log_smax).epsilon(1e-12));
    CHECK(b.log_smin == doctest::Approx(a.log_smin).epsilon(1e-12));
  }
}

TEST_CASE("cocycle_along: empty word, diagonal powers, d=1 log sums") {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator diag = CocycleGenerator::constant(Matrix::diag({2.0, 0.5}));

  const ScaledMatrix e = cocycle_along(f, diag, Word({}, 2), 0.3);
  const NormPair en = norms(e);
  CHECK(en.log_smax == 0.0);
  CHECK(en.log_smin == 0.0);

  Rng rng(10);
  for (std::uint64_t m = 1; m <= 12; ++m) {
    const Word w = sample_word(2, m, rng);
    const NormPair np = norms(cocycle_along(f, diag, w, 0.3));
    CHECK(np.log_smax == doctest::Approx(m * std::log(2.0)).epsilon(1e-12));
    CHECK(np.log_smin == doctest::Approx(-static_cast<double>(m) * std::log(2.0)).epsilon(1e-12));
  }

  // d = 1: log_smax = log_smin = sum of log|L(x_k)|
  const CocycleGenerator scalar = CocycleGenerator::parametric(1, {Expr::parse("exp(x)")});
  for (int trial = 0; trial < 20; ++trial) {
    const Word w = sample_word(2, 30, rng);
    const double x = rng.next_double();
    double expect = 0.0, xk = x;
    for (int s : w.symbols) {
      expect += xk;  // log e^{x_k}
      xk = f.apply(s, xk);
    }
    const NormPair np = norms(cocycle_along(f, scalar, w, x));
    CHECK(np.log_smax == doctest::Approx(expect).epsilon(1e-10));
    CHECK(np.log_smin == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("cocycle identity L_{uv}(x) = L_v(T_u x) L_u(x)") {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator gen = CocycleGenerator::piecewise_constant(
      {0.0, 0.5, 1.0},
      {Matrix(2, {1.2, 0.3, -0.1, 0.8}), Matrix(2, {0.9, -0.4, 0.2, 1.5})});
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Word u = sample_word(2, 1 + rng.next_u64() % 6, rng);
    const Word v = sample_word(2, 1 + rng.next_u64() % 6, rng);
    const double x = rng.next_double();
    const ScaledMatrix whole = cocycle_along(f, gen, concat(u, v), x);
    const ScaledMatrix pu = cocycle_along(f, gen, u, x);
    const ScaledMatrix pv = cocycle_along(f, gen, v, f.apply_word(u, x));
    Matrix lhs = whole.core;
    lhs *= std::exp(whole.log_scale);
    Matrix rhs = pv.core * pu.core;
    rhs *= std::exp(pv.log_scale + pu.log_scale);
    CHECK(approx_equal(lhs, rhs, 1e-9));
  }
}

TEST_CASE("accumulator: determinant sandwich and agreement with single matrix norms") {
  const MapFamily f = MapFamily::expanding_affine(2);
  const CocycleGenerator gen = CocycleGenerator::piecewise_constant(
      {0.0, 0.5, 1.0},
      {Matrix(2, {1.2, 0.3, -0.1, 0.8}), Matrix(2, {0.9, -0.4, 0.2, 1.5})});
  Rng rng(31337);
  for (int trial = 0; trial < 25; ++trial) {
    const Word w = sample_word(2, 15, rng);
    const double x = rng.next_double();
    CocycleAccumulator acc(2);
    double xk = x;
    for (int s : w.symbols) {
      acc.step(gen.eval(xk));
      xk = f.apply(s, xk);
      const NormPair np = acc.norms();
      CHECK(np.log_smax >= np.log_smin);
      CHECK(2.0 * np.log_smin <= acc.log_abs_det() + 1e-9);
      CHECK(acc.log_abs_det() <= 2.0 * np.log_smax + 1e-9);
    }
    const NormPair direct = norms(cocycle_along(f, gen, w, x));
    const NormPair dual = acc.norms();
    CHECK(dual.log_smax == doctest::Approx(direct.log_smax).epsilon(1e-9));
    CHECK(dual.log_smin == doctest::Approx(direct.log_smin).epsilon(1e-9));
  }
}

TEST_CASE("accumulator survives very long ill-conditioned products") {
  const CocycleGenerator diag = CocycleGenerator::constant(Matrix::diag({2.0, 0.5}));
  const MapFamily f = MapFamily::expanding_affine(1);
  CocycleAccumulator acc(2);
  double x = 0.37;
  for (int i = 0; i < 5000; ++i) {
    acc.step(diag.eval(x));
    x = f.apply(1, x);
  }
  const NormPair np = acc.norms();
  CHECK(np.log_smax == doctest::Approx(5000.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(np.log_smin == doctest::Approx(-5000.0 * std::log(2.0)).epsilon(1e-12));
}
