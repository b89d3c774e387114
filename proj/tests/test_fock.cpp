#include "doctest.h"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/MatrixFunctions>

#include "gjj/error.hpp"
#include "gjj/fock.hpp"

using namespace gjj;
using namespace gjj::fock;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// U^dag U - I restricted to the block below the top `skip` levels.
double unitarity_defect(const Matrix& u, int skip) {
  const int n = static_cast<int>(u.rows()) - skip;
  const Matrix d = (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).topLeftCorner(n, n);
  return max_abs(d);
}

}  // namespace

TEST_CASE("ladder operator entries and commutator") {
  const Matrix a2 = ladder(2).mat();
  CHECK(a2(0, 1) == cplx(1.0, 0.0));
  CHECK(std::abs(a2(0, 0)) + std::abs(a2(1, 0)) + std::abs(a2(1, 1)) == 0.0);

  const int dim = 12;
  const Matrix a = ladder(dim).mat();
  const Matrix n = a.adjoint() * a;
  for (int k = 0; k < dim - 1; ++k) {
    const Vector out = n * fock_state(k, dim);
    CHECK((out - k * fock_state(k, dim)).norm() < 1e-14);
  }
  const Matrix comm = a * a.adjoint() - a.adjoint() * a;
  CHECK(max_abs(comm.topLeftCorner(dim - 1, dim - 1) - Matrix::Identity(dim - 1, dim - 1)) < 1e-14);
  CHECK(std::abs(comm(dim - 1, dim - 1) - cplx(1.0 - dim, 0.0)) < 1e-12);
  CHECK(max_abs(number(dim).mat() - n) < 1e-14);

  CHECK_THROWS_AS(ladder(1), Error);
  try {
    ladder(0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_dimension);
  }
}

TEST_CASE("tensor products and partial traces") {
  const Operator i6 = tensor({identity(2), identity(3)});
  CHECK(max_abs(i6.mat() - Matrix::Identity(6, 6)) == 0.0);
  CHECK(i6.factor_dims() == std::vector<int>{2, 3});

  // Product state: the kept factor comes back exactly.
  const Vector a = coherent(cplx(0.3, 0.1), 6, 1e-3);
  const Vector b = Vector::Random(4).normalized();
  Vector ab(24);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) ab(i * 4 + j) = a(i) * b(j);
  const DensityMatrix rho = DensityMatrix::pure(ab / ab.norm(), {6, 4});
  const Matrix ra = ptrace(rho, 0).mat();
  const Matrix rb = ptrace(rho, 1).mat();
  const Vector an = a / a.norm();
  CHECK(max_abs(ra - an * an.adjoint()) < 1e-14);
  CHECK(max_abs(rb - b * b.adjoint()) < 1e-14);
  CHECK(std::abs(ra.trace() - cplx(1.0, 0.0)) < 1e-12);

  // Bell state on 2 x 2.
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix rbell = DensityMatrix::pure(bell, {2, 2});
  CHECK(max_abs(ptrace(rbell, 0).mat() - 0.5 * Matrix::Identity(2, 2)) < 1e-15);

  CHECK_THROWS_AS(ptrace(rho.mat(), {5, 4}, 0), Error);
  CHECK_THROWS_AS(embed(ladder(3), 0, {4, 2}), Error);
  const Operator b_embedded = embed(ladder(4), 1, {6, 4});
  CHECK(b_embedded.dim() == 24);
  CHECK(std::abs(b_embedded.mat()(1, 2) - cplx(std::sqrt(2.0), 0.0)) < 1e-15);
}

TEST_CASE("squeeze and displacement unitaries") {
  const int dim = 60;
  CHECK(max_abs(squeeze(0.0, dim).mat() - Matrix::Identity(dim, dim)) < 1e-12);
  CHECK(max_abs(displacement(0.0, dim).mat() - Matrix::Identity(dim, dim)) < 1e-12);
  const Matrix s = squeeze(0.5, dim).mat();
  const Matrix d = displacement(cplx(1.2, -0.4), dim).mat();
  CHECK(unitarity_defect(s, 2) < 1e-10);
  CHECK(unitarity_defect(d, 2) < 1e-10);
  CHECK(max_abs(s * squeeze(-0.5, dim).mat() - Matrix::Identity(dim, dim)) < 1e-9);
  CHECK(max_abs(d * displacement(cplx(-1.2, 0.4), dim).mat() - Matrix::Identity(dim, dim)) < 1e-9);

  // Independent exponential (Pade/scaling-squaring) of the same generators,
  // compared on the well-resolved low block.
  const Matrix a = ladder(dim).mat();
  const Matrix s_ref = (0.25 * (a * a - a.adjoint() * a.adjoint())).exp();
  CHECK(max_abs((s - s_ref).topLeftCorner(20, 20)) < 1e-10);
  const cplx alpha(1.2, -0.4);
  const Matrix d_ref = (alpha * a.adjoint() - std::conj(alpha) * a).exp();
  CHECK(max_abs((d - d_ref).topLeftCorner(20, 20)) < 1e-10);
}

TEST_CASE("squeeze convention: S^dag b S = b cosh r - b^dag sinh r") {
  const int big = 120, keep = 30;
  const double r = 0.4;
  const Matrix s = squeeze(r, big).mat();
  const Matrix a = ladder(big).mat();
  const Matrix lhs = s.adjoint() * a * s;
  const Matrix rhs = a * std::cosh(r) - a.adjoint() * std::sinh(r);
  CHECK(max_abs((lhs - rhs).topLeftCorner(keep, keep)) < 1e-10);
}

TEST_CASE("squeezed vacuum quadrature variance") {
  const int dim = 80;
  for (double r : {0.2, 0.4, 0.8}) {
    // S(r)|0> from the unitary itself; x = (b + b^dag)/sqrt 2.
    const Vector psi = squeeze(r, 2 * dim).mat().col(0).head(dim);
    const Matrix x = quadrature(dim).mat() / std::sqrt(2.0);
    const cplx mean = (psi.adjoint() * x * psi)(0, 0);
    const cplx second = (psi.adjoint() * x * x * psi)(0, 0);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(second.real() == doctest::Approx(std::exp(-2.0 * r) / 2.0).epsilon(1e-9));
    // The library's S^dag(r)|0> is the opposite squeeze.
    const Vector sv = squeezed_vacuum(r, dim);
    const cplx second_sv = (sv.adjoint() * x * x * sv)(0, 0);
    CHECK(second_sv.real() == doctest::Approx(std::exp(2.0 * r) / 2.0).epsilon(1e-9));
  }
}

TEST_CASE("coherent, Fock and thermal states") {
  const int dim = 40;
  const cplx beta(1.5, 0.7);
  const Vector c = coherent(beta, dim);
  const DensityMatrix rc = DensityMatrix::pure(c);
  const double n = (c.adjoint() * number(dim).mat() * c)(0, 0).real();
  CHECK(n == doctest::Approx(std::norm(beta)).epsilon(1e-9));
  CHECK(c.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Displacement of the vacuum gives the same state.
  const Vector dv = displacement(beta, 2 * dim).mat().col(0).head(dim);
  CHECK(std::abs((dv.adjoint() * c)(0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rc.trace_deviation() < 1e-12);

  try {
    coherent(cplx(4.0, 0.0), 12);
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.leakage() > 1e-8);
    CHECK(e.kind() == ErrorKind::truncation);
  }

  const DensityMatrix th = thermal(0.7, dim);
  for (int k = 0; k + 1 < 10; ++k) {
    CHECK(th.mat()(k + 1, k + 1).real() / th.mat()(k, k).real() == doctest::Approx(0.7 / 1.7).epsilon(1e-12));
  }
  CHECK(max_abs(th.mat() - Matrix(th.mat().diagonal().asDiagonal())) == 0.0);
  CHECK_THROWS_AS(thermal(10.0, 20), TruncationError);
  CHECK_THROWS_AS(fock_state(5, 5), Error);
}

TEST_CASE("squeezed thermal state has the expected occupation") {
  const int dim = 80;
  const double nbar = 0.6, r = 0.4;
  const DensityMatrix st = squeezed_thermal(nbar, r, dim);
  st.validate();
  double n = 0.0;
  for (int k = 0; k < dim; ++k) n += k * st.mat()(k, k).real();
  CHECK(n == doctest::Approx(nbar * std::cosh(2.0 * r) + std::sinh(r) * std::sinh(r)).epsilon(1e-9));
  // Squeezing back with S(r) recovers the thermal state.
  const int big = 200;
  Matrix padded = Matrix::Zero(big, big);
  padded.topLeftCorner(dim, dim) = st.mat();
  const Matrix s = squeeze(r, big).mat();
  const Matrix back = (s * padded * s.adjoint()).topLeftCorner(20, 20);
  CHECK(max_abs(back - thermal(nbar, big).mat().topLeftCorner(20, 20)) < 1e-9);
}

TEST_CASE("density-matrix validation") {
  Matrix bad = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(DensityMatrix(bad, true), Error);
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix(neg, true), Error);
  Matrix nonherm = 0.5 * Matrix::Identity(2, 2);
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(nonherm, true), Error);
  const DensityMatrix ok(0.5 * Matrix::Identity(2, 2));
  CHECK(ok.min_eigenvalue() == doctest::Approx(0.5));
}

TEST_CASE("leakage, fidelity and trace distance") {
  const int dim = 10;
  const DensityMatrix top = DensityMatrix::pure(fock_state(dim - 1, dim));
  CHECK(top_leakage(top) == doctest::Approx(1.0));
  CHECK_THROWS_AS(check_truncation(top, 1e-3, "probe"), TruncationError);
  const DensityMatrix vac = DensityMatrix::pure(fock_state(0, dim));
  CHECK(top_leakage(vac) == 0.0);
  CHECK(fidelity(vac, fock_state(0, dim)) == doctest::Approx(1.0));
  CHECK(fidelity(vac, fock_state(1, dim)) == doctest::Approx(0.0));
  CHECK(trace_distance(vac.mat(), top.mat()) == doctest::Approx(1.0));
  CHECK(trace_distance(vac.mat(), vac.mat()) < 1e-15);

  CHECK(bose_occupation(1.0, 0.0) == 0.0);
  CHECK(bose_occupation(1.0, 2.0) == doctest::Approx(1.0 / (std::exp(0.5) - 1.0)).epsilon(1e-14));
  CHECK(bose_occupation(1e-8, 1.0) == doctest::Approx(1e8).epsilon(1e-7));
}

TEST_CASE("operator algebra keeps factor dimensions") {
  const Operator a = embed(ladder(3), 0, {3, 2});
  const Operator b = embed(ladder(2), 1, {3, 2});
  const Operator sum = a + b;
  CHECK(sum.factor_dims() == std::vector<int>{3, 2});
  CHECK(max_abs((a * b - b * a).mat()) < 1e-15);
  const Operator h = a.adjoint() * a + 0.5 * (b + b.adjoint());
  CHECK(h.is_hermitian());
  CHECK(!(a.is_hermitian()));
  const Matrix u = expm_hermitian(h.mat(), 0.7);
  CHECK(unitarity_defect(u, 0) < 1e-12);
}
