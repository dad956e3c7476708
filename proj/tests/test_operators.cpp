#include <doctest.h>

#include <Eigen/Dense>

#include "amlsim/errors.hpp"
#include "amlsim/operators.hpp"
#include "oracles.hpp"

using namespace amlsim;

namespace {

std::shared_ptr<const FockBasis> charge_cut_basis() {
  return build_basis(ModeSet({"c", "b", "g"}, {1, 1, 2}),
                     TruncationSpec::uniform(3, 4, 4));
}

Eigen::MatrixXcd dense(const SparseOperator& op) {
  return Eigen::MatrixXcd(op.matrix());
}

}  // namespace

TEST_CASE("single-mode ladder elements follow sqrt(n)") {
  auto basis = build_basis(ModeSet({"c"}, {1}), TruncationSpec::uniform(1, 2));
  auto a = annihilation(basis, "c");

  Vector two = Vector::Zero(3);
  two[2] = 1.0;
  Vector lowered = a.apply(two);
  CHECK(std::abs(lowered[1] - std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(lowered[0]) == 0.0);
  CHECK(std::abs(lowered[2]) == 0.0);

  Vector vac = Vector::Zero(3);
  vac[0] = 1.0;
  CHECK(a.apply(vac).norm() == 0.0);
}

TEST_CASE("number operator equals a-dagger a") {
  auto basis = build_basis(ModeSet({"c"}, {1}), TruncationSpec::uniform(1, 5));
  auto a = annihilation(basis, "c");
  auto n_from_product = a.adjoint() * a;
  auto n_direct = number_operator(basis, "c");
  CHECK((dense(n_from_product) - dense(n_direct)).norm() < 1e-14);
  for (int n = 0; n <= 5; ++n)
    CHECK(dense(n_direct)(n, n) == Complex(static_cast<double>(n), 0.0));
}

TEST_CASE("annihilation on the charge-cut basis matches the dense oracle") {
  auto basis = charge_cut_basis();
  const auto states = oracles::enumerate_states({4, 4, 4}, {1, 1, 2}, 4);
  for (std::size_t mode = 0; mode < 3; ++mode) {
    auto a = annihilation(basis, basis->modes().labels[mode]);
    const Eigen::MatrixXcd expected = oracles::dense_annihilation(states, mode);
    CHECK((dense(a) - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  // a_g maps (0,0,2) -> sqrt(2) (0,0,1)
  auto a_g = annihilation(basis, "g");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  v[static_cast<Eigen::Index>(basis->index_of_or_throw({0, 0, 2}))] = 1.0;
  Vector w = a_g.apply(v);
  const auto target = basis->index_of_or_throw({0, 0, 1});
  CHECK(std::abs(w[static_cast<Eigen::Index>(target)] - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("identity composes neutrally") {
  auto basis = charge_cut_basis();
  auto a = annihilation(basis, "c");
  auto some_op = a.adjoint() * annihilation(basis, "b") + 0.5 * a;
  auto id = identity_operator(basis);
  CHECK((dense(id * some_op) - dense(some_op)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((dense(some_op * id) - dense(some_op)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator products match the dense oracle entrywise") {
  auto basis = build_basis(ModeSet({"c"}, {1}), TruncationSpec::uniform(1, 4));
  auto a = annihilation(basis, "c");
  auto composed = product({a.adjoint(), a, a});

  const auto states = oracles::enumerate_states({4}, {1}, -1);
  const Eigen::MatrixXcd ad = oracles::dense_annihilation(states, 0);
  const Eigen::MatrixXcd expected = ad.adjoint() * ad * ad;
  CHECK((dense(composed) - expected).cwiseAbs().maxCoeff() < 1e-14);

  // a-dagger a a |3> = 2 sqrt(3) |2>
  Vector three = Vector::Zero(5);
  three[3] = 1.0;
  Vector out = composed.apply(three);
  CHECK(std::abs(out[2] - 2.0 * std::sqrt(3.0)) < 1e-14);
}

TEST_CASE("product and sum respect associativity within roundoff") {
  auto basis = charge_cut_basis();
  auto a = annihilation(basis, "c");
  auto b = annihilation(basis, "b");
  auto g = annihilation(basis, "g");
  auto ab = (a * b) * g.adjoint();
  auto ab2 = a * (b * g.adjoint());
  CHECK((dense(ab) - dense(ab2)).cwiseAbs().maxCoeff() < 1e-14);
  auto s1 = (a + b) + g;
  auto s2 = a + (b + g);
  CHECK((dense(s1) - dense(s2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("hermiticity checks") {
  auto basis = charge_cut_basis();
  auto b = annihilation(basis, "b");
  auto c = annihilation(basis, "c");
  auto hop = b.adjoint() * c;

  auto symmetric = 0.7 * (hop + hop.adjoint());
  CHECK(check_hermitian(symmetric));
  CHECK_FALSE(check_hermitian(hop));
  auto anti = Complex(0.0, 1.0) * (hop - hop.adjoint());
  CHECK(check_hermitian(anti));

  CHECK_FALSE(symmetric.hermitian_hint());
  CHECK(symmetric.verify_hermitian());
  CHECK(symmetric.hermitian_hint());
}

TEST_CASE("commutator [a, a-dagger] is the identity away from cutoffs") {
  auto basis = build_basis(ModeSet({"c", "b"}, {1, 1}),
                           TruncationSpec::uniform(2, 6));
  for (const auto& label : basis->modes().labels) {
    auto a = annihilation(basis, label);
    auto comm = a * a.adjoint() - a.adjoint() * a;
    const auto mat = dense(comm);
    const std::size_t m = basis->modes().index_of(label);
    for (std::size_t i = 0; i < basis->dim(); ++i) {
      if (basis->occupation_of(i, m) > 4) continue;  // within 2 of cutoff 6
      CHECK(std::abs(mat(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(i)) -
                     1.0) < 1e-14);
    }
  }
}

TEST_CASE("charge-conserving monomials never bridge charge sectors") {
  auto basis = charge_cut_basis();
  auto c = annihilation(basis, "c");
  auto b = annihilation(basis, "b");
  auto g = annihilation(basis, "g");
  for (const auto& op : {b.adjoint() * c, g.adjoint() * c * c}) {
    const auto& m = op.matrix();
    for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
      for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
        CHECK(basis->charge_of(static_cast<std::size_t>(it.row())) ==
              basis->charge_of(static_cast<std::size_t>(it.col())));
      }
    }
  }
}

TEST_CASE("basis mismatch and unknown modes are rejected") {
  auto basis = charge_cut_basis();
  auto other = charge_cut_basis();  // distinct object, same layout
  CHECK_THROWS_AS(annihilation(basis, "q"), ConfigError);
  CHECK_THROWS_AS(annihilation(basis, "c") * annihilation(other, "c"),
                  ConfigError);
  CHECK_THROWS_AS(annihilation(basis, "c") + annihilation(other, "c"),
                  ConfigError);
}

TEST_CASE("pruning drops entries at or below the tolerance") {
  auto basis = build_basis(ModeSet({"c"}, {1}), TruncationSpec::uniform(1, 3));
  auto a = annihilation(basis, "c");
  auto op = a + Complex(1e-14, 0.0) * identity_operator(basis);
  CHECK(op.nnz() == 7);
  auto pruned = op.pruned(1e-12);
  CHECK(pruned.nnz() == 3);
}
