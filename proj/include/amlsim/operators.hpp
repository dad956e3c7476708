#pragma once

#include <Eigen/SparseCore>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "amlsim/fock.hpp"

namespace amlsim {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;

// Complex sparse matrix tied to a FockBasis. Operators only combine when they
// share the same basis object. Immutable in spirit: every algebraic operation
// returns a new value.
class SparseOperator {
 public:
  SparseOperator(std::shared_ptr<const FockBasis> basis, SparseMatrix matrix,
                 bool hermitian_hint = false);

  const std::shared_ptr<const FockBasis>& basis_ptr() const { return m_basis; }
  const FockBasis& basis() const { return *m_basis; }
  const SparseMatrix& matrix() const { return m_matrix; }
  std::size_t dim() const { return static_cast<std::size_t>(m_matrix.rows()); }
  std::size_t nnz() const { return static_cast<std::size_t>(m_matrix.nonZeros()); }
  bool hermitian_hint() const { return m_hermitian_hint; }

  SparseOperator adjoint() const;

  // Drop stored entries with |value| <= drop_tol (default construction keeps
  // everything explicitly built).
  SparseOperator pruned(double drop_tol) const;

  // Runs the Hermiticity check and records the outcome as the hint.
  bool verify_hermitian(double tol = 1e-12);

  double max_abs_entry() const;
  Vector apply(const Vector& v) const { return m_matrix * v; }

 private:
  std::shared_ptr<const FockBasis> m_basis;
  SparseMatrix m_matrix;
  bool m_hermitian_hint;
};

SparseOperator identity_operator(std::shared_ptr<const FockBasis> basis);
SparseOperator annihilation(std::shared_ptr<const FockBasis> basis,
                            const std::string& mode);
SparseOperator creation(std::shared_ptr<const FockBasis> basis,
                        const std::string& mode);
SparseOperator number_operator(std::shared_ptr<const FockBasis> basis,
                               const std::string& mode);

// Diagonal operator sum_m weights[m] * n_m (one weight per mode, in basis
// mode order).
SparseOperator weighted_number_operator(std::shared_ptr<const FockBasis> basis,
                                        const std::vector<double>& weights);

// Matrix product applied left-to-right: product({A,B,C}) == A*B*C.
SparseOperator product(const std::vector<SparseOperator>& ops);
SparseOperator linear_combination(
    const std::vector<std::pair<Complex, SparseOperator>>& terms);

bool check_hermitian(const SparseOperator& op, double tol = 1e-12);

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
SparseOperator operator*(Complex scale, const SparseOperator& a);
SparseOperator operator*(double scale, const SparseOperator& a);

}  // namespace amlsim
