#include "amlsim/operators.hpp"

#include <cmath>

#include "amlsim/errors.hpp"

namespace amlsim {

namespace {

void require_same_basis(const SparseOperator& a, const SparseOperator& b) {
  if (a.basis_ptr() != b.basis_ptr())
    throw ConfigError("SparseOperator: operands live on different bases");
}

}  // namespace

SparseOperator::SparseOperator(std::shared_ptr<const FockBasis> basis,
                               SparseMatrix matrix, bool hermitian_hint)
    : m_basis(std::move(basis)),
      m_matrix(std::move(matrix)),
      m_hermitian_hint(hermitian_hint) {
  if (!m_basis) throw ConfigError("SparseOperator: null basis");
  const auto n = static_cast<Eigen::Index>(m_basis->dim());
  if (m_matrix.rows() != n || m_matrix.cols() != n)
    throw ConfigError("SparseOperator: matrix shape does not match basis");
  if (!m_matrix.isCompressed()) m_matrix.makeCompressed();
}

SparseOperator SparseOperator::adjoint() const {
  SparseMatrix adj = m_matrix.adjoint();
  return SparseOperator(m_basis, std::move(adj), m_hermitian_hint);
}

SparseOperator SparseOperator::pruned(double drop_tol) const {
  SparseMatrix m = m_matrix;
  m.prune([drop_tol](Eigen::Index, Eigen::Index, const Complex& v) {
    return std::abs(v) > drop_tol;
  });
  m.makeCompressed();
  return SparseOperator(m_basis, std::move(m), m_hermitian_hint);
}

bool SparseOperator::verify_hermitian(double tol) {
  m_hermitian_hint = check_hermitian(*this, tol);
  return m_hermitian_hint;
}

double SparseOperator::max_abs_entry() const {
  double mx = 0.0;
  for (Eigen::Index k = 0; k < m_matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m_matrix, k); it; ++it)
      mx = std::max(mx, std::abs(it.value()));
  return mx;
}

SparseOperator identity_operator(std::shared_ptr<const FockBasis> basis) {
  const auto n = static_cast<Eigen::Index>(basis->dim());
  SparseMatrix m(n, n);
  m.setIdentity();
  return SparseOperator(std::move(basis), std::move(m), true);
}

SparseOperator annihilation(std::shared_ptr<const FockBasis> basis,
                            const std::string& mode) {
  const std::size_t m = basis->modes().index_of(mode);
  const auto n = static_cast<Eigen::Index>(basis->dim());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const int occ = basis->occupation_of(i, m);
    if (occ == 0) continue;
    // <..., occ-1, ...| a |..., occ, ...> = sqrt(occ); the lowered state is
    // always inside the basis because admissible occupations are closed
    // downward.
    const auto j = basis->lowered(i, m);
    triplets.emplace_back(static_cast<Eigen::Index>(*j),
                          static_cast<Eigen::Index>(i),
                          Complex(std::sqrt(static_cast<double>(occ)), 0.0));
  }
  SparseMatrix mat(n, n);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return SparseOperator(std::move(basis), std::move(mat), false);
}

SparseOperator creation(std::shared_ptr<const FockBasis> basis,
                        const std::string& mode) {
  return annihilation(std::move(basis), mode).adjoint();
}

SparseOperator number_operator(std::shared_ptr<const FockBasis> basis,
                               const std::string& mode) {
  const std::size_t m = basis->modes().index_of(mode);
  const auto n = static_cast<Eigen::Index>(basis->dim());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    const int occ = basis->occupation_of(i, m);
    if (occ > 0)
      triplets.emplace_back(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(i),
                            Complex(static_cast<double>(occ), 0.0));
  }
  SparseMatrix mat(n, n);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return SparseOperator(std::move(basis), std::move(mat), true);
}

SparseOperator weighted_number_operator(std::shared_ptr<const FockBasis> basis,
                                        const std::vector<double>& weights) {
  if (weights.size() != basis->n_modes())
    throw ConfigError("weighted_number_operator: one weight per mode required");
  const auto n = static_cast<Eigen::Index>(basis->dim());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t i = 0; i < basis->dim(); ++i) {
    double v = 0.0;
    for (std::size_t m = 0; m < weights.size(); ++m)
      v += weights[m] * basis->occupation_of(i, m);
    if (v != 0.0)
      triplets.emplace_back(static_cast<Eigen::Index>(i),
                            static_cast<Eigen::Index>(i), Complex(v, 0.0));
  }
  SparseMatrix mat(n, n);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return SparseOperator(std::move(basis), std::move(mat), true);
}

SparseOperator product(const std::vector<SparseOperator>& ops) {
  if (ops.empty()) throw ConfigError("product: empty operator sequence");
  SparseOperator result = ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) result = result * ops[i];
  return result;
}

SparseOperator linear_combination(
    const std::vector<std::pair<Complex, SparseOperator>>& terms) {
  if (terms.empty()) throw ConfigError("linear_combination: no terms");
  SparseOperator result = terms.front().first * terms.front().second;
  for (std::size_t i = 1; i < terms.size(); ++i)
    result = result + terms[i].first * terms[i].second;
  return result;
}

bool check_hermitian(const SparseOperator& op, double tol) {
  SparseMatrix adj = op.matrix().adjoint();
  SparseMatrix diff = op.matrix() - adj;
  double mx = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      mx = std::max(mx, std::abs(it.value()));
  return mx <= tol;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_basis(a, b);
  SparseMatrix m = a.matrix() * b.matrix();
  return SparseOperator(a.basis_ptr(), std::move(m), false);
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_basis(a, b);
  SparseMatrix m = a.matrix() + b.matrix();
  return SparseOperator(a.basis_ptr(), std::move(m), false);
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_basis(a, b);
  SparseMatrix m = a.matrix() - b.matrix();
  return SparseOperator(a.basis_ptr(), std::move(m), false);
}

SparseOperator operator*(Complex scale, const SparseOperator& a) {
  SparseMatrix m = scale * a.matrix();
  return SparseOperator(a.basis_ptr(), std::move(m), false);
}

SparseOperator operator*(double scale, const SparseOperator& a) {
  return Complex(scale, 0.0) * a;
}

}  // namespace amlsim
