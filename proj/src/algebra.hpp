#ifndef FLATLAB_ALGEBRA_HPP
#define FLATLAB_ALGEBRA_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "error.hpp"

namespace flatlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Matrix Lie algebra with a fixed basis. Elements are coefficient vectors in
// this basis; real_coeffs marks the compact real forms (su(2), u(m)) whose
// coefficients stay real.
class LieAlgebraBasis {
public:
  struct CEntry {
    int a, b, g;  // [B_b, B_g] component along B_a
    cplx v;
  };

  static std::shared_ptr<const LieAlgebraBasis> make(const std::string& name);

  const std::string& name() const { return name_; }
  int dim() const { return int(basis_.size()); }  // m
  int mat_dim() const { return mat_dim_; }        // d
  bool real_coeffs() const { return real_coeffs_; }
  const std::vector<Matrix>& basis() const { return basis_; }
  const std::vector<CEntry>& structure() const { return c_sparse_; }
  cplx structure_constant(int a, int b, int g) const;

  Matrix matrix_of(const cplx* coeffs) const;
  Matrix matrix_of_real(const double* coeffs) const;

  // Least-squares expansion in the basis; residual (Frobenius) reported if
  // requested. Coefficients of compact real forms are real up to roundoff.
  Eigen::VectorXcd coeffs_of(const Matrix& x, double* residual = nullptr) const;

  // Z = [X, Y] in coefficients.
  void bracket(const double* x, const double* y, double* z) const;
  void bracket(const cplx* x, const cplx* y, cplx* z) const;

  // Ad_g X expanded in the basis. g must be unitary for compact real forms and
  // invertible otherwise.
  Eigen::VectorXcd adjoint(const Matrix& g, const Eigen::VectorXcd& x) const;

  Matrix exp_element(const Eigen::VectorXcd& coeffs) const;

private:
  LieAlgebraBasis() = default;
  void finish_setup();

  std::string name_;
  int mat_dim_ = 0;
  bool real_coeffs_ = true;
  std::vector<Matrix> basis_;
  std::vector<CEntry> c_sparse_;
  Matrix gram_inv_;
};

using AlgebraPtr = std::shared_ptr<const LieAlgebraBasis>;

// Symmetric Ad-invariant multilinear form of degree r, stored as the dense
// tensor p(B_{a1},...,B_{ar}).
class InvariantPolynomial {
public:
  struct Entry {
    std::array<int, 4> idx;
    cplx v;
  };

  InvariantPolynomial() = default;
  InvariantPolynomial(AlgebraPtr algebra, int degree, std::vector<cplx> tensor,
                      std::string descriptor, bool integral_class = false);

  const AlgebraPtr& algebra() const { return algebra_; }
  int degree() const { return degree_; }  // r
  const std::string& descriptor() const { return descriptor_; }
  bool integral_class() const { return integral_class_; }
  bool real_tensor() const { return real_tensor_; }
  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<cplx>& tensor() const { return tensor_; }
  cplx at(const int* idx) const;

  // Multilinear evaluation on r coefficient vectors.
  cplx eval(const std::vector<const cplx*>& args) const;
  double eval_real(const std::vector<const double*>& args) const;

  InvariantPolynomial scaled(cplx factor, const std::string& new_descriptor,
                             bool integral) const;
  static InvariantPolynomial sum(const InvariantPolynomial& p, const InvariantPolynomial& q,
                                 cplx cp, cplx cq, const std::string& descriptor, bool integral);

private:
  AlgebraPtr algebra_;
  int degree_ = 0;
  std::string descriptor_;
  bool integral_class_ = false;
  bool real_tensor_ = true;
  std::vector<cplx> tensor_;
  std::vector<Entry> entries_;
};

// Symmetrization of products of traces over the blocks of a partition:
// tensor(a_1..a_r) = coeff/r! * sum_{perm} prod_blocks tr(B_{a_i1}...B_{a_is}).
InvariantPolynomial build_trace_polynomial(const AlgebraPtr& algebra,
                                           const std::vector<int>& partition, cplx coeff,
                                           const std::string& descriptor,
                                           bool integral_class = false);

// Gram-identity inner product on su(2) in the shipped basis.
InvariantPolynomial su2_inner_product(const AlgebraPtr& su2);

// N_{r,k} = r(r-1)...(r-k+1)
double slot_count_factor(int r, int k);

}  // namespace flatlab

#endif
