#include "algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace flatlab {

namespace {
constexpr double kStructureTol = 1e-13;

std::vector<Matrix> unitary_algebra_basis(int n) {
  // Orthonormal anti-Hermitian basis of u(n) under <X,Y> = tr(X^dag Y):
  // i E_kk, then (E_kl - E_lk)/sqrt(2), i(E_kl + E_lk)/sqrt(2) for k < l.
  std::vector<Matrix> out;
  const cplx I(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    Matrix b = Matrix::Zero(n, n);
    b(k, k) = I;
    out.push_back(b);
  }
  const double s = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      Matrix a = Matrix::Zero(n, n);
      a(k, l) = s;
      a(l, k) = -s;
      out.push_back(a);
      Matrix b = Matrix::Zero(n, n);
      b(k, l) = I * s;
      b(l, k) = I * s;
      out.push_back(b);
    }
  return out;
}

std::vector<Matrix> gl_basis(int n) {
  std::vector<Matrix> out;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      Matrix b = Matrix::Zero(n, n);
      b(k, l) = 1.0;
      out.push_back(b);
    }
  return out;
}
}  // namespace

std::shared_ptr<const LieAlgebraBasis> LieAlgebraBasis::make(const std::string& name) {
  // one immutable instance per name, so handle identity doubles as algebra
  // identity everywhere downstream
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const LieAlgebraBasis>> registry;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = registry.find(name);
    if (it != registry.end()) return it->second;
  }
  auto alg = std::shared_ptr<LieAlgebraBasis>(new LieAlgebraBasis());
  alg->name_ = name;
  const cplx I(0.0, 1.0);
  if (name == "su2") {
    // B_j = sigma_j / (2i), anti-Hermitian, [B_1,B_2] = B_3 cyclic.
    alg->mat_dim_ = 2;
    alg->real_coeffs_ = true;
    Matrix s1(2, 2), s2(2, 2), s3(2, 2);
    s1 << 0, 1, 1, 0;
    s2 << 0, -I, I, 0;
    s3 << 1, 0, 0, -1;
    const cplx f = 1.0 / (2.0 * I);
    alg->basis_ = {f * s1, f * s2, f * s3};
  } else if (name == "u1" || name == "u2" || name == "u3" || name == "u4") {
    int n = name[1] - '0';
    alg->mat_dim_ = n;
    alg->real_coeffs_ = true;
    alg->basis_ = unitary_algebra_basis(n);
  } else if (name == "gl1" || name == "gl2" || name == "gl3") {
    int n = name[2] - '0';
    alg->mat_dim_ = n;
    alg->real_coeffs_ = false;
    alg->basis_ = gl_basis(n);
  } else {
    fail(ErrorCode::config_error, "unknown algebra '" + name + "'");
  }
  FLATLAB_REQUIRE(int(alg->basis_.size()) <= 16, ErrorCode::config_error,
                  "algebra dimension above supported limit 16");
  alg->finish_setup();
  std::lock_guard<std::mutex> lock(mu);
  return registry.emplace(name, alg).first->second;
}

void LieAlgebraBasis::finish_setup() {
  const int m = dim();
  Matrix gram(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) gram(a, b) = (basis_[a].adjoint() * basis_[b]).trace();
  gram_inv_ = gram.inverse();

  for (int b = 0; b < m; ++b)
    for (int g = 0; g < m; ++g) {
      if (b == g) continue;
      Matrix br = basis_[b] * basis_[g] - basis_[g] * basis_[b];
      Eigen::VectorXcd c = coeffs_of(br);
      for (int a = 0; a < m; ++a)
        if (std::abs(c(a)) > kStructureTol) c_sparse_.push_back({a, b, g, c(a)});
    }
}

cplx LieAlgebraBasis::structure_constant(int a, int b, int g) const {
  for (const auto& e : c_sparse_)
    if (e.a == a && e.b == b && e.g == g) return e.v;
  return cplx(0.0);
}

Matrix LieAlgebraBasis::matrix_of(const cplx* coeffs) const {
  Matrix x = Matrix::Zero(mat_dim_, mat_dim_);
  for (int a = 0; a < dim(); ++a) x += coeffs[a] * basis_[a];
  return x;
}

Matrix LieAlgebraBasis::matrix_of_real(const double* coeffs) const {
  Matrix x = Matrix::Zero(mat_dim_, mat_dim_);
  for (int a = 0; a < dim(); ++a) x += coeffs[a] * basis_[a];
  return x;
}

Eigen::VectorXcd LieAlgebraBasis::coeffs_of(const Matrix& x, double* residual) const {
  const int m = dim();
  Eigen::VectorXcd rhs(m);
  for (int a = 0; a < m; ++a) rhs(a) = (basis_[a].adjoint() * x).trace();
  Eigen::VectorXcd c = gram_inv_ * rhs;
  if (residual) {
    Matrix back = Matrix::Zero(mat_dim_, mat_dim_);
    for (int a = 0; a < m; ++a) back += c(a) * basis_[a];
    *residual = (back - x).norm();
  }
  return c;
}

void LieAlgebraBasis::bracket(const double* x, const double* y, double* z) const {
  for (int a = 0; a < dim(); ++a) z[a] = 0.0;
  for (const auto& e : c_sparse_) z[e.a] += e.v.real() * x[e.b] * y[e.g];
}

void LieAlgebraBasis::bracket(const cplx* x, const cplx* y, cplx* z) const {
  for (int a = 0; a < dim(); ++a) z[a] = cplx(0.0);
  for (const auto& e : c_sparse_) z[e.a] += e.v * x[e.b] * y[e.g];
}

Eigen::VectorXcd LieAlgebraBasis::adjoint(const Matrix& g, const Eigen::VectorXcd& x) const {
  FLATLAB_REQUIRE(g.rows() == mat_dim_ && g.cols() == mat_dim_, ErrorCode::dimension_mismatch,
                  "group element has wrong shape");
  Matrix ginv;
  if (real_coeffs_) {
    double udef = (g.adjoint() * g - Matrix::Identity(mat_dim_, mat_dim_)).norm();
    FLATLAB_REQUIRE(udef <= 1e-10, ErrorCode::invalid_group_element,
                    "group element is not unitary (defect " << udef << ")");
    ginv = g.adjoint();
  } else {
    Eigen::FullPivLU<Matrix> lu(g);
    FLATLAB_REQUIRE(lu.isInvertible(), ErrorCode::invalid_group_element,
                    "group element is singular");
    ginv = lu.inverse();
  }
  Matrix xm = matrix_of(x.data());
  double res = 0.0;
  Eigen::VectorXcd out = coeffs_of(g * xm * ginv, &res);
  FLATLAB_REQUIRE(res < 1e-10, ErrorCode::invalid_group_element,
                  "adjoint image left the algebra (residual " << res << ")");
  return out;
}

Matrix LieAlgebraBasis::exp_element(const Eigen::VectorXcd& coeffs) const {
  return matrix_of(coeffs.data()).exp();
}

InvariantPolynomial::InvariantPolynomial(AlgebraPtr algebra, int degree, std::vector<cplx> tensor,
                                         std::string descriptor, bool integral_class)
    : algebra_(std::move(algebra)),
      degree_(degree),
      descriptor_(std::move(descriptor)),
      integral_class_(integral_class),
      tensor_(std::move(tensor)) {
  FLATLAB_REQUIRE(degree_ >= 1 && degree_ <= 4, ErrorCode::arity_error,
                  "polynomial degree must be in 1..4, got " << degree_);
  const int m = algebra_->dim();
  std::size_t expect = 1;
  for (int i = 0; i < degree_; ++i) expect *= std::size_t(m);
  FLATLAB_REQUIRE(tensor_.size() == expect, ErrorCode::dimension_mismatch,
                  "tensor size does not match m^r");
  real_tensor_ = true;
  for (const auto& v : tensor_)
    if (std::abs(v.imag()) > 1e-14 * (1.0 + std::abs(v.real()))) {
      real_tensor_ = false;
      break;
    }
  for (std::size_t flat = 0; flat < tensor_.size(); ++flat) {
    if (std::abs(tensor_[flat]) < 1e-15) continue;
    Entry e;
    e.v = tensor_[flat];
    std::size_t rest = flat;
    for (int i = degree_ - 1; i >= 0; --i) {
      e.idx[std::size_t(i)] = int(rest % m);
      rest /= m;
    }
    entries_.push_back(e);
  }
}

cplx InvariantPolynomial::at(const int* idx) const {
  const int m = algebra_->dim();
  std::size_t flat = 0;
  for (int i = 0; i < degree_; ++i) flat = flat * m + std::size_t(idx[i]);
  return tensor_[flat];
}

cplx InvariantPolynomial::eval(const std::vector<const cplx*>& args) const {
  FLATLAB_REQUIRE(int(args.size()) == degree_, ErrorCode::arity_error,
                  "polynomial of degree " << degree_ << " applied to " << args.size()
                                          << " arguments");
  cplx acc(0.0);
  for (const auto& e : entries_) {
    cplx t = e.v;
    for (int i = 0; i < degree_; ++i) t *= args[std::size_t(i)][e.idx[std::size_t(i)]];
    acc += t;
  }
  return acc;
}

double InvariantPolynomial::eval_real(const std::vector<const double*>& args) const {
  FLATLAB_REQUIRE(int(args.size()) == degree_, ErrorCode::arity_error,
                  "polynomial of degree " << degree_ << " applied to " << args.size()
                                          << " arguments");
  double acc = 0.0;
  for (const auto& e : entries_) {
    double t = e.v.real();
    for (int i = 0; i < degree_; ++i) t *= args[std::size_t(i)][e.idx[std::size_t(i)]];
    acc += t;
  }
  return acc;
}

InvariantPolynomial InvariantPolynomial::scaled(cplx factor, const std::string& new_descriptor,
                                                bool integral) const {
  std::vector<cplx> t = tensor_;
  for (auto& v : t) v *= factor;
  return InvariantPolynomial(algebra_, degree_, std::move(t), new_descriptor, integral);
}

InvariantPolynomial InvariantPolynomial::sum(const InvariantPolynomial& p,
                                             const InvariantPolynomial& q, cplx cp, cplx cq,
                                             const std::string& descriptor, bool integral) {
  FLATLAB_REQUIRE(p.degree() == q.degree() && p.algebra() == q.algebra(),
                  ErrorCode::dimension_mismatch, "polynomial sum needs matching degree/algebra");
  std::vector<cplx> t(p.tensor_.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = cp * p.tensor_[i] + cq * q.tensor_[i];
  return InvariantPolynomial(p.algebra(), p.degree(), std::move(t), descriptor, integral);
}

InvariantPolynomial build_trace_polynomial(const AlgebraPtr& algebra,
                                           const std::vector<int>& partition, cplx coeff,
                                           const std::string& descriptor, bool integral_class) {
  FLATLAB_REQUIRE(!partition.empty(), ErrorCode::arity_error, "empty trace partition");
  int r = 0;
  for (int s : partition) {
    FLATLAB_REQUIRE(s >= 1, ErrorCode::arity_error, "partition blocks must be positive");
    r += s;
  }
  FLATLAB_REQUIRE(r <= 4, ErrorCode::arity_error, "trace polynomial degree above 4");
  const int m = algebra->dim();

  std::vector<int> perm(r);
  for (int i = 0; i < r; ++i) perm[i] = i;
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double inv_fact = 1.0 / double(perms.size());

  std::size_t total = 1;
  for (int i = 0; i < r; ++i) total *= std::size_t(m);
  std::vector<cplx> tensor(total);

  std::vector<int> idx(r);
  const auto& B = algebra->basis();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int i = r - 1; i >= 0; --i) {
      idx[std::size_t(i)] = int(rest % m);
      rest /= m;
    }
    cplx acc(0.0);
    for (const auto& pm : perms) {
      cplx term(1.0);
      int pos = 0;
      for (int s : partition) {
        Matrix prod = B[std::size_t(idx[std::size_t(pm[std::size_t(pos)])])];
        for (int j = 1; j < s; ++j)
          prod = prod * B[std::size_t(idx[std::size_t(pm[std::size_t(pos + j)])])];
        term *= prod.trace();
        pos += s;
      }
      acc += term;
    }
    tensor[flat] = coeff * acc * inv_fact;
  }
  return InvariantPolynomial(algebra, r, std::move(tensor), descriptor, integral_class);
}

InvariantPolynomial su2_inner_product(const AlgebraPtr& su2) {
  FLATLAB_REQUIRE(su2->name() == "su2", ErrorCode::config_error,
                  "su2_inner_product needs the su2 algebra");
  const int m = su2->dim();
  std::vector<cplx> tensor(std::size_t(m) * m, cplx(0.0));
  for (int a = 0; a < m; ++a) tensor[std::size_t(a) * m + a] = 1.0;
  return InvariantPolynomial(su2, 2, std::move(tensor), "su2_inner_product", false);
}

double slot_count_factor(int r, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= double(r - i);
  return f;
}

}  // namespace flatlab
