#pragma once
// Small dense linear algebra and the concave maximizer shared by the
// Fisher, Cramer-Rao and Kullback-bound code.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace wentropy {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  double trace() const;
  double max_abs() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);

// Cholesky factor A = L L^T of a symmetric positive-definite matrix.
struct Cholesky {
  Matrix lower;
  double logdet = 0.0;

  std::vector<double> solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;
};

// Returns nullopt when A is not numerically positive definite.
std::optional<Cholesky> spd_factor(const Matrix& a);

// Inverse of a symmetric positive-definite matrix; throws if A is singular.
Matrix spd_inverse(const Matrix& a);

// (A + A^T) / 2, or throws if the asymmetry exceeds sym_tol.
Matrix symmetrize(const Matrix& a, double sym_tol = 1e-10);

// Smallest eigenvalue of a symmetric matrix, located by bisection on the
// success of a Cholesky factorization of A - tI.
double min_eig_margin(const Matrix& a, double sym_tol = 1e-10);

struct SymEig {
  std::vector<double> eigenvalues;  // ascending
  Matrix vectors;                   // columns
  double residual = 0.0;            // max |A v - lambda v|
};

// Cyclic Jacobi eigen-decomposition for small symmetric matrices.
SymEig sym_eig(const Matrix& a, double sym_tol = 1e-10);

using VectorFn = std::function<std::vector<double>(std::span<const double>)>;
using ScalarFn = std::function<double(std::span<const double>)>;

// Central-difference Jacobian (p x m) with step rel_step * (1 + |theta_j|).
Matrix finite_diff_jacobian(const VectorFn& fn, std::span<const double> theta,
                            double rel_step = 1e-5);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct MaximizeOptions {
  std::size_t max_iter = 20000;
  double grad_tol = 1e-10;
  double golden_tol = 1e-10;
  std::size_t max_sweeps = 200;
};

struct MaximizeResult {
  std::vector<double> argmax;
  double value = 0.0;
  double foc_residual = 0.0;  // projected-gradient norm, or last sweep gain
  bool at_boundary = false;
  std::size_t iterations = 0;
};

// Maximizes a concave function over a box from several starts. With a
// gradient it runs projected gradient ascent with backtracking, otherwise
// coordinate-wise golden-section sweeps. Starts are independent; the best
// value wins with ties broken by the lexicographically smaller argmax.
MaximizeResult maximize_concave(const ScalarFn& fn, const VectorFn* grad,
                                const std::vector<std::vector<double>>& starts,
                                const Box& box, const MaximizeOptions& opts = {});

// Golden-section search for the maximum of a unimodal function on [a, b].
struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
};
GoldenResult golden_section_max(const std::function<double(double)>& fn, double a,
                                double b, double tol = 1e-10,
                                std::size_t max_iter = 300);

}  // namespace wentropy
