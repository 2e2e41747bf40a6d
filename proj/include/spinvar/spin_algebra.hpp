#pragma once

// Spin-S operators on tensor-product Hilbert spaces.
//
// Basis convention: each site uses the S^z eigenbasis ordered by descending m,
// and site 0 is the leftmost Kronecker factor. A basis index therefore reads
// as a base-(2S+1) number whose most significant digit belongs to site 0.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace spinvar {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Spin magnitude S stored as the integer 2S, so half-integers are exact.
class SpinMagnitude {
 public:
  /// Throws InvalidArgument unless 2S is a positive integer.
  static SpinMagnitude from_value(double spin);
  static SpinMagnitude from_twice(int twice_spin);

  int twice() const { return twice_; }
  double value() const { return 0.5 * twice_; }
  int local_dim() const { return twice_ + 1; }

  friend bool operator==(SpinMagnitude, SpinMagnitude) = default;

 private:
  explicit SpinMagnitude(int twice_spin) : twice_(twice_spin) {}
  int twice_;
};

struct LocalSpin {
  SpinMagnitude spin;
  Matrix sx;
  Matrix sy;
  Matrix sz;

  int dim() const { return spin.local_dim(); }
};

LocalSpin local_spin(SpinMagnitude spin);
LocalSpin local_spin(double spin);

/// Dense Hermitian matrix, validated (and exactly symmetrized) on construction.
class HermitianOperator {
 public:
  static constexpr double kHermiticityTolerance = 1e-12;

  HermitianOperator() = default;
  /// Throws InvalidArgument if the input is not square or not Hermitian
  /// to within kHermiticityTolerance relative to its largest entry.
  explicit HermitianOperator(Matrix entries);

  static HermitianOperator identity(std::size_t dim);
  static HermitianOperator zero(std::size_t dim);
  static HermitianOperator diagonal(const RealVector& values);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }

  /// True when every imaginary part is exactly zero.
  bool is_real() const { return is_real_; }
  /// True when every off-diagonal entry is exactly zero.
  bool is_diagonal() const { return is_diagonal_; }
  RealVector diagonal_values() const { return entries_.diagonal().real(); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double scale);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  void refresh_flags();

  Matrix entries_;
  bool is_real_ = true;
  bool is_diagonal_ = true;
};

/// N sites of equal spin S; total dimension (2S+1)^N, capped.
class HilbertSpace {
 public:
  static constexpr std::size_t kDefaultDimCap = 4096;

  /// Throws CapacityError if (2S+1)^sites exceeds dim_cap.
  HilbertSpace(int sites, SpinMagnitude spin, std::size_t dim_cap = kDefaultDimCap);

  int sites() const { return sites_; }
  SpinMagnitude spin() const { return spin_; }
  int local_dim() const { return spin_.local_dim(); }
  std::size_t total_dim() const { return total_dim_; }

  /// Digit (0 = largest m) of `site` within basis index `state`.
  int digit(std::size_t state, int site) const;
  /// Stride of `site` in the basis index.
  std::size_t stride(int site) const { return strides_[static_cast<std::size_t>(site)]; }

 private:
  int sites_;
  SpinMagnitude spin_;
  std::size_t total_dim_;
  std::vector<std::size_t> strides_;
};

/// id ⊗ … ⊗ local ⊗ … ⊗ id with `local` at `site`.
HermitianOperator embed(const HilbertSpace& space, int site, const Matrix& local);

/// Product of local matrices acting on distinct sites, embedded in the full
/// space. Each factor must be Hermitian; the product is then Hermitian too.
HermitianOperator embed_product(const HilbertSpace& space,
                                const std::vector<std::pair<int, Matrix>>& factors);

/// AB - BA.
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix commutator(const HermitianOperator& a, const HermitianOperator& b);

/// Largest |eigenvalue|.
double operator_norm(const HermitianOperator& op);

/// Largest absolute entry.
double max_abs(const Matrix& m);

}  // namespace spinvar
