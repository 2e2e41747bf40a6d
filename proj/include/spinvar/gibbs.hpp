#pragma once

// Spectral core: eigendecomposition, log Z, Gibbs expectations and Duhamel
// (imaginary-time averaged) two-point functions. Diagonal (classical) models
// are handled as plain energy tables without any matrix.

#include "spinvar/spin_algebra.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace spinvar {

/// Real diagonal observable or energy over an enumerated configuration space.
class DiagonalTable {
 public:
  DiagonalTable() = default;
  explicit DiagonalTable(RealVector values) : values_(std::move(values)) {}
  explicit DiagonalTable(const std::vector<double>& values)
      : values_(Eigen::Map<const RealVector>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const RealVector& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  RealVector values_;
};

/// An observable in either representation; it must match the GibbsSpec it is
/// evaluated in (matrix for quantum states, table for classical ones).
using Observable = std::variant<HermitianOperator, DiagonalTable>;

/// Ascending eigenvalues and orthonormal eigenvector columns.
class SpectralDecomposition {
 public:
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues_.size()); }

  /// U† A U.
  Matrix rotate(const HermitianOperator& op) const;

 private:
  friend SpectralDecomposition decompose(const HermitianOperator& hamiltonian);

  RealVector eigenvalues_;
  Matrix eigenvectors_;
  // Set when the Hamiltonian was real symmetric; rotations of real
  // observables then stay in real arithmetic.
  bool real_ = false;
  Eigen::MatrixXd real_eigenvectors_;
};

/// Full eigensystem; throws NumericalFailure if the solver does not converge.
SpectralDecomposition decompose(const HermitianOperator& hamiltonian);

/// Thermal state e^{-βH}/Z, with its spectrum and Boltzmann weights computed
/// once on construction.
class GibbsSpec {
 public:
  GibbsSpec(double beta, const HermitianOperator& hamiltonian);
  GibbsSpec(double beta, const DiagonalTable& energies);

  double beta() const { return beta_; }
  bool classical() const { return classical_; }
  std::size_t dim() const { return static_cast<std::size_t>(levels_.size()); }

  /// Eigenvalues (quantum) or configuration energies (classical).
  const RealVector& levels() const { return levels_; }
  /// Normalized Boltzmann probabilities, aligned with levels().
  const RealVector& probabilities() const { return probabilities_; }
  double log_partition() const { return log_z_; }

  /// Quantum only; throws InvalidArgument for classical specs.
  const SpectralDecomposition& spectrum() const;

 private:
  void set_weights();

  double beta_;
  bool classical_;
  SpectralDecomposition spectrum_;
  RealVector levels_;
  RealVector probabilities_;
  double log_z_ = 0.0;
};

double log_partition(const GibbsSpec& spec);

/// Tr(A e^{-βH}) / Z.
double gibbs_expectation(const GibbsSpec& spec, const Observable& a);

/// Duhamel product (A,B) = ∫_0^1 dt <A(t) B>, evaluated as a spectral double
/// sum with the divided-difference kernel of e^{-βx}.
double duhamel(const GibbsSpec& spec, const Observable& a, const Observable& b);

/// (A;B) = (A,B) - <A><B>.
double truncated_duhamel(const GibbsSpec& spec, const Observable& a, const Observable& b);

struct HarrisTerms {
  double lower;            // (O,O)
  double mid;              // <O^2>
  double commutator_term;  // (β/12) <[O,[H,O]]>

  double lower_slack() const { return mid - lower; }
  double upper_slack() const { return lower + commutator_term - mid; }
};

HarrisTerms harris_check(const GibbsSpec& spec, const Observable& o);

/// A thermal state as a function of the perturbation strength λ.
using GibbsFamily = std::function<GibbsSpec(double lambda)>;

struct DerivativeSteps {
  static constexpr double kLowOrder = 1e-4;   // orders 1-2
  static constexpr double kHighOrder = 1e-2;  // orders 3-4
  static double default_for(int order) { return order <= 2 ? kLowOrder : kHighOrder; }
};

/// Central finite-difference estimate of ∂^k log Z / ∂λ^k with a (2k+1)-point
/// stencil. For H = H0 - Nλh this equals (βN)^k times the order-k truncated
/// Duhamel product of h.
double logz_derivative(const GibbsFamily& family, int order, double lambda, double step);
double logz_derivative(const GibbsFamily& family, int order, double lambda);

/// Coefficients of the (2k+1)-point central stencil for the k-th derivative
/// (unit step), offsets -k..k.
std::vector<double> central_stencil(int order);

}  // namespace spinvar
