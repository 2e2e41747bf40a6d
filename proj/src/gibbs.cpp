#include "spinvar/gibbs.hpp"

#include "spinvar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace spinvar {

namespace {

constexpr double kImaginaryResidueTolerance = 1e-9;

double checked_real(Complex value, const char* what) {
  if (std::abs(value.imag()) > kImaginaryResidueTolerance * std::max(1.0, std::abs(value.real()))) {
    throw NumericalFailure(std::string(what) + ": imaginary residue " + std::to_string(value.imag()));
  }
  return value.real();
}

const HermitianOperator& as_matrix(const GibbsSpec& spec, const Observable& obs) {
  const auto* op = std::get_if<HermitianOperator>(&obs);
  if (op == nullptr) throw InvalidArgument("quantum state needs a matrix observable");
  if (op->dim() != spec.dim()) throw InvalidArgument("observable dimension does not match the state");
  return *op;
}

const DiagonalTable& as_table(const GibbsSpec& spec, const Observable& obs) {
  const auto* table = std::get_if<DiagonalTable>(&obs);
  if (table == nullptr) throw InvalidArgument("classical state needs a table observable");
  if (table->size() != spec.dim()) throw InvalidArgument("table length does not match the state");
  return *table;
}

// Degenerate-level threshold for the Duhamel kernel.
double degeneracy_tolerance(const RealVector& levels) {
  if (levels.size() == 0) return 0.0;
  const double spread = levels.maxCoeff() - levels.minCoeff();
  return 1e-12 * std::max(1.0, spread);
}

// Σ_{mn} Ã_mn B̃_nm K(E_m,E_n)/Z with K the divided difference of e^{-βx}.
// The lower level carries the larger weight, so writing the kernel as
// p_lo (1 - e^{-βδ}) / (βδ) never overflows.
Complex duhamel_sum(const GibbsSpec& spec, const Matrix& a, const Matrix& b) {
  const RealVector& e = spec.levels();
  const RealVector& p = spec.probabilities();
  const double beta = spec.beta();
  const double tol = degeneracy_tolerance(e);
  const Eigen::Index d = e.size();
  Complex total(0.0, 0.0);
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      const Complex ab = a(m, n) * b(n, m);
      if (ab == Complex(0.0, 0.0)) continue;
      const double delta = std::abs(e[m] - e[n]);
      const double p_lo = e[m] <= e[n] ? p[m] : p[n];
      double kernel = p_lo;
      if (delta > tol) {
        const double x = beta * delta;
        kernel = p_lo * (-std::expm1(-x)) / x;
      }
      total += ab * kernel;
    }
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix SpectralDecomposition::rotate(const HermitianOperator& op) const {
  if (op.dim() != dim()) throw InvalidArgument("observable dimension does not match the spectrum");
  if (real_ && op.is_real()) {
    const Eigen::MatrixXd& u = real_eigenvectors_;
    if (op.is_diagonal()) {
      const RealVector diag = op.diagonal_values();
      return (u.transpose() * (diag.asDiagonal() * u)).cast<Complex>();
    }
    const Eigen::MatrixXd a = op.matrix().real();
    return (u.transpose() * (a * u)).cast<Complex>();
  }
  const Matrix& u = eigenvectors_;
  return u.adjoint() * (op.matrix() * u);
}

SpectralDecomposition decompose(const HermitianOperator& hamiltonian) {
  SpectralDecomposition out;
  if (hamiltonian.is_diagonal()) {
    // Sort the diagonal; eigenvectors are a permutation of the basis.
    const RealVector diag = hamiltonian.diagonal_values();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(diag.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return diag[x] < diag[y]; });
    const Eigen::Index d = diag.size();
    out.eigenvalues_.resize(d);
    out.real_eigenvectors_ = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      out.eigenvalues_[k] = diag[order[static_cast<std::size_t>(k)]];
      out.real_eigenvectors_(order[static_cast<std::size_t>(k)], k) = 1.0;
    }
    out.real_ = true;
    out.eigenvectors_ = out.real_eigenvectors_.cast<Complex>();
    return out;
  }
  if (hamiltonian.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian.matrix().real());
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge");
    out.eigenvalues_ = solver.eigenvalues();
    out.real_eigenvectors_ = solver.eigenvectors();
    out.real_ = true;
    out.eigenvectors_ = out.real_eigenvectors_.cast<Complex>();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian.matrix());
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge");
  out.eigenvalues_ = solver.eigenvalues();
  out.eigenvectors_ = solver.eigenvectors();
  return out;
}

// ---------------------------------------------------------------------------

GibbsSpec::GibbsSpec(double beta, const HermitianOperator& hamiltonian)
    : beta_(beta), classical_(false) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
  spectrum_ = decompose(hamiltonian);
  levels_ = spectrum_.eigenvalues();
  set_weights();
}

GibbsSpec::GibbsSpec(double beta, const DiagonalTable& energies)
    : beta_(beta), classical_(true), levels_(energies.values()) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
  if (levels_.size() == 0) throw InvalidArgument("empty energy table");
  set_weights();
}

void GibbsSpec::set_weights() {
  if (!levels_.allFinite()) throw NumericalFailure("non-finite energy level");
  const double e_min = levels_.minCoeff();
  probabilities_ = (-beta_ * (levels_.array() - e_min)).exp().matrix();
  const double sum = probabilities_.sum();
  probabilities_ /= sum;
  log_z_ = -beta_ * e_min + std::log(sum);
}

const SpectralDecomposition& GibbsSpec::spectrum() const {
  if (classical_) throw InvalidArgument("classical state has no matrix spectrum");
  return spectrum_;
}

double log_partition(const GibbsSpec& spec) { return spec.log_partition(); }

double gibbs_expectation(const GibbsSpec& spec, const Observable& a) {
  if (spec.classical()) {
    return spec.probabilities().dot(as_table(spec, a).values());
  }
  const HermitianOperator& op = as_matrix(spec, a);
  const Matrix rotated = spec.spectrum().rotate(op);
  const Complex value = (rotated.diagonal().array() * spec.probabilities().array().cast<Complex>()).sum();
  return checked_real(value, "gibbs_expectation");
}

double duhamel(const GibbsSpec& spec, const Observable& a, const Observable& b) {
  if (spec.classical()) {
    const RealVector& x = as_table(spec, a).values();
    const RealVector& y = as_table(spec, b).values();
    if (x.size() != y.size()) throw InvalidArgument("table length mismatch");
    return (spec.probabilities().array() * x.array() * y.array()).sum();
  }
  const SpectralDecomposition& spectrum = spec.spectrum();
  const Matrix ra = spectrum.rotate(as_matrix(spec, a));
  if (&a == &b) return checked_real(duhamel_sum(spec, ra, ra), "duhamel");
  const Matrix rb = spectrum.rotate(as_matrix(spec, b));
  return checked_real(duhamel_sum(spec, ra, rb), "duhamel");
}

double truncated_duhamel(const GibbsSpec& spec, const Observable& a, const Observable& b) {
  return duhamel(spec, a, b) - gibbs_expectation(spec, a) * gibbs_expectation(spec, b);
}

HarrisTerms harris_check(const GibbsSpec& spec, const Observable& o) {
  if (spec.classical()) {
    const RealVector& x = as_table(spec, o).values();
    const double second = (spec.probabilities().array() * x.array().square()).sum();
    return {second, second, 0.0};
  }
  const Matrix r = spec.spectrum().rotate(as_matrix(spec, o));
  const RealVector& e = spec.levels();
  const RealVector& p = spec.probabilities();
  const Eigen::Index d = e.size();

  double mid = 0.0;
  double double_commutator = 0.0;
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      const double weight = std::norm(r(m, n));
      mid += p[m] * weight;
      // <[O,[H,O]]> = Σ_mn |O_mn|^2 (E_n - E_m)(p_m - p_n), each term >= 0.
      double_commutator += weight * std::abs(e[n] - e[m]) * std::abs(p[m] - p[n]);
    }
  }
  const double lower = checked_real(duhamel_sum(spec, r, r), "harris_check");
  return {lower, mid, spec.beta() / 12.0 * double_commutator};
}

// ---------------------------------------------------------------------------

std::vector<double> central_stencil(int order) {
  switch (order) {
    case 1:
      return {-0.5, 0.0, 0.5};
    case 2:
      return {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
    case 3:
      return {1.0 / 8, -1.0, 13.0 / 8, 0.0, -13.0 / 8, 1.0, -1.0 / 8};
    case 4:
      return {7.0 / 240, -2.0 / 5,  169.0 / 60, -122.0 / 15, 91.0 / 8,
              -122.0 / 15, 169.0 / 60, -2.0 / 5,  7.0 / 240};
    default:
      throw InvalidArgument("derivative order must be in 1..4, got " + std::to_string(order));
  }
}

double logz_derivative(const GibbsFamily& family, int order, double lambda, double step) {
  const std::vector<double> coeffs = central_stencil(order);
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("finite-difference step must be positive");
  const int half = order;
  double acc = 0.0;
  for (int j = -half; j <= half; ++j) {
    const double c = coeffs[static_cast<std::size_t>(j + half)];
    if (c == 0.0) continue;
    const double value = family(lambda + j * step).log_partition();
    if (!std::isfinite(value)) {
      throw NumericalFailure("non-finite log Z at lambda = " + std::to_string(lambda + j * step));
    }
    acc += c * value;
  }
  const double result = acc / std::pow(step, order);
  if (!std::isfinite(result)) throw NumericalFailure("non-finite log Z derivative");
  return result;
}

double logz_derivative(const GibbsFamily& family, int order, double lambda) {
  return logz_derivative(family, order, lambda, DerivativeSteps::default_for(order));
}

}  // namespace spinvar
