#include "spinvar/spin_algebra.hpp"

#include "spinvar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace spinvar {

SpinMagnitude SpinMagnitude::from_value(double spin) {
  const double twice = 2.0 * spin;
  const double rounded = std::round(twice);
  if (!std::isfinite(spin) || rounded < 1.0 || std::abs(twice - rounded) > 1e-12) {
    throw InvalidArgument("spin magnitude must be a positive half-integer, got " +
                          std::to_string(spin));
  }
  return SpinMagnitude(static_cast<int>(rounded));
}

SpinMagnitude SpinMagnitude::from_twice(int twice_spin) {
  if (twice_spin < 1) {
    throw InvalidArgument("2S must be a positive integer, got " + std::to_string(twice_spin));
  }
  return SpinMagnitude(twice_spin);
}

LocalSpin local_spin(SpinMagnitude spin) {
  const int d = spin.local_dim();
  const double s = spin.value();
  Matrix sz = Matrix::Zero(d, d);
  Matrix raise = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = s - k;
    sz(k, k) = m;
    // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; |m+1> sits at index k-1.
    if (k > 0) raise(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  const Matrix lower = raise.adjoint();
  const Complex i_unit(0.0, 1.0);
  return LocalSpin{spin, 0.5 * (raise + lower), (raise - lower) / (2.0 * i_unit), sz};
}

LocalSpin local_spin(double spin) { return local_spin(SpinMagnitude::from_value(spin)); }

// ---------------------------------------------------------------------------

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

HermitianOperator::HermitianOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw InvalidArgument("Hermitian operator must be square");
  }
  const double scale = max_abs(entries_);
  const double defect = max_abs(entries_ - entries_.adjoint());
  if (defect > kHermiticityTolerance * scale) {
    throw InvalidArgument("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
  entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
  refresh_flags();
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianOperator(Matrix::Identity(n, n));
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianOperator(Matrix::Zero(n, n));
}

HermitianOperator HermitianOperator::diagonal(const RealVector& values) {
  return HermitianOperator(Matrix(values.cast<Complex>().asDiagonal()));
}

void HermitianOperator::refresh_flags() {
  is_real_ = entries_.imag().isZero(0.0);
  is_diagonal_ = true;
  for (Eigen::Index c = 0; c < entries_.cols() && is_diagonal_; ++c) {
    for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
      if (r != c && entries_(r, c) != Complex(0.0, 0.0)) {
        is_diagonal_ = false;
        break;
      }
    }
  }
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw InvalidArgument("operator dimension mismatch in sum");
  entries_ += other.entries_;
  refresh_flags();
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw InvalidArgument("operator dimension mismatch in difference");
  entries_ -= other.entries_;
  refresh_flags();
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double scale) {
  entries_ *= scale;
  refresh_flags();
  return *this;
}

// ---------------------------------------------------------------------------

HilbertSpace::HilbertSpace(int sites, SpinMagnitude spin, std::size_t dim_cap)
    : sites_(sites), spin_(spin), total_dim_(1) {
  if (sites < 1) throw InvalidArgument("Hilbert space needs at least one site");
  const auto d = static_cast<std::size_t>(spin.local_dim());
  for (int i = 0; i < sites; ++i) {
    if (total_dim_ > dim_cap / d) {
      throw CapacityError("Hilbert space of " + std::to_string(sites) + " spin-" +
                          std::to_string(spin.value()) + " sites exceeds dimension cap " +
                          std::to_string(dim_cap));
    }
    total_dim_ *= d;
  }
  strides_.resize(static_cast<std::size_t>(sites));
  std::size_t stride = 1;
  for (int i = sites - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = stride;
    stride *= d;
  }
}

int HilbertSpace::digit(std::size_t state, int site) const {
  return static_cast<int>((state / stride(site)) % static_cast<std::size_t>(local_dim()));
}

HermitianOperator embed_product(const HilbertSpace& space,
                                const std::vector<std::pair<int, Matrix>>& factors) {
  const int d = space.local_dim();
  std::set<int> seen;
  for (const auto& [site, local] : factors) {
    if (site < 0 || site >= space.sites()) {
      throw InvalidArgument("site " + std::to_string(site) + " outside the lattice");
    }
    if (local.rows() != d || local.cols() != d) {
      throw InvalidArgument("local operator dimension does not match the site dimension");
    }
    if (!seen.insert(site).second) {
      throw InvalidArgument("embed_product requires distinct sites");
    }
  }

  const std::size_t dim = space.total_dim();
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix out = Matrix::Zero(n, n);
  const std::size_t k = factors.size();
  std::size_t combos = 1;
  for (std::size_t f = 0; f < k; ++f) combos *= static_cast<std::size_t>(d);

  std::vector<int> row_digit(k);
  for (std::size_t row = 0; row < dim; ++row) {
    std::size_t base = row;
    for (std::size_t f = 0; f < k; ++f) {
      row_digit[f] = space.digit(row, factors[f].first);
      base -= static_cast<std::size_t>(row_digit[f]) * space.stride(factors[f].first);
    }
    for (std::size_t combo = 0; combo < combos; ++combo) {
      std::size_t col = base;
      std::size_t rest = combo;
      Complex value(1.0, 0.0);
      for (std::size_t f = 0; f < k && value != Complex(0.0, 0.0); ++f) {
        const int c = static_cast<int>(rest % static_cast<std::size_t>(d));
        rest /= static_cast<std::size_t>(d);
        value *= factors[f].second(row_digit[f], c);
        col += static_cast<std::size_t>(c) * space.stride(factors[f].first);
      }
      if (value != Complex(0.0, 0.0)) {
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = value;
      }
    }
  }
  return HermitianOperator(std::move(out));
}

HermitianOperator embed(const HilbertSpace& space, int site, const Matrix& local) {
  return embed_product(space, {{site, local}});
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw InvalidArgument("commutator requires square operators of equal dimension");
  }
  return a * b - b * a;
}

Matrix commutator(const HermitianOperator& a, const HermitianOperator& b) {
  return commutator(a.matrix(), b.matrix());
}

double operator_norm(const HermitianOperator& op) {
  if (op.dim() == 0) return 0.0;
  if (op.is_diagonal()) return op.diagonal_values().cwiseAbs().maxCoeff();
  if (op.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix().real(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver failed in operator_norm");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver failed in operator_norm");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace spinvar
