#pragma once

// Finite-size experiments: each turns one identity, inequality or bound into
// a table of ScanRows. Nothing here performs I/O.

#include "spinvar/disorder.hpp"
#include "spinvar/models.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinvar {

/// Everything needed to build a family member at a given size and sample.
struct ModelSpec {
  ModelFamily family = ModelFamily::Rem;
  int replicas = 2;                                 // REM, EA
  double spin = 0.5;                                // Heisenberg, EA
  std::vector<double> couplings{1.0};               // Heisenberg J_r, r = 1, 2, ...
  std::array<double, 3> anisotropy{0.3, 0.3, 0.4};  // EA K^x, K^y, K^z
  std::vector<int> base_set{0, 1};                  // EA interaction range A

  bool disordered() const { return family != ModelFamily::Heisenberg; }
  /// Model tag used in result tables, e.g. "rem", "heisenberg".
  std::string tag() const { return std::string(to_string(family)); }

  /// `materialize` = false keeps REM instances in closed-form-only mode, which
  /// is all the quenched scans need.
  ModelInstance build(int sites, std::uint64_t seed, std::uint64_t sample, bool materialize = true) const;
};

/// Number of samples actually drawn: 1 for models without disorder.
std::size_t effective_samples(const ModelSpec& spec, std::size_t requested);

struct ScanRow {
  std::string experiment;
  std::string model;
  int sites = 0;
  int replicas = 1;
  double beta = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double alpha = 0.0;
  std::string observable;
  EstimatorResult estimate;
  std::optional<double> bound;
  std::optional<double> ratio;
  std::optional<bool> pass;
};

/// Attaches a bound: pass ⇔ mean <= bound·(1 + rel_slack) + 3·stderr.
/// The ratio defaults to mean / bound.
void attach_bound(ScanRow& row, double bound, double rel_slack = 0.0,
                  std::optional<double> ratio = std::nullopt);

/// Statistical slack multiplier applied to every bound check.
inline constexpr double kStderrSlack = 3.0;

/// True when every consecutive pair satisfies v[i+1] <= v[i] + 3·sqrt(se_i² + se_{i+1}²) + tol.
bool non_increasing(const std::vector<EstimatorResult>& sequence, double tolerance = 0.0);

// ---------------------------------------------------------------------------
// Guerra's REM free energy

inline constexpr double kRemCriticalBeta = 1.1774100225154747;  // sqrt(2 log 2)

/// Single-replica REM pressure p_1(β, 0).
double rem_pressure(double beta);
/// max{n p_1(β,0), p_1(2β,0) + βλ + (n-2) p_1(β,0)}; requires n >= 2.
double guerra_formula(int replicas, double beta, double lambda);

struct GuerraPoint {
  int sites = 0;
  EstimatorResult pressure;  // p_{N,n} = E ψ_{N,n}
  EstimatorResult overlap;   // E <h>; β times this is ∂p_{N,n}/∂λ
  double gap = 0.0;          // |p_{N,n} - p_n|
};

struct GuerraReport {
  double beta = 0.0;
  double lambda = 0.0;
  int replicas = 2;
  double analytic = 0.0;
  std::vector<GuerraPoint> points;

  /// gap(N) non-increasing over the N ladder within 3·stderr.
  bool gap_decreasing() const;
};

GuerraReport guerra_compare(int replicas, double beta, double lambda, const std::vector<int>& sizes,
                            std::size_t samples, std::uint64_t seed);
std::vector<ScanRow> guerra_rows(const GuerraReport& report);

// ---------------------------------------------------------------------------
// Variance of the perturbation density

struct VarianceScanPoint {
  int sites = 0;
  EstimatorResult h;              // E <h>
  EstimatorResult h2;             // E <h^2>
  EstimatorResult thermal;        // E[<h^2> - <h>^2]
  EstimatorResult disorder;       // Var_J(<h>), population form
  EstimatorResult total;          // E<h^2> - (E<h>)^2 = thermal + disorder
};

/// V(N) = E<(h - E<h>)^2> over the size ladder. With mu != 0 each sample also
/// draws its own g.
std::vector<VarianceScanPoint> variance_scan(const ModelSpec& spec, const std::vector<int>& sizes, double beta,
                                             double lambda, std::size_t samples, std::uint64_t seed,
                                             double mu = 0.0, double alpha = 0.5);
std::vector<ScanRow> variance_rows(const ModelSpec& spec, const std::vector<VarianceScanPoint>& points,
                                   double beta, double lambda, double mu = 0.0, double alpha = 0.5,
                                   const std::string& experiment = "variance-scan");

// ---------------------------------------------------------------------------
// Derivative bound |E_g ∂^k <h>/∂λ^k| <= sqrt(k!) C_h |μ|^{-k} N^{k(1-α)}

struct Lemma1Options {
  int order = 1;
  double mu = 1.0;
  double alpha = 0.5;
  double lambda = 0.2;
  int nodes = GaussHermiteRule::kDefaultNodes;
  double step = 1e-4;
};

double lemma1_bound(int order, double h_bound, double mu, double alpha, int sites);
ScanRow lemma1_bound_check(std::shared_ptr<const ModelInstance> model, double beta, const Lemma1Options& options);

// ---------------------------------------------------------------------------
// Var(ψ_N) bounds

/// β²n²/N for REM, β²|A|n²S^{2|A|}(Σ_p K^p)²/N for EA.
double psi_variance_bound(const ModelSpec& spec, int sites, double beta);
ScanRow psi_variance_check(const ModelSpec& spec, int sites, double beta, double lambda, std::size_t samples,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// REM overlap: E<h> and E<h>(1 - E<h>)

std::vector<ScanRow> overlap_dichotomy(const std::vector<int>& sizes, double beta,
                                       const std::vector<double>& lambdas, std::size_t samples,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// (N, λ) grid of <h>, <h^2> and variance; descriptive only.

std::vector<ScanRow> limit_order_probe(const ModelSpec& spec, const std::vector<int>& sizes,
                                       const std::vector<double>& lambdas, double beta, std::size_t samples,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Finite-size proxies for the three standing assumptions.

/// ‖[h,[H0,h]]‖ for one instance; zero for classical models.
double double_commutator_norm(const ModelInstance& model);

std::vector<ScanRow> assumption_suite(const ModelSpec& spec, const std::vector<int>& sizes, double beta,
                                      double lambda, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Harris sandwich and exact thermodynamic identities.

/// Random Hermitian matrix (X + X†)/2 with complex Gaussian X.
HermitianOperator random_hermitian(std::size_t dim, DisorderStream& stream);

/// `count` random (H, O) pairs of dimension 2..max_dim plus one instance of
/// each model family. Two rows per instance (lower and upper inequality).
std::vector<ScanRow> harris_sweep(std::size_t count, std::size_t max_dim, double beta, std::uint64_t seed);
std::vector<ScanRow> harris_rows(const std::string& model, int sites, int replicas, double beta,
                                 const HarrisTerms& terms);

struct ThermoIdentityTolerances {
  double derivative = 1e-6;   // |∂ψ/∂λ - β<h>|
  double convexity = 1e-8;    // -∂²ψ/∂λ² (second difference)
  double step = 1e-4;
};

/// Rows "dpsi_identity" and "convexity" for each λ on one instance.
std::vector<ScanRow> thermo_identity_check(const PerturbedFamily& family, double beta,
                                           const std::vector<double>& lambdas,
                                           const ThermoIdentityTolerances& tol = {});

/// β²N²(h;h) from the spectral Duhamel sum against the central second
/// difference of log Z in λ; row "duhamel_vs_fd" holds the relative error.
ScanRow derivative_equivalence(const PerturbedFamily& family, double beta, double lambda,
                               double rel_tolerance = 1e-4);

}  // namespace spinvar
