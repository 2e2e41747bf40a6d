#pragma once

// The three perturbed model families: replicated random energy model (REM),
// antiferromagnetic Heisenberg chain, and replicated quantum Edwards-Anderson
// chain. Every instance carries H0, the perturbation density h and its norm
// bound C_h; `assemble` adds the perturbation H = H0 - (Nλ + N^α μ g) h.

#include "spinvar/disorder.hpp"
#include "spinvar/gibbs.hpp"
#include "spinvar/spin_algebra.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spinvar {

enum class ModelFamily { Rem, Heisenberg, Ea };

std::string_view to_string(ModelFamily family);
/// Accepts "rem", "heisenberg", "ea" (case-insensitive).
ModelFamily parse_family(std::string_view name);

struct DisorderRef {
  std::uint64_t master_seed;
  std::uint64_t sample_index;
};

class ModelInstance {
 public:
  ModelFamily family() const { return family_; }
  int sites() const { return sites_; }
  int replicas() const { return replicas_; }
  SpinMagnitude spin() const { return spin_; }
  double h_bound() const { return h_bound_; }
  const std::optional<DisorderRef>& disorder() const { return disorder_; }

  bool quantum() const { return family_ != ModelFamily::Rem; }
  bool has_perturbation() const { return perturbed_; }
  /// False for REM instances too large to tabulate over all replicas.
  bool materialized() const { return h0_.has_value(); }

  /// Throws InvalidArgument if not materialized.
  const Observable& unperturbed() const;
  /// Throws InvalidArgument if the instance has no perturbation (REM n = 1).
  const Observable& perturbation() const;
  const Observable& perturbation_squared() const;

  /// REM: energies -√N J_σ of one replica, indexed by configuration bits.
  const std::vector<double>& replica_energies() const { return replica_energies_; }
  /// Drawn couplings J_X in draw order (REM: J_σ; EA: one per interaction range).
  const std::vector<double>& couplings() const { return couplings_; }

 private:
  friend ModelInstance build_rem(int, int, DisorderStream, int);
  friend ModelInstance build_heisenberg(int, const std::vector<double>&, SpinMagnitude, std::size_t);
  friend ModelInstance build_ea(int, const std::array<double, 3>&, const std::vector<int>&, SpinMagnitude,
                                DisorderStream, int, std::size_t);

  ModelFamily family_ = ModelFamily::Heisenberg;
  int sites_ = 0;
  int replicas_ = 1;
  SpinMagnitude spin_ = SpinMagnitude::from_twice(1);
  double h_bound_ = 0.0;
  bool perturbed_ = false;
  std::optional<DisorderRef> disorder_;
  std::optional<Observable> h0_;
  std::optional<Observable> h_;
  std::optional<Observable> h_squared_;
  std::vector<double> replica_energies_;
  std::vector<double> couplings_;
};

/// Largest n·N for which REM tables over all replicas are materialized.
inline constexpr int kRemTableBits = 24;
/// Largest n·N accepted by build_rem at all.
inline constexpr int kRemMaxBits = 28;

/// Replicated REM on N sites with n replicas. Configuration index: bit i of a
/// replica block is site i (bit 0 means σ_i = +1); replica 1 in the low bits.
/// For n >= 2 the perturbation is the overlap indicator ∏_i δ(σ_i^1, σ_i^2).
ModelInstance build_rem(int sites, int replicas, DisorderStream disorder, int table_bits = kRemTableBits);

/// Open Heisenberg chain of even length L with distance-dependent couplings
/// J_r >= 0 (couplings[r-1], r odd only) and staggered magnetization density.
ModelInstance build_heisenberg(int length, const std::vector<double>& couplings = {1.0},
                               SpinMagnitude spin = SpinMagnitude::from_twice(1),
                               std::size_t dim_cap = HilbertSpace::kDefaultDimCap);

/// Open quantum EA chain: H0 = -Σ_a Σ_X J_X Σ_p K^p ∏_{j∈X} S_j^{p,a} with X
/// running over translates of `base_set`, replicas sharing J. The perturbation
/// is the replica overlap density (1/N) Σ_i S_i^{z,1} S_i^{z,2}.
ModelInstance build_ea(int length, const std::array<double, 3>& anisotropy,
                       const std::vector<int>& base_set, SpinMagnitude spin, DisorderStream disorder,
                       int replicas = 2, std::size_t dim_cap = HilbertSpace::kDefaultDimCap);

struct PerturbationParams {
  double lambda = 0.0;
  double mu = 0.0;
  double alpha = 0.5;
  double g = 0.0;

  /// Throws InvalidArgument if mu != 0 and alpha is outside (0,1).
  void validate() const;
};

struct ThermoPoint {
  double log_z = 0.0;
  double h = 0.0;   // <h>
  double h2 = 0.0;  // <h^2>
};

/// H(λ) = H0 - (Nλ + N^α μ g) h as a λ-parametrized family.
class PerturbedFamily {
 public:
  PerturbedFamily(std::shared_ptr<const ModelInstance> model, PerturbationParams params);

  const ModelInstance& model() const { return *model_; }
  const PerturbationParams& params() const { return params_; }

  /// Nλ + N^α μ g.
  double coupling(double lambda) const;
  /// Coupling at params().lambda.
  double coupling() const { return coupling(params_.lambda); }

  /// Same model with a different realized g.
  PerturbedFamily with_g(double g) const;

  /// Requires a materialized model.
  Observable hamiltonian(double lambda) const;
  GibbsSpec spec(double beta, double lambda) const;
  GibbsSpec spec(double beta) const { return spec(beta, params_.lambda); }
  GibbsFamily gibbs_family(double beta) const;

  /// log Z, <h>, <h^2> at (β, λ). REM uses a closed-form sum over single
  /// replicas and works for unmaterialized instances; the others go through
  /// the spectral engine.
  ThermoPoint thermo(double beta, double lambda) const;
  ThermoPoint thermo(double beta) const { return thermo(beta, params_.lambda); }

 private:
  std::shared_ptr<const ModelInstance> model_;
  PerturbationParams params_;
};

PerturbedFamily assemble(std::shared_ptr<const ModelInstance> model, const PerturbationParams& params);
PerturbedFamily assemble(ModelInstance model, const PerturbationParams& params);

/// Closed-form REM thermodynamics at overlap coupling c (H = Σ_a E(σ^a) - c h).
ThermoPoint rem_thermo(const std::vector<double>& replica_energies, int replicas, double beta,
                       double coupling);

}  // namespace spinvar
