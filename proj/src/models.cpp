#include "spinvar/models.hpp"

#include "spinvar/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <string>

namespace spinvar {

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Rem:
      return "rem";
    case ModelFamily::Heisenberg:
      return "heisenberg";
    case ModelFamily::Ea:
      return "ea";
  }
  return "unknown";
}

ModelFamily parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "rem") return ModelFamily::Rem;
  if (lower == "heisenberg") return ModelFamily::Heisenberg;
  if (lower == "ea") return ModelFamily::Ea;
  throw InvalidArgument("unknown model family '" + std::string(name) + "'");
}

const Observable& ModelInstance::unperturbed() const {
  if (!h0_) throw InvalidArgument("model instance is too large to be materialized");
  return *h0_;
}

const Observable& ModelInstance::perturbation() const {
  if (!h_) {
    throw InvalidArgument(perturbed_ ? "perturbation table is not materialized"
                                     : "model instance has no perturbation operator");
  }
  return *h_;
}

const Observable& ModelInstance::perturbation_squared() const {
  if (!h_squared_) throw InvalidArgument("model instance has no perturbation operator");
  return *h_squared_;
}

// ---------------------------------------------------------------------------
// REM

ModelInstance build_rem(int sites, int replicas, DisorderStream disorder, int table_bits) {
  if (sites < 1 || sites > 14) throw InvalidArgument("REM site count must be in 1..14");
  if (replicas < 1 || replicas > 3) throw InvalidArgument("REM replica count must be in 1..3");
  if (sites * replicas > kRemMaxBits) {
    throw CapacityError("REM configuration space of " + std::to_string(sites * replicas) +
                        " bits exceeds the table cap");
  }

  ModelInstance m;
  m.family_ = ModelFamily::Rem;
  m.sites_ = sites;
  m.replicas_ = replicas;
  m.h_bound_ = 1.0;
  m.disorder_ = DisorderRef{disorder.master_seed(), disorder.sample_index()};

  const std::size_t configs = std::size_t{1} << sites;
  m.couplings_ = disorder.draws(configs);
  m.replica_energies_.resize(configs);
  const double scale = std::sqrt(static_cast<double>(sites));
  for (std::size_t s = 0; s < configs; ++s) m.replica_energies_[s] = -scale * m.couplings_[s];

  if (sites * replicas <= table_bits) {
    const std::size_t total = std::size_t{1} << (sites * replicas);
    const std::size_t mask = configs - 1;
    RealVector energies(static_cast<Eigen::Index>(total));
    RealVector overlap = RealVector::Zero(static_cast<Eigen::Index>(total));
    for (std::size_t idx = 0; idx < total; ++idx) {
      double e = 0.0;
      for (int a = 0; a < replicas; ++a) e += m.replica_energies_[(idx >> (a * sites)) & mask];
      energies[static_cast<Eigen::Index>(idx)] = e;
      if (replicas >= 2 && (idx & mask) == ((idx >> sites) & mask)) {
        overlap[static_cast<Eigen::Index>(idx)] = 1.0;
      }
    }
    m.h0_ = DiagonalTable(std::move(energies));
    if (replicas >= 2) {
      m.h_ = DiagonalTable(overlap);
      m.h_squared_ = DiagonalTable(overlap);  // the indicator is idempotent
    }
  }
  // Unmaterialized instances only support the closed-form path in PerturbedFamily::thermo.
  m.perturbed_ = replicas >= 2;
  return m;
}

ThermoPoint rem_thermo(const std::vector<double>& replica_energies, int replicas, double beta,
                       double coupling) {
  if (replica_energies.empty()) throw InvalidArgument("empty REM energy table");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  const std::size_t count = replica_energies.size();
  std::size_t top = 0;
  for (std::size_t s = 1; s < count; ++s) {
    if (replica_energies[s] < replica_energies[top]) top = s;
  }
  const double shift = -beta * replica_energies[top];

  // a = Σ w, b = Σ w^2, off = a^2 - b = Σ_{σ≠τ} w_σ w_τ with w_top = 1.
  double rest = 0.0;
  double b = 0.0;
  std::vector<double> w(count);
  for (std::size_t s = 0; s < count; ++s) {
    w[s] = std::exp(-beta * replica_energies[s] - shift);
    b += w[s] * w[s];
    if (s != top) rest += w[s];
  }
  const double a = 1.0 + rest;
  double off = rest;  // top paired with everything else
  for (std::size_t s = 0; s < count; ++s) {
    if (s != top) off += w[s] * (a - w[s]);
  }

  ThermoPoint t;
  if (replicas == 1) {
    t.log_z = shift + std::log(a);
    return t;
  }
  // log(off + e^{βc} b) evaluated without overflow.
  const double log_off = std::log(off);
  const double log_pinned = beta * coupling + std::log(b);
  const double hi = std::max(log_off, log_pinned);
  const double log_pair = hi + std::log(std::exp(log_off - hi) + std::exp(log_pinned - hi));
  t.log_z = replicas * shift + (replicas - 2) * std::log(a) + log_pair;
  t.h = 1.0 / (1.0 + std::exp(log_off - log_pinned));
  t.h2 = t.h;
  return t;
}

// ---------------------------------------------------------------------------
// Heisenberg

ModelInstance build_heisenberg(int length, const std::vector<double>& couplings, SpinMagnitude spin,
                               std::size_t dim_cap) {
  if (length < 2 || length % 2 != 0) {
    throw InvalidArgument("Heisenberg chain length must be even and >= 2 (bipartite lattice)");
  }
  if (couplings.empty()) throw InvalidArgument("Heisenberg chain needs at least one coupling");
  for (std::size_t r = 0; r < couplings.size(); ++r) {
    const double j = couplings[r];
    if (!(j >= 0.0) || !std::isfinite(j)) throw InvalidArgument("Heisenberg couplings must be >= 0");
    // Distance r+1 even means both sites on the same sublattice.
    if ((r + 1) % 2 == 0 && j != 0.0) {
      throw InvalidArgument("couplings at even distance break the A/B sublattice structure");
    }
  }

  const HilbertSpace space(length, spin, dim_cap);
  const LocalSpin s = local_spin(spin);
  const auto dim = static_cast<Eigen::Index>(space.total_dim());

  Matrix h0 = Matrix::Zero(dim, dim);
  for (std::size_t r = 0; r < couplings.size(); ++r) {
    const double j = couplings[r];
    if (j == 0.0) continue;
    const int dist = static_cast<int>(r) + 1;
    for (int i = 0; i + dist < length; ++i) {
      for (const Matrix* p : {&s.sx, &s.sy, &s.sz}) {
        h0 += j * embed_product(space, {{i, *p}, {i + dist, *p}}).matrix();
      }
    }
  }

  RealVector staggered = RealVector::Zero(dim);
  for (int i = 0; i < length; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    staggered += sign * embed(space, i, s.sz).diagonal_values();
  }
  staggered /= static_cast<double>(length);

  ModelInstance m;
  m.family_ = ModelFamily::Heisenberg;
  m.sites_ = length;
  m.replicas_ = 1;
  m.spin_ = spin;
  m.h_bound_ = spin.value();
  m.h0_ = HermitianOperator(std::move(h0));
  m.h_ = HermitianOperator::diagonal(staggered);
  m.h_squared_ = HermitianOperator::diagonal(staggered.array().square().matrix());
  m.perturbed_ = true;
  return m;
}

// ---------------------------------------------------------------------------
// Edwards-Anderson

ModelInstance build_ea(int length, const std::array<double, 3>& anisotropy, const std::vector<int>& base_set,
                       SpinMagnitude spin, DisorderStream disorder, int replicas, std::size_t dim_cap) {
  if (length < 2 || length > 6) throw InvalidArgument("EA chain length must be in 2..6");
  if (replicas < 1 || replicas > 2) throw InvalidArgument("EA replica count must be 1 or 2");
  for (double k : anisotropy) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("EA anisotropy constants must be >= 0");
  }
  const std::set<int> offsets(base_set.begin(), base_set.end());
  if (offsets.empty() || offsets.size() != base_set.size() || offsets.size() > 3) {
    throw InvalidArgument("EA base set must hold 1..3 distinct offsets");
  }
  const int lo = *offsets.begin();
  const int hi = *offsets.rbegin();

  const HilbertSpace space(length * replicas, spin, dim_cap);
  const LocalSpin s = local_spin(spin);
  const std::array<const Matrix*, 3> components{&s.sx, &s.sy, &s.sz};
  const auto dim = static_cast<Eigen::Index>(space.total_dim());

  ModelInstance m;
  m.family_ = ModelFamily::Ea;
  m.sites_ = length;
  m.replicas_ = replicas;
  m.spin_ = spin;
  m.h_bound_ = spin.value() * spin.value();
  m.disorder_ = DisorderRef{disorder.master_seed(), disorder.sample_index()};

  Matrix h0 = Matrix::Zero(dim, dim);
  // Translates X = A + v that fit inside the open chain, one coupling each.
  for (int v = -lo; v + hi < length; ++v) {
    const double j = disorder.next();
    m.couplings_.push_back(j);
    for (int p = 0; p < 3; ++p) {
      if (anisotropy[static_cast<std::size_t>(p)] == 0.0) continue;
      for (int a = 0; a < replicas; ++a) {
        std::vector<std::pair<int, Matrix>> factors;
        for (int off : offsets) factors.emplace_back(a * length + v + off, *components[static_cast<std::size_t>(p)]);
        h0 -= j * anisotropy[static_cast<std::size_t>(p)] * embed_product(space, factors).matrix();
      }
    }
  }
  m.h0_ = HermitianOperator(std::move(h0));

  if (replicas == 2) {
    RealVector overlap = RealVector::Zero(dim);
    for (int i = 0; i < length; ++i) {
      overlap += embed_product(space, {{i, s.sz}, {length + i, s.sz}}).diagonal_values();
    }
    overlap /= static_cast<double>(length);
    m.h_ = HermitianOperator::diagonal(overlap);
    m.h_squared_ = HermitianOperator::diagonal(overlap.array().square().matrix());
    m.perturbed_ = true;
  }
  return m;
}

// ---------------------------------------------------------------------------

void PerturbationParams::validate() const {
  if (!std::isfinite(lambda) || !std::isfinite(mu) || !std::isfinite(g) || !std::isfinite(alpha)) {
    throw InvalidArgument("perturbation parameters must be finite");
  }
  if (mu != 0.0 && !(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0,1) when mu is nonzero");
  }
}

PerturbedFamily::PerturbedFamily(std::shared_ptr<const ModelInstance> model, PerturbationParams params)
    : model_(std::move(model)), params_(params) {
  if (!model_) throw InvalidArgument("null model instance");
  params_.validate();
  const bool perturbed = params_.lambda != 0.0 || params_.mu != 0.0;
  if (perturbed && !model_->has_perturbation()) {
    throw InvalidArgument("model has no perturbation operator to couple lambda or mu to");
  }
}

double PerturbedFamily::coupling(double lambda) const {
  const double n = static_cast<double>(model_->sites());
  return n * lambda + std::pow(n, params_.alpha) * params_.mu * params_.g;
}

PerturbedFamily PerturbedFamily::with_g(double g) const {
  PerturbationParams p = params_;
  p.g = g;
  return PerturbedFamily(model_, p);
}

Observable PerturbedFamily::hamiltonian(double lambda) const {
  const Observable& h0 = model_->unperturbed();
  if (!model_->has_perturbation()) return h0;
  const double c = coupling(lambda);
  const Observable& h = model_->perturbation();
  if (const auto* q = std::get_if<HermitianOperator>(&h0)) {
    return *q - c * std::get<HermitianOperator>(h);
  }
  const RealVector& e = std::get<DiagonalTable>(h0).values();
  const RealVector& t = std::get<DiagonalTable>(h).values();
  return DiagonalTable(RealVector(e - c * t));
}

GibbsSpec PerturbedFamily::spec(double beta, double lambda) const {
  Observable h = hamiltonian(lambda);
  if (auto* q = std::get_if<HermitianOperator>(&h)) return GibbsSpec(beta, *q);
  return GibbsSpec(beta, std::get<DiagonalTable>(h));
}

GibbsFamily PerturbedFamily::gibbs_family(double beta) const {
  return [self = *this, beta](double lambda) { return self.spec(beta, lambda); };
}

ThermoPoint PerturbedFamily::thermo(double beta, double lambda) const {
  if (model_->family() == ModelFamily::Rem) {
    return rem_thermo(model_->replica_energies(), model_->replicas(), beta, coupling(lambda));
  }
  const GibbsSpec state = spec(beta, lambda);
  ThermoPoint t;
  t.log_z = state.log_partition();
  if (model_->has_perturbation()) {
    t.h = gibbs_expectation(state, model_->perturbation());
    t.h2 = gibbs_expectation(state, model_->perturbation_squared());
  }
  return t;
}

PerturbedFamily assemble(std::shared_ptr<const ModelInstance> model, const PerturbationParams& params) {
  return PerturbedFamily(std::move(model), params);
}

PerturbedFamily assemble(ModelInstance model, const PerturbationParams& params) {
  return PerturbedFamily(std::make_shared<const ModelInstance>(std::move(model)), params);
}

}  // namespace spinvar
