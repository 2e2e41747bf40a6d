#include "spinvar/verify.hpp"

#include "spinvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinvar {

namespace {

// Disorder channels are keyed by system size so ladders over N draw
// independent couplings.
std::uint64_t coupling_channel(int sites) { return 2 * static_cast<std::uint64_t>(sites); }
std::uint64_t field_channel(int sites) { return 2 * static_cast<std::uint64_t>(sites) + 1; }
constexpr std::uint64_t kHarrisChannel = 1000;

ScanRow row_for(const std::string& experiment, const ModelSpec& spec, int sites, double beta, double lambda,
                double mu, double alpha, const std::string& observable, const EstimatorResult& est) {
  ScanRow row;
  row.experiment = experiment;
  row.model = spec.tag();
  row.sites = sites;
  row.replicas = spec.family == ModelFamily::Heisenberg ? 1 : spec.replicas;
  row.beta = beta;
  row.lambda = lambda;
  row.mu = mu;
  row.alpha = alpha;
  row.observable = observable;
  row.estimate = est;
  return row;
}

EstimatorResult exact(double value) { return EstimatorResult{value, 0.0, 0.0, 1}; }

double g_for_sample(double mu, std::uint64_t seed, std::uint64_t sample, int sites) {
  if (mu == 0.0) return 0.0;
  DisorderStream stream(seed, sample, field_channel(sites));
  return stream.next();
}

// Sample variance of ψ with a jackknife error bar. The column is centered
// first; that leaves the variance unchanged and avoids cancellation.
EstimatorResult variance_of(const std::vector<double>& values) {
  const std::size_t m = values.size();
  if (m < 2) return EstimatorResult{0.0, 0.0, 0.0, m};
  const double center = estimate(values).mean;
  std::vector<double> x(m);
  std::vector<double> x2(m);
  for (std::size_t s = 0; s < m; ++s) {
    x[s] = values[s] - center;
    x2[s] = x[s] * x[s];
  }
  const double unbias = static_cast<double>(m) / static_cast<double>(m - 1);
  EstimatorResult r = jackknife({x, x2}, [](std::span<const double> mu) { return mu[1] - mu[0] * mu[0]; });
  r.mean *= unbias;
  r.std_error *= unbias;
  r.variance *= unbias * unbias;
  return r;
}

}  // namespace

ModelInstance ModelSpec::build(int sites, std::uint64_t seed, std::uint64_t sample, bool materialize) const {
  DisorderStream stream(seed, sample, coupling_channel(sites));
  switch (family) {
    case ModelFamily::Rem:
      return build_rem(sites, replicas, stream, materialize ? kRemTableBits : 0);
    case ModelFamily::Heisenberg:
      return build_heisenberg(sites, couplings, SpinMagnitude::from_value(spin));
    case ModelFamily::Ea:
      return build_ea(sites, anisotropy, base_set, SpinMagnitude::from_value(spin), stream, replicas);
  }
  throw InvalidArgument("unknown model family");
}

std::size_t effective_samples(const ModelSpec& spec, std::size_t requested) {
  return spec.disordered() ? requested : 1;
}

void attach_bound(ScanRow& row, double bound, double rel_slack, std::optional<double> ratio) {
  row.bound = bound;
  row.ratio = ratio ? *ratio : (bound != 0.0 ? row.estimate.mean / bound : 0.0);
  row.pass = row.estimate.mean <= bound * (1.0 + rel_slack) + kStderrSlack * row.estimate.std_error;
}

bool non_increasing(const std::vector<EstimatorResult>& sequence, double tolerance) {
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    const double se = std::hypot(sequence[i].std_error, sequence[i + 1].std_error);
    if (sequence[i + 1].mean > sequence[i].mean + kStderrSlack * se + tolerance) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

std::vector<VarianceScanPoint> variance_scan(const ModelSpec& spec, const std::vector<int>& sizes, double beta,
                                             double lambda, std::size_t samples, std::uint64_t seed, double mu,
                                             double alpha) {
  if (sizes.empty()) throw InvalidArgument("variance_scan needs at least one system size");
  const std::size_t count = effective_samples(spec, samples);
  if (count < 1) throw InvalidArgument("variance_scan needs at least one sample");
  std::vector<VarianceScanPoint> out;
  for (int n : sizes) {
    const auto points = map_samples<ThermoPoint>(count, 0, [&](std::uint64_t s) {
      auto model = std::make_shared<const ModelInstance>(spec.build(n, seed, s, false));
      const PerturbationParams params{lambda, mu, alpha, g_for_sample(mu, seed, s, n)};
      return assemble(model, params).thermo(beta);
    });
    std::vector<double> h;
    std::vector<double> h2;
    std::vector<double> hh;
    std::vector<double> thermal;
    for (const ThermoPoint& t : points) {
      h.push_back(t.h);
      h2.push_back(t.h2);
      hh.push_back(t.h * t.h);
      thermal.push_back(t.h2 - t.h * t.h);
    }
    VarianceScanPoint p;
    p.sites = n;
    p.h = estimate(h);
    p.h2 = estimate(h2);
    p.thermal = estimate(thermal);
    p.disorder = jackknife({h, hh}, [](std::span<const double> m) { return m[1] - m[0] * m[0]; });
    p.total = jackknife({h, h2}, [](std::span<const double> m) { return m[1] - m[0] * m[0]; });
    out.push_back(p);
  }
  return out;
}

std::vector<ScanRow> variance_rows(const ModelSpec& spec, const std::vector<VarianceScanPoint>& points,
                                   double beta, double lambda, double mu, double alpha,
                                   const std::string& experiment) {
  std::vector<ScanRow> rows;
  for (const VarianceScanPoint& p : points) {
    rows.push_back(row_for(experiment, spec, p.sites, beta, lambda, mu, alpha, "h_mean", p.h));
    rows.push_back(row_for(experiment, spec, p.sites, beta, lambda, mu, alpha, "h2_mean", p.h2));
    rows.push_back(row_for(experiment, spec, p.sites, beta, lambda, mu, alpha, "thermal_var", p.thermal));
    rows.push_back(row_for(experiment, spec, p.sites, beta, lambda, mu, alpha, "disorder_var", p.disorder));
    rows.push_back(row_for(experiment, spec, p.sites, beta, lambda, mu, alpha, "total_var", p.total));
  }
  return rows;
}

// ---------------------------------------------------------------------------

double lemma1_bound(int order, double h_bound, double mu, double alpha, int sites) {
  if (order < 1) throw InvalidArgument("derivative order must be positive");
  if (mu == 0.0) throw InvalidArgument("the derivative bound needs mu != 0");
  const double factorial = std::tgamma(order + 1.0);
  return std::sqrt(factorial) * h_bound * std::pow(std::abs(mu), -order) *
         std::pow(static_cast<double>(sites), order * (1.0 - alpha));
}

ScanRow lemma1_bound_check(std::shared_ptr<const ModelInstance> model, double beta, const Lemma1Options& o) {
  if (o.order < 1 || o.order > 2) throw InvalidArgument("lemma1 check supports derivative order 1 or 2");
  if (o.mu == 0.0) throw InvalidArgument("lemma1 check needs mu != 0");
  if (!(o.step > 0.0)) throw InvalidArgument("lemma1 check needs a positive step");
  const PerturbedFamily family = assemble(model, PerturbationParams{o.lambda, o.mu, o.alpha, 0.0});
  const std::vector<double> stencil = central_stencil(o.order);
  const GaussHermiteRule rule(o.nodes);

  const double averaged = rule.expectation([&](double g) {
    const PerturbedFamily at_g = family.with_g(g);
    double acc = 0.0;
    for (int j = -o.order; j <= o.order; ++j) {
      const double c = stencil[static_cast<std::size_t>(j + o.order)];
      if (c != 0.0) acc += c * at_g.thermo(beta, o.lambda + j * o.step).h;
    }
    return acc / std::pow(o.step, o.order);
  });

  const double bound = lemma1_bound(o.order, model->h_bound(), o.mu, o.alpha, model->sites());
  ScanRow row;
  row.experiment = "lemma1";
  row.model = std::string(to_string(model->family()));
  row.sites = model->sites();
  row.replicas = model->replicas();
  row.beta = beta;
  row.lambda = o.lambda;
  row.mu = o.mu;
  row.alpha = o.alpha;
  row.observable = "dh_dlambda_order" + std::to_string(o.order);
  row.estimate = exact(std::abs(averaged));
  attach_bound(row, bound, 1e-3);
  return row;
}

// ---------------------------------------------------------------------------

double psi_variance_bound(const ModelSpec& spec, int sites, double beta) {
  const double n = spec.replicas;
  switch (spec.family) {
    case ModelFamily::Rem:
      return beta * beta * n * n / sites;
    case ModelFamily::Ea: {
      const double a = static_cast<double>(spec.base_set.size());
      const double k = spec.anisotropy[0] + spec.anisotropy[1] + spec.anisotropy[2];
      return beta * beta * a * n * n * std::pow(spec.spin, 2.0 * a) / sites * k * k;
    }
    case ModelFamily::Heisenberg:
      return 0.0;
  }
  return 0.0;
}

ScanRow psi_variance_check(const ModelSpec& spec, int sites, double beta, double lambda, std::size_t samples,
                           std::uint64_t seed) {
  if (!spec.disordered()) throw InvalidArgument("psi_variance_check needs a disordered family");
  if (samples < 2) throw InvalidArgument("psi_variance_check needs at least two samples");
  const std::vector<double> psi = map_samples<double>(samples, 0, [&](std::uint64_t s) {
    auto model = std::make_shared<const ModelInstance>(spec.build(sites, seed, s, false));
    return assemble(model, PerturbationParams{lambda, 0.0, 0.5, 0.0}).thermo(beta).log_z / sites;
  });
  ScanRow row = row_for("psi-variance", spec, sites, beta, lambda, 0.0, 0.0, "psi_variance", variance_of(psi));
  attach_bound(row, psi_variance_bound(spec, sites, beta));
  return row;
}

// ---------------------------------------------------------------------------

std::vector<ScanRow> overlap_dichotomy(const std::vector<int>& sizes, double beta,
                                       const std::vector<double>& lambdas, std::size_t samples,
                                       std::uint64_t seed) {
  ModelSpec spec;
  spec.family = ModelFamily::Rem;
  spec.replicas = 2;
  std::vector<ScanRow> rows;
  for (double lambda : lambdas) {
    for (int n : sizes) {
      const std::vector<double> h = map_samples<double>(samples, 0, [&](std::uint64_t s) {
        const ModelInstance m = spec.build(n, seed, s, false);
        return rem_thermo(m.replica_energies(), 2, beta, n * lambda).h;
      });
      rows.push_back(row_for("dichotomy", spec, n, beta, lambda, 0.0, 0.0, "overlap", estimate(h)));
      rows.push_back(row_for("dichotomy", spec, n, beta, lambda, 0.0, 0.0, "overlap_product",
                             jackknife({h}, [](std::span<const double> m) { return m[0] * (1.0 - m[0]); })));
    }
  }
  return rows;
}

std::vector<ScanRow> limit_order_probe(const ModelSpec& spec, const std::vector<int>& sizes,
                                       const std::vector<double>& lambdas, double beta, std::size_t samples,
                                       std::uint64_t seed) {
  std::vector<ScanRow> rows;
  for (double lambda : lambdas) {
    for (const VarianceScanPoint& p : variance_scan(spec, sizes, beta, lambda, samples, seed)) {
      rows.push_back(row_for("limit-probe", spec, p.sites, beta, lambda, 0.0, 0.0, "h_mean", p.h));
      rows.push_back(row_for("limit-probe", spec, p.sites, beta, lambda, 0.0, 0.0, "h2_mean", p.h2));
      rows.push_back(row_for("limit-probe", spec, p.sites, beta, lambda, 0.0, 0.0, "total_var", p.total));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

double double_commutator_norm(const ModelInstance& model) {
  if (!model.quantum()) return 0.0;
  const auto& h = std::get<HermitianOperator>(model.perturbation());
  const auto& h0 = std::get<HermitianOperator>(model.unperturbed());
  if (h.is_diagonal()) {
    // [h,[H0,h]]_ij = -(h_i - h_j)^2 (H0)_ij for diagonal h.
    const RealVector d = h.diagonal_values();
    Matrix out = h0.matrix();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double diff = d[i] - d[j];
        out(i, j) *= -diff * diff;
      }
    }
    return operator_norm(HermitianOperator(std::move(out)));
  }
  return operator_norm(HermitianOperator(commutator(h.matrix(), commutator(h0, h))));
}

std::vector<ScanRow> assumption_suite(const ModelSpec& spec, const std::vector<int>& sizes, double beta,
                                      double lambda, std::size_t samples, std::uint64_t seed) {
  const std::size_t count = effective_samples(spec, samples);
  std::vector<ScanRow> rows;
  std::optional<EstimatorResult> previous;
  for (int n : sizes) {
    const std::vector<double> psi = map_samples<double>(count, 0, [&](std::uint64_t s) {
      auto model = std::make_shared<const ModelInstance>(spec.build(n, seed, s, false));
      return assemble(model, PerturbationParams{lambda, 0.0, 0.5, 0.0}).thermo(beta).log_z / n;
    });
    const EstimatorResult p = estimate(psi);
    rows.push_back(row_for("assumptions", spec, n, beta, lambda, 0.0, 0.0, "p_N", p));
    if (previous) {
      const double se = std::hypot(previous->std_error, p.std_error);
      rows.push_back(row_for("assumptions", spec, n, beta, lambda, 0.0, 0.0, "p_N_increment",
                             EstimatorResult{std::abs(p.mean - previous->mean), se * se * p.count, se, p.count}));
    }
    previous = p;

    EstimatorResult var = variance_of(psi);
    var.mean *= n;
    var.std_error *= n;
    var.variance *= static_cast<double>(n) * n;
    ScanRow var_row = row_for("assumptions", spec, n, beta, lambda, 0.0, 0.0, "psi_var_times_N", var);
    if (spec.disordered()) attach_bound(var_row, n * psi_variance_bound(spec, n, beta));
    rows.push_back(var_row);

    const bool materialize = spec.family != ModelFamily::Rem;
    const double norm = materialize ? double_commutator_norm(spec.build(n, seed, 0, true)) : 0.0;
    rows.push_back(row_for("assumptions", spec, n, beta, lambda, 0.0, 0.0, "commutator_norm", exact(norm)));
  }
  return rows;
}

// ---------------------------------------------------------------------------

HermitianOperator random_hermitian(std::size_t dim, DisorderStream& stream) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = stream.next();
      const double im = stream.next();
      x(i, j) = Complex(re, im);
    }
  }
  return HermitianOperator(Matrix(0.5 * (x + x.adjoint())));
}

std::vector<ScanRow> harris_rows(const std::string& model, int sites, int replicas, double beta,
                                 const HarrisTerms& terms) {
  constexpr double kSlack = 1e-9;
  ScanRow base;
  base.experiment = "harris";
  base.model = model;
  base.sites = sites;
  base.replicas = replicas;
  base.beta = beta;

  ScanRow lower = base;
  lower.observable = "harris_lower";
  lower.estimate = exact(terms.lower - terms.mid);
  attach_bound(lower, kSlack, 0.0, terms.mid != 0.0 ? terms.lower / terms.mid : 1.0);

  ScanRow upper = base;
  upper.observable = "harris_upper";
  upper.estimate = exact(terms.mid - terms.lower - terms.commutator_term);
  const double cap = terms.lower + terms.commutator_term;
  attach_bound(upper, kSlack, 0.0, cap != 0.0 ? terms.mid / cap : 1.0);
  return {lower, upper};
}

std::vector<ScanRow> harris_sweep(std::size_t count, std::size_t max_dim, double beta, std::uint64_t seed) {
  if (max_dim < 2) throw InvalidArgument("harris_sweep needs max_dim >= 2");
  std::vector<std::vector<ScanRow>> per_instance = map_samples<std::vector<ScanRow>>(
      count, 0, [&](std::uint64_t i) {
        const std::uint64_t key = DisorderStream::derive_key(seed, i, kHarrisChannel + 1);
        const std::size_t dim = 2 + static_cast<std::size_t>(key % (max_dim - 1));
        DisorderStream stream(seed, i, kHarrisChannel);
        const HermitianOperator h = random_hermitian(dim, stream);
        const HermitianOperator o = random_hermitian(dim, stream);
        return harris_rows("random", static_cast<int>(dim), 1, beta, harris_check(GibbsSpec(beta, h), o));
      });

  std::vector<ScanRow> rows;
  for (auto& r : per_instance) rows.insert(rows.end(), r.begin(), r.end());

  const PerturbationParams params{0.3, 0.0, 0.5, 0.0};
  const auto add_model = [&](ModelInstance m) {
    const int sites = m.sites();
    const int replicas = m.replicas();
    const std::string tag(to_string(m.family()));
    const auto model = std::make_shared<const ModelInstance>(std::move(m));
    const PerturbedFamily family = assemble(model, params);
    const auto terms = harris_check(family.spec(beta), model->perturbation());
    const auto r = harris_rows(tag, sites, replicas, beta, terms);
    rows.insert(rows.end(), r.begin(), r.end());
  };
  add_model(build_heisenberg(4));
  add_model(build_ea(3, {0.3, 0.3, 0.4}, {0, 1}, SpinMagnitude::from_twice(1), DisorderStream(seed, 0, 2 * 3)));
  add_model(build_rem(4, 2, DisorderStream(seed, 0, 2 * 4)));
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<ScanRow> thermo_identity_check(const PerturbedFamily& family, double beta,
                                           const std::vector<double>& lambdas,
                                           const ThermoIdentityTolerances& tol) {
  const ModelInstance& m = family.model();
  const double n = m.sites();
  // Convexity holds for every step, so a wider one keeps round-off in the
  // second difference far below the tolerance.
  const double convex_step = std::max(tol.step, 1e-2);
  std::vector<ScanRow> rows;
  for (double lambda : lambdas) {
    const auto psi = [&](double l) { return family.thermo(beta, l).log_z / n; };
    const ThermoPoint at = family.thermo(beta, lambda);
    const double slope = (psi(lambda + tol.step) - psi(lambda - tol.step)) / (2.0 * tol.step);

    ScanRow base;
    base.experiment = "thermo-identity";
    base.model = std::string(to_string(m.family()));
    base.sites = m.sites();
    base.replicas = m.replicas();
    base.beta = beta;
    base.lambda = lambda;
    base.mu = family.params().mu;
    base.alpha = family.params().alpha;

    ScanRow identity = base;
    identity.observable = "dpsi_identity";
    identity.estimate = exact(std::abs(slope - beta * at.h));
    attach_bound(identity, tol.derivative);
    rows.push_back(identity);

    const double second =
        (psi(lambda + convex_step) - 2.0 * at.log_z / n + psi(lambda - convex_step)) / (convex_step * convex_step);
    ScanRow convex = base;
    convex.observable = "convexity";
    convex.estimate = exact(-second);
    attach_bound(convex, tol.convexity, 0.0, second);
    rows.push_back(convex);
  }
  return rows;
}

ScanRow derivative_equivalence(const PerturbedFamily& family, double beta, double lambda, double rel_tolerance) {
  const ModelInstance& m = family.model();
  const double n = m.sites();
  const GibbsSpec state = family.spec(beta, lambda);
  const double spectral = beta * beta * n * n * truncated_duhamel(state, m.perturbation(), m.perturbation());
  const double fd = logz_derivative(family.gibbs_family(beta), 2, lambda);
  const double rel = std::abs(fd - spectral) / std::max(std::abs(spectral), 1e-300);

  ScanRow row;
  row.experiment = "thermo-identity";
  row.model = std::string(to_string(m.family()));
  row.sites = m.sites();
  row.replicas = m.replicas();
  row.beta = beta;
  row.lambda = lambda;
  row.mu = family.params().mu;
  row.alpha = family.params().alpha;
  row.observable = "duhamel_vs_fd";
  row.estimate = exact(rel);
  attach_bound(row, rel_tolerance);
  return row;
}

}  // namespace spinvar
