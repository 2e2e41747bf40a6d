#include "spinvar/disorder.hpp"

#include "spinvar/errors.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

namespace spinvar {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DisorderStream::derive_key(std::uint64_t master_seed, std::uint64_t sample_index,
                                         std::uint64_t channel) {
  return splitmix64(splitmix64(splitmix64(master_seed) ^ sample_index) ^ (channel * 0xd1b54a32d192ed03ULL));
}

DisorderStream::DisorderStream(std::uint64_t master_seed, std::uint64_t sample_index, std::uint64_t channel)
    : master_seed_(master_seed),
      sample_index_(sample_index),
      channel_(channel),
      engine_(derive_key(master_seed, sample_index, channel)) {}

double DisorderStream::next() {
  ++counter_;
  return normal_(engine_);
}

std::vector<double> DisorderStream::draws(std::size_t count) {
  std::vector<double> out(count);
  for (double& x : out) x = next();
  return out;
}

std::vector<double> gaussian_draws(DisorderStream& stream, std::size_t count) {
  if (count < 1) throw InvalidArgument("gaussian_draws needs count >= 1");
  return stream.draws(count);
}

// ---------------------------------------------------------------------------

EstimatorResult estimate(std::span<const double> values) {
  EstimatorResult r;
  r.count = values.size();
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.variance = ss / static_cast<double>(values.size() - 1);
    r.std_error = std::sqrt(r.variance / static_cast<double>(values.size()));
  }
  return r;
}

EstimatorResult jackknife(const std::vector<std::vector<double>>& columns,
                          const std::function<double(std::span<const double> means)>& statistic) {
  if (columns.empty()) throw InvalidArgument("jackknife needs at least one column");
  const std::size_t m = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != m) throw InvalidArgument("jackknife columns differ in length");
  }
  const std::size_t k = columns.size();
  std::vector<double> totals(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (double v : columns[j]) totals[j] += v;
  }
  std::vector<double> means(k);
  for (std::size_t j = 0; j < k; ++j) means[j] = totals[j] / static_cast<double>(m);

  EstimatorResult r;
  r.count = m;
  r.mean = statistic(means);
  if (m < 2) return r;

  std::vector<double> leave_out(m);
  std::vector<double> partial(k);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t j = 0; j < k; ++j) {
      partial[j] = (totals[j] - columns[j][s]) / static_cast<double>(m - 1);
    }
    leave_out[s] = statistic(partial);
  }
  double avg = 0.0;
  for (double v : leave_out) avg += v;
  avg /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : leave_out) ss += (v - avg) * (v - avg);
  const double jk_var = static_cast<double>(m - 1) / static_cast<double>(m) * ss;
  r.std_error = std::sqrt(jk_var);
  r.variance = jk_var * static_cast<double>(m);
  return r;
}

void for_each_sample(std::size_t count, std::uint64_t first,
                     const std::function<void(std::uint64_t index)>& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long s = 0; s < n; ++s) {
    try {
      body(first + static_cast<std::uint64_t>(s));
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  for (std::size_t s = 0; s < count; ++s) {
    if (!errors[s]) continue;
    const std::uint64_t index = first + s;
    try {
      std::rethrow_exception(errors[s]);
    } catch (const SampleError&) {
      throw;
    } catch (const std::exception& e) {
      throw SampleError(index, e.what());
    } catch (...) {
      throw SampleError(index, "unknown failure");
    }
  }
}

EstimatorResult quenched_average(const std::function<double(std::uint64_t index)>& observable,
                                 std::size_t count, std::uint64_t first) {
  if (count < 2) throw InvalidArgument("quenched_average needs at least two samples");
  const std::vector<double> values = map_samples<double>(count, first, observable);
  return estimate(values);
}

// ---------------------------------------------------------------------------

GaussHermiteRule::GaussHermiteRule(int nodes) {
  if (nodes < kMinNodes || nodes > kMaxNodes) {
    throw InvalidArgument("Gauss-Hermite node count must be in [8, 128], got " + std::to_string(nodes));
  }
  // Weight function e^{-b(x-a)^2} with b = 1/2 is the standard normal up to
  // the factor sqrt(2π).
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, static_cast<std::size_t>(nodes), 0.0,
                                  0.5, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw NumericalFailure("failed to build Gauss-Hermite rule");
  const double* x = gsl_integration_fixed_nodes(ws.get());
  const double* w = gsl_integration_fixed_weights(ws.get());
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  nodes_.assign(x, x + nodes);
  weights_.resize(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) weights_[static_cast<std::size_t>(i)] = w[i] * norm;
}

double GaussHermiteRule::expectation(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double v = f(nodes_[i]);
    if (!std::isfinite(v)) {
      throw NumericalFailure("integrand is not finite at node " + std::to_string(nodes_[i]));
    }
    acc += weights_[i] * v;
  }
  return acc;
}

double gauss_hermite_expectation(const std::function<double(double)>& f, int nodes) {
  return GaussHermiteRule(nodes).expectation(f);
}

double ibp_residual(const std::function<double(double)>& f, int nodes, double diff_step) {
  if (!(diff_step > 0.0)) throw InvalidArgument("ibp_residual needs a positive step");
  const GaussHermiteRule rule(nodes);
  const double lhs = rule.expectation([&](double g) { return g * f(g); });
  const double rhs = rule.expectation(
      [&](double g) { return (f(g + diff_step) - f(g - diff_step)) / (2.0 * diff_step); });
  return std::abs(lhs - rhs);
}

}  // namespace spinvar
