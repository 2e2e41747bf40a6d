#pragma once

// Reproducible Gaussian disorder, quenched averages with error bars, and
// Gauss-Hermite quadrature over a single standard Gaussian variable.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace spinvar {

/// Standard-normal stream whose draws depend only on (master seed, sample
/// index, channel). Distinct sample indices give independent streams.
class DisorderStream {
 public:
  DisorderStream(std::uint64_t master_seed, std::uint64_t sample_index, std::uint64_t channel = 0);

  double next();
  std::vector<double> draws(std::size_t count);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t sample_index() const { return sample_index_; }
  std::uint64_t channel() const { return channel_; }
  std::uint64_t draw_count() const { return counter_; }

  /// 64-bit key derived from the triple; used to seed the engine.
  static std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t sample_index,
                                  std::uint64_t channel);

 private:
  std::uint64_t master_seed_;
  std::uint64_t sample_index_;
  std::uint64_t channel_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Channels used by the model builders.
inline constexpr std::uint64_t kCouplingChannel = 0;
inline constexpr std::uint64_t kFieldChannel = 1;

std::vector<double> gaussian_draws(DisorderStream& stream, std::size_t count);

struct EstimatorResult {
  double mean = 0.0;
  double variance = 0.0;   // unbiased sample variance
  double std_error = 0.0;  // sqrt(variance / count)
  std::size_t count = 0;
};

/// Mean, unbiased variance and standard error, summed in index order.
EstimatorResult estimate(std::span<const double> values);

/// Jackknife estimate of a smooth function of column means. `columns[k][s]`
/// is observable k on sample s. The reported variance is count * (jackknife
/// variance of the statistic), so std_error = sqrt(variance / count) holds.
EstimatorResult jackknife(const std::vector<std::vector<double>>& columns,
                          const std::function<double(std::span<const double> means)>& statistic);

/// Runs body(first + s) for s in [0, count). Samples may run on several
/// threads; exceptions are rethrown as SampleError for the lowest failing index.
void for_each_sample(std::size_t count, std::uint64_t first,
                     const std::function<void(std::uint64_t index)>& body);

/// Evaluates fn for each sample index and returns results in index order.
template <typename T, typename Fn>
std::vector<T> map_samples(std::size_t count, std::uint64_t first, Fn&& fn) {
  std::vector<T> out(count);
  for_each_sample(count, first, [&](std::uint64_t index) { out[index - first] = fn(index); });
  return out;
}

/// Quenched average of a scalar observable over `count` disorder samples
/// starting at `first`. Requires count >= 2.
EstimatorResult quenched_average(const std::function<double(std::uint64_t index)>& observable,
                                 std::size_t count, std::uint64_t first = 0);

/// Gauss-Hermite rule normalized to the standard normal measure.
class GaussHermiteRule {
 public:
  static constexpr int kMinNodes = 8;
  static constexpr int kMaxNodes = 128;
  static constexpr int kDefaultNodes = 64;

  explicit GaussHermiteRule(int nodes = kDefaultNodes);

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Σ w_i f(x_i); throws NumericalFailure on a non-finite f(x_i).
  double expectation(const std::function<double(double)>& f) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

double gauss_hermite_expectation(const std::function<double(double)>& f,
                                 int nodes = GaussHermiteRule::kDefaultNodes);

/// |E[g F(g)] - E[F'(g)]| with F' from a central difference; the Gaussian
/// integration-by-parts identity makes this vanish for smooth bounded F.
double ibp_residual(const std::function<double(double)>& f, int nodes = GaussHermiteRule::kDefaultNodes,
                    double diff_step = 1e-4);

}  // namespace spinvar
