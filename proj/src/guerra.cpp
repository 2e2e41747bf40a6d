#include "spinvar/errors.hpp"
#include "spinvar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinvar {

double rem_pressure(double beta) {
  if (beta > kRemCriticalBeta) return beta * kRemCriticalBeta;
  return 0.5 * beta * beta + std::log(2.0);
}

// Above β_c this gives nβ√(2 log 2), plus βλ once λ > 0.
double guerra_formula(int replicas, double beta, double lambda) {
  if (replicas < 2) throw InvalidArgument("guerra_formula needs at least two replicas");
  const double p1 = rem_pressure(beta);
  const double symmetric = replicas * p1;
  const double pinned = rem_pressure(2.0 * beta) + beta * lambda + (replicas - 2) * p1;
  return std::max(symmetric, pinned);
}

bool GuerraReport::gap_decreasing() const {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double se = std::hypot(points[i].pressure.std_error, points[i + 1].pressure.std_error);
    if (points[i + 1].gap > points[i].gap + kStderrSlack * se) return false;
  }
  return true;
}

GuerraReport guerra_compare(int replicas, double beta, double lambda, const std::vector<int>& sizes,
                            std::size_t samples, std::uint64_t seed) {
  if (sizes.empty()) throw InvalidArgument("guerra_compare needs at least one system size");
  GuerraReport report;
  report.beta = beta;
  report.lambda = lambda;
  report.replicas = replicas;
  report.analytic = guerra_formula(replicas, beta, lambda);

  ModelSpec spec;
  spec.family = ModelFamily::Rem;
  spec.replicas = replicas;
  for (int n : sizes) {
    struct Sample {
      double psi;
      double overlap;
    };
    const auto values = map_samples<Sample>(samples, 0, [&](std::uint64_t s) {
      const ModelInstance m = spec.build(n, seed, s, false);
      const ThermoPoint t = rem_thermo(m.replica_energies(), replicas, beta, n * lambda);
      return Sample{t.log_z / n, t.h};
    });
    std::vector<double> psi;
    std::vector<double> overlap;
    for (const Sample& v : values) {
      psi.push_back(v.psi);
      overlap.push_back(v.overlap);
    }
    GuerraPoint point;
    point.sites = n;
    point.pressure = estimate(psi);
    point.overlap = estimate(overlap);
    point.gap = std::abs(point.pressure.mean - report.analytic);
    report.points.push_back(point);
  }
  return report;
}

std::vector<ScanRow> guerra_rows(const GuerraReport& report) {
  std::vector<ScanRow> rows;
  for (const GuerraPoint& p : report.points) {
    ScanRow base;
    base.experiment = "guerra";
    base.model = "rem";
    base.sites = p.sites;
    base.replicas = report.replicas;
    base.beta = report.beta;
    base.lambda = report.lambda;

    ScanRow pressure = base;
    pressure.observable = "pressure";
    pressure.estimate = p.pressure;
    rows.push_back(pressure);

    ScanRow analytic = base;
    analytic.observable = "pressure_analytic";
    analytic.estimate = EstimatorResult{report.analytic, 0.0, 0.0, 1};
    rows.push_back(analytic);

    ScanRow gap = base;
    gap.observable = "pressure_gap";
    gap.estimate = EstimatorResult{p.gap, p.pressure.variance, p.pressure.std_error, p.pressure.count};
    rows.push_back(gap);

    ScanRow slope = base;
    slope.observable = "overlap";
    slope.estimate = p.overlap;
    rows.push_back(slope);
  }
  return rows;
}

}  // namespace spinvar
