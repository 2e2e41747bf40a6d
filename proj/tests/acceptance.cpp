// One line per acceptance criterion; nonzero exit if any fails.

#include "spinvar/errors.hpp"
#include "spinvar/run.hpp"
#include "spinvar/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace spinvar;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double time_limit, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = time_limit <= 0.0 || seconds < time_limit;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2fs", seconds);
  std::cout << (pass ? "PASS" : "FAIL") << "  AC" << id << "  " << title << "  [" << out.detail
            << (in_time ? "" : "; over time limit") << "; " << timing << "]" << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ModelSpec spec_for(ModelFamily f) {
  ModelSpec s;
  s.family = f;
  s.replicas = f == ModelFamily::Heisenberg ? 1 : 2;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main() {
  criterion(1, "spin commutation and Casimir identities", 1.0, [] {
    double worst = 0.0;
    for (int twice : {1, 2, 3}) {
      const LocalSpin s = local_spin(SpinMagnitude::from_twice(twice));
      const Complex i(0.0, 1.0);
      const double v = s.spin.value();
      const Eigen::Index d = s.sx.rows();
      worst = std::max(worst, max_abs(commutator(s.sx, s.sy) - i * s.sz));
      worst = std::max(worst, max_abs(commutator(s.sy, s.sz) - i * s.sx));
      worst = std::max(worst, max_abs(commutator(s.sz, s.sx) - i * s.sy));
      worst = std::max(worst, max_abs(s.sx * s.sx + s.sy * s.sy + s.sz * s.sz - v * (v + 1) * Matrix::Identity(d, d)));
    }
    return Outcome{worst <= 1e-12, "max residual " + fmt(worst)};
  });

  criterion(2, "Duhamel product of sigma-x in a field", 1.0, [] {
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    const HermitianOperator sx(x);
    const HermitianOperator sz = HermitianOperator::diagonal(Eigen::Vector2d(1.0, -1.0));
    double worst = 0.0;
    for (double bh : {0.1, 1.0, 10.0}) {
      worst = std::max(worst, std::abs(duhamel(GibbsSpec(1.0, -bh * sz), sx, sx) - std::tanh(bh) / bh));
    }
    const double flat = duhamel(GibbsSpec(1.0, HermitianOperator::zero(2)), sx, sx);
    return Outcome{worst <= 1e-10 && flat == 1.0, "max error " + fmt(worst) + ", h=0 value " + fmt(flat)};
  });

  criterion(3, "spectral vs finite-difference second derivative", 10.0, [] {
    double worst = 0.0;
    bool ok = true;
    const auto heis = std::make_shared<const ModelInstance>(build_heisenberg(4));
    const auto ea = std::make_shared<const ModelInstance>(spec_for(ModelFamily::Ea).build(2, 42, 0));
    for (const auto& m : {heis, ea}) {
      for (double beta : {0.5, 2.0}) {
        for (double lambda : {0.0, 0.3}) {
          const ScanRow r = derivative_equivalence(assemble(m, {}), beta, lambda, 1e-4);
          worst = std::max(worst, r.estimate.mean);
          ok = ok && *r.pass;
        }
      }
    }
    return Outcome{ok, "max relative error " + fmt(worst)};
  });

  criterion(4, "Harris sandwich on 100 random pairs and all families", 30.0, [] {
    const auto rows = harris_sweep(100, 64, 1.0, 42);
    double worst = 0.0;
    bool ok = rows.size() == 2 * 103;
    for (const ScanRow& r : rows) {
      ok = ok && *r.pass;
      worst = std::max(worst, r.estimate.mean);
    }
    return Outcome{ok, std::to_string(rows.size()) + " checks, worst violation " + fmt(worst)};
  });

  criterion(5, "thermodynamic identity and convexity", 30.0, [] {
    const std::vector<double> lambdas{-0.5, 0.0, 0.3, 1.0};
    double worst_identity = 0.0;
    double worst_convex = -1e300;
    bool ok = true;
    for (ModelFamily f : {ModelFamily::Rem, ModelFamily::Heisenberg, ModelFamily::Ea}) {
      const int sites = f == ModelFamily::Rem ? 6 : (f == ModelFamily::Heisenberg ? 4 : 3);
      for (double beta : {0.5, 1.0, 2.0}) {
        const PerturbedFamily fam = assemble(spec_for(f).build(sites, 42, 0), {});
        for (const ScanRow& r : thermo_identity_check(fam, beta, lambdas)) {
          ok = ok && *r.pass;
          if (r.observable == "dpsi_identity") worst_identity = std::max(worst_identity, r.estimate.mean);
          else worst_convex = std::max(worst_convex, r.estimate.mean);
        }
      }
    }
    return Outcome{ok, "max |dpsi - beta<h>| " + fmt(worst_identity) + ", max -second difference " + fmt(worst_convex)};
  });

  criterion(6, "REM psi variance below beta^2 n^2 / N", 120.0, [] {
    bool ok = true;
    double worst = 0.0;
    for (int n : {6, 8, 10}) {
      for (double beta : {0.8, 1.5}) {
        for (double lambda : {0.0, 0.5}) {
          const ScanRow r = psi_variance_check(spec_for(ModelFamily::Rem), n, beta, lambda, 200, 42);
          ok = ok && *r.pass;
          worst = std::max(worst, *r.ratio);
        }
      }
    }
    return Outcome{ok, "max Var/bound " + fmt(worst)};
  });

  criterion(7, "EA psi variance below the interaction-range bound", 300.0, [] {
    bool ok = true;
    std::string detail;
    for (double lambda : {0.0, 0.3}) {
      const ScanRow r = psi_variance_check(spec_for(ModelFamily::Ea), 3, 1.0, lambda, 100, 42);
      ok = ok && *r.pass;
      detail += "lambda=" + fmt(lambda) + ": Var " + fmt(r.estimate.mean) + " vs bound " + fmt(*r.bound) + "  ";
    }
    return Outcome{ok, detail};
  });

  criterion(8, "first-derivative bound under Gaussian smoothing", 120.0, [] {
    bool ok = true;
    double worst = 0.0;
    Lemma1Options o;
    o.order = 1;
    o.alpha = 0.5;
    o.lambda = 0.2;
    o.nodes = 64;
    for (double mu : {0.5, 1.0}) {
      o.mu = mu;
      for (int n : {4, 6}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
          const ScanRow r = lemma1_bound_check(
              std::make_shared<const ModelInstance>(spec_for(ModelFamily::Rem).build(n, 42, s)), 1.0, o);
          ok = ok && *r.ratio <= 1.001;
          worst = std::max(worst, *r.ratio);
        }
      }
      const ScanRow r = lemma1_bound_check(std::make_shared<const ModelInstance>(build_heisenberg(4)), 1.0, o);
      ok = ok && *r.ratio <= 1.001;
      worst = std::max(worst, *r.ratio);
    }
    return Outcome{ok, "max ratio " + fmt(worst)};
  });

  criterion(9, "Guerra pressure formula and finite-size gap", 180.0, [] {
    const bool exact = rem_pressure(1.0) == 0.5 + std::log(2.0);
    const bool digits = std::abs(rem_pressure(1.0) - 1.193147) < 5e-7;
    const GuerraReport r = guerra_compare(2, 1.0, 0.0, {6, 8, 10, 12}, 200, 42);
    std::string gaps;
    for (const GuerraPoint& p : r.points) gaps += fmt(p.gap) + "±" + fmt(p.pressure.std_error) + " ";
    return Outcome{exact && digits && r.gap_decreasing(), "p1(1,0)=" + fmt(rem_pressure(1.0)) + ", gaps " + gaps};
  });

  criterion(10, "variance of the perturbation density decreases with N", 300.0, [] {
    const auto heis = variance_scan(spec_for(ModelFamily::Heisenberg), {4, 6, 8, 10}, 1.0, 0.3, 1, 42);
    std::vector<EstimatorResult> hv;
    std::string detail = "Heisenberg V:";
    for (const auto& p : heis) {
      hv.push_back(p.total);
      detail += " " + fmt(p.total.mean);
    }
    const bool heis_ok = hv.back().mean < hv.front().mean && non_increasing(hv, 1e-3);

    const auto rem = variance_scan(spec_for(ModelFamily::Rem), {6, 12}, 2.0, 0.5, 200, 42);
    const EstimatorResult& v6 = rem[0].total;
    const EstimatorResult& v12 = rem[1].total;
    const bool rem_ok = v12.mean < v6.mean + kStderrSlack * std::hypot(v6.std_error, v12.std_error);
    detail += "; REM V(6)=" + fmt(v6.mean) + "±" + fmt(v6.std_error) + " V(12)=" + fmt(v12.mean) + "±" +
              fmt(v12.std_error);
    return Outcome{heis_ok && rem_ok, detail};
  });

  criterion(11, "REM overlap dichotomy", 120.0, [] {
    const auto cold = overlap_dichotomy({6, 8, 10}, 2.0, {0.5}, 200, 42);
    std::vector<EstimatorResult> overlap, product;
    for (const ScanRow& r : cold) (r.observable == "overlap" ? overlap : product).push_back(r.estimate);
    const bool rises = overlap.back().mean > overlap.front().mean;
    const bool shrinks = non_increasing(product) && product.back().mean < product.front().mean;
    const auto hot = overlap_dichotomy({10}, 0.5, {0.0}, 200, 42);
    const double hot_overlap = hot.front().estimate.mean;
    return Outcome{rises && shrinks && hot_overlap <= 0.05,
                   "E<h> " + fmt(overlap.front().mean) + " -> " + fmt(overlap.back().mean) + ", product " +
                       fmt(product.front().mean) + " -> " + fmt(product.back().mean) + ", hot E<h> " +
                       fmt(hot_overlap)};
  });

  criterion(12, "staggered magnetization vanishes at lambda=0 but fluctuates", 30.0, [] {
    bool ok = true;
    double worst = 0.0;
    double smallest_h2 = 1e300;
    for (int l : {2, 4, 6, 8, 10}) {
      const ThermoPoint t = assemble(build_heisenberg(l), {}).thermo(1.0);
      worst = std::max(worst, std::abs(t.h));
      smallest_h2 = std::min(smallest_h2, t.h2);
      ok = ok && std::abs(t.h) <= 1e-10 && t.h2 > 0.0;
    }
    return Outcome{ok, "max |<h>| " + fmt(worst) + ", min <h^2> " + fmt(smallest_h2)};
  });

  criterion(13, "byte-identical results from the same manifest", 0.0, [] {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "spinvar_acceptance";
    fs::remove_all(root);
    bool ok = true;
    std::string detail;
    for (const char* name : {"psi-variance", "dichotomy", "harris", "variance-scan"}) {
      RunConfig c = default_config(name);
      if (c.experiment == "dichotomy") c.sizes = {6, 8};
      std::ostringstream log;
      c.output_dir = (root / name / "a").string();
      const int first_code = run(c, log, true);
      c.output_dir = (root / name / "b").string();
      run(c, log, true);
      RunConfig replay = parse_config(nlohmann::json::parse(slurp(root / name / "a" / "manifest.json")));
      replay.output_dir = (root / name / "c").string();
      run(replay, log, true);
      const std::string a = slurp(root / name / "a" / "results.csv");
      const bool same = !a.empty() && a == slurp(root / name / "b" / "results.csv") &&
                        a == slurp(root / name / "c" / "results.csv");
      ok = ok && same && first_code == kExitOk;
      detail += std::string(name) + (same ? " identical" : " DIFFERS") + " (exit " + std::to_string(first_code) + ") ";
    }
    return Outcome{ok, detail};
  });

  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
