#include "spinvar/run.hpp"

#include "spinvar/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <locale>
#include <ostream>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spinvar {

using nlohmann::json;

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry{
      {"variance-scan", "E<(h - E<h>)^2> over a size ladder, split into thermal and disorder parts"},
      {"guerra", "REM pressure p_{N,n} against the analytic max-formula; gap trend over N"},
      {"lemma1", "Gaussian-averaged lambda-derivative of <h> against sqrt(k!) C_h |mu|^-k N^{k(1-alpha)}"},
      {"psi-variance", "Var(psi_N) against its analytic bound (REM or EA)"},
      {"dichotomy", "REM overlap E<h> and E<h>(1 - E<h>) across sizes and lambda"},
      {"limit-probe", "(N, lambda) grid of <h>, <h^2> and variance; descriptive"},
      {"assumptions", "p_N increments, N Var(psi_N) and ||[h,[H,h]]|| over a size ladder"},
      {"harris", "(O,O) <= <O^2> <= (O,O) + (beta/12)<[O,[H,O]]> on random and model instances"},
      {"thermo-identity", "d psi/d lambda = beta <h>, convexity in lambda, and (h;h) against log Z differences"},
  };
  return registry;
}

std::string format_experiment_list() {
  std::ostringstream out;
  for (const ExperimentInfo& e : experiment_registry()) {
    const RunConfig d = default_config(e.name);
    json defaults = to_json(d);
    defaults.erase("experiment");
    defaults.erase("output_dir");
    out << e.name << "\n    " << e.description << "\n    defaults: " << defaults.dump() << "\n";
  }
  return out.str();
}

std::string canonical_experiment_name(const std::string& name) {
  std::string canonical = name;
  std::replace(canonical.begin(), canonical.end(), '_', '-');
  for (const ExperimentInfo& e : experiment_registry()) {
    if (e.name == canonical) return canonical;
  }
  throw InvalidArgument("unknown experiment '" + name + "'");
}

RunConfig default_config(const std::string& experiment) {
  RunConfig c;
  c.experiment = canonical_experiment_name(experiment);
  c.mu = 0.0;
  c.betas = {1.0};
  if (c.experiment == "variance-scan") {
    c.model.family = ModelFamily::Heisenberg;
    c.sizes = {4, 6, 8, 10};
    c.lambdas = {0.3};
  } else if (c.experiment == "guerra") {
    c.sizes = {6, 8, 10, 12};
    c.lambdas = {0.0};
  } else if (c.experiment == "lemma1") {
    c.sizes = {4, 6};
    c.lambdas = {0.2};
    c.mu = 1.0;
  } else if (c.experiment == "psi-variance") {
    c.sizes = {8};
    c.lambdas = {0.0};
  } else if (c.experiment == "dichotomy") {
    c.sizes = {6, 8, 10};
    c.betas = {2.0};
    c.lambdas = {0.5};
  } else if (c.experiment == "limit-probe") {
    c.model.family = ModelFamily::Heisenberg;
    c.sizes = {4, 6, 8};
    c.lambdas = {0.3, 0.1, 0.03, 0.0};
  } else if (c.experiment == "assumptions") {
    c.model.family = ModelFamily::Heisenberg;
    c.sizes = {4, 6, 8, 10};
    c.lambdas = {0.3};
  } else if (c.experiment == "harris") {
    c.sizes = {};
    c.lambdas = {0.3};
  } else if (c.experiment == "thermo-identity") {
    c.model.family = ModelFamily::Heisenberg;
    c.sizes = {4};
    c.lambdas = {-0.5, 0.0, 0.3, 1.0};
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

json model_to_json(const ModelSpec& m) {
  return json{{"family", std::string(to_string(m.family))},
              {"replicas", m.replicas},
              {"spin", m.spin},
              {"couplings", m.couplings},
              {"anisotropy", m.anisotropy},
              {"base_set", m.base_set}};
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
  }
}

ModelSpec model_from_json(const json& obj, ModelSpec m) {
  if (!obj.is_object()) throw InvalidArgument("'model' must be an object");
  reject_unknown(obj, {"family", "replicas", "spin", "couplings", "anisotropy", "base_set"}, "model");
  if (obj.contains("family")) {
    if (!obj.at("family").is_string()) throw InvalidArgument("model family must be a string");
    m.family = parse_family(obj.at("family").get<std::string>());
  }
  read(obj, "replicas", m.replicas);
  read(obj, "spin", m.spin);
  read(obj, "couplings", m.couplings);
  read(obj, "anisotropy", m.anisotropy);
  read(obj, "base_set", m.base_set);
  return m;
}

}  // namespace

json to_json(const RunConfig& c) {
  return json{{"experiment", c.experiment},
              {"model", model_to_json(c.model)},
              {"sizes", c.sizes},
              {"betas", c.betas},
              {"lambdas", c.lambdas},
              {"mu", c.mu},
              {"alpha", c.alpha},
              {"order", c.order},
              {"samples", c.samples},
              {"seed", c.seed},
              {"nodes", c.nodes},
              {"instances", c.instances},
              {"max_dim", c.max_dim},
              {"output_dir", c.output_dir}};
}

RunConfig parse_config(const json& doc) {
  const json& obj = doc.contains("config") && doc.at("config").is_object() ? doc.at("config") : doc;
  if (!obj.is_object()) throw InvalidArgument("config must be a JSON object");
  reject_unknown(obj,
                 {"experiment", "model", "sizes", "betas", "lambdas", "mu", "alpha", "order", "samples", "seed",
                  "nodes", "instances", "max_dim", "output_dir"},
                 "config");
  if (!obj.contains("experiment") || !obj.at("experiment").is_string()) {
    throw InvalidArgument("config needs an 'experiment' name");
  }
  RunConfig c = default_config(obj.at("experiment").get<std::string>());
  if (obj.contains("model")) c.model = model_from_json(obj.at("model"), c.model);
  read(obj, "sizes", c.sizes);
  read(obj, "betas", c.betas);
  read(obj, "lambdas", c.lambdas);
  read(obj, "mu", c.mu);
  read(obj, "alpha", c.alpha);
  read(obj, "order", c.order);
  read(obj, "samples", c.samples);
  read(obj, "seed", c.seed);
  read(obj, "nodes", c.nodes);
  read(obj, "instances", c.instances);
  read(obj, "max_dim", c.max_dim);
  read(obj, "output_dir", c.output_dir);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

std::size_t integer_power(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    if (out > (std::size_t{1} << 40) / base) return std::size_t{1} << 40;
    out *= base;
  }
  return out;
}

void validate_sizes(const RunConfig& c, bool needs_table) {
  const ModelSpec& m = c.model;
  require(!c.sizes.empty(), "size list is empty");
  for (int n : c.sizes) {
    switch (m.family) {
      case ModelFamily::Rem:
        require(n >= 1 && n <= 14, "REM size must be in 1..14");
        require(n * m.replicas <= (needs_table ? kRemTableBits : kRemMaxBits), "REM configuration space too large");
        break;
      case ModelFamily::Heisenberg: {
        require(n >= 2 && n <= 12 && n % 2 == 0, "Heisenberg chain length must be even and in 2..12");
        const auto d = static_cast<std::size_t>(SpinMagnitude::from_value(m.spin).local_dim());
        require(integer_power(d, n) <= HilbertSpace::kDefaultDimCap, "Heisenberg Hilbert space exceeds the cap");
        break;
      }
      case ModelFamily::Ea: {
        require(n >= 2 && n <= 6, "EA chain length must be in 2..6");
        const auto d = static_cast<std::size_t>(SpinMagnitude::from_value(m.spin).local_dim());
        require(integer_power(d, n * m.replicas) <= HilbertSpace::kDefaultDimCap, "EA Hilbert space exceeds the cap");
        break;
      }
    }
  }
}

}  // namespace

void validate(const RunConfig& c) {
  canonical_experiment_name(c.experiment);
  const ModelSpec& m = c.model;
  require(!c.betas.empty(), "beta list is empty");
  for (double b : c.betas) require(b > 0.0 && std::isfinite(b), "every beta must be positive and finite");
  require(!c.lambdas.empty(), "lambda list is empty");
  for (double l : c.lambdas) require(std::isfinite(l), "every lambda must be finite");
  require(std::isfinite(c.mu), "mu must be finite");
  require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0,1)");
  require(c.output_dir.size() > 0, "output directory is empty");
  SpinMagnitude::from_value(m.spin);

  if (m.family == ModelFamily::Rem) require(m.replicas >= 1 && m.replicas <= 3, "REM replicas must be in 1..3");
  if (m.family == ModelFamily::Ea) {
    require(m.replicas >= 1 && m.replicas <= 2, "EA replicas must be 1 or 2");
    require(!m.base_set.empty() && m.base_set.size() <= 3, "EA base set must hold 1..3 offsets");
  }
  if (m.family == ModelFamily::Heisenberg) require(!m.couplings.empty(), "Heisenberg couplings are empty");

  const std::string& e = c.experiment;
  const bool uses_perturbation = e == "variance-scan" || e == "lemma1" || e == "limit-probe" ||
                                 e == "thermo-identity" || e == "assumptions";
  if (uses_perturbation && m.family != ModelFamily::Heisenberg) {
    require(m.replicas >= 2, "the perturbation needs two replicas");
  }
  if (e == "harris") {
    require(c.instances >= 1, "harris needs at least one instance");
    require(c.max_dim >= 2 && c.max_dim <= 256, "harris max_dim must be in 2..256");
    return;
  }
  validate_sizes(c, e == "thermo-identity");
  if (e == "lemma1") {
    require(c.mu != 0.0, "lemma1 needs mu != 0");
    require(c.order == 1 || c.order == 2, "lemma1 order must be 1 or 2");
    require(c.nodes >= GaussHermiteRule::kMinNodes && c.nodes <= GaussHermiteRule::kMaxNodes,
            "quadrature nodes must be in 8..128");
  }
  if (e == "psi-variance") require(m.family != ModelFamily::Heisenberg, "psi-variance needs REM or EA");
  if (e == "guerra" || e == "dichotomy") {
    require(m.family == ModelFamily::Rem, e + " runs on the REM family");
    require(m.replicas >= 2, e + " needs two replicas");
  }
  const bool quenched = e != "lemma1" && e != "thermo-identity";
  if (quenched && m.disordered()) require(c.samples >= 2, "at least two disorder samples are required");
}

// ---------------------------------------------------------------------------

namespace {

ScanRow trend_row(const std::string& experiment, const std::string& model, int replicas, double beta,
                  double lambda, const std::string& observable, const std::vector<EstimatorResult>& seq,
                  int last_size) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const double se = std::hypot(seq[i].std_error, seq[i + 1].std_error);
    worst = std::max(worst, seq[i + 1].mean - seq[i].mean - kStderrSlack * se);
  }
  ScanRow row;
  row.experiment = experiment;
  row.model = model;
  row.sites = last_size;
  row.replicas = replicas;
  row.beta = beta;
  row.lambda = lambda;
  row.observable = observable;
  row.estimate = EstimatorResult{worst, 0.0, 0.0, seq.size()};
  attach_bound(row, 0.0, 0.0, worst);
  return row;
}

void append(std::vector<ScanRow>& out, const std::vector<ScanRow>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

RunOutcome execute(const RunConfig& c) {
  validate(c);
  RunOutcome outcome;
  std::vector<ScanRow>& rows = outcome.rows;
  const std::string& e = c.experiment;
  const int replicas = c.model.family == ModelFamily::Heisenberg ? 1 : c.model.replicas;

  if (e == "variance-scan") {
    for (double beta : c.betas) {
      for (double lambda : c.lambdas) {
        const auto points = variance_scan(c.model, c.sizes, beta, lambda, c.samples, c.seed, c.mu, c.alpha);
        append(rows, variance_rows(c.model, points, beta, lambda, c.mu, c.alpha));
        if (points.size() >= 2) {
          std::vector<EstimatorResult> seq;
          for (const auto& p : points) seq.push_back(p.total);
          rows.push_back(trend_row(e, c.model.tag(), replicas, beta, lambda, "total_var_trend", seq,
                                   points.back().sites));
        }
      }
    }
  } else if (e == "guerra") {
    for (double beta : c.betas) {
      for (double lambda : c.lambdas) {
        const GuerraReport report = guerra_compare(c.model.replicas, beta, lambda, c.sizes, c.samples, c.seed);
        append(rows, guerra_rows(report));
        if (report.points.size() >= 2) {
          std::vector<EstimatorResult> seq;
          for (const auto& p : report.points) {
            seq.push_back(EstimatorResult{p.gap, p.pressure.variance, p.pressure.std_error, p.pressure.count});
          }
          rows.push_back(trend_row(e, "rem", c.model.replicas, beta, lambda, "gap_trend", seq,
                                   report.points.back().sites));
        }
      }
    }
  } else if (e == "lemma1") {
    for (int n : c.sizes) {
      auto model = std::make_shared<const ModelInstance>(c.model.build(n, c.seed, 0, false));
      for (double beta : c.betas) {
        for (double lambda : c.lambdas) {
          Lemma1Options o;
          o.order = c.order;
          o.mu = c.mu;
          o.alpha = c.alpha;
          o.lambda = lambda;
          o.nodes = c.nodes;
          rows.push_back(lemma1_bound_check(model, beta, o));
        }
      }
    }
  } else if (e == "psi-variance") {
    for (int n : c.sizes) {
      for (double beta : c.betas) {
        for (double lambda : c.lambdas) rows.push_back(psi_variance_check(c.model, n, beta, lambda, c.samples, c.seed));
      }
    }
  } else if (e == "dichotomy") {
    for (double beta : c.betas) append(rows, overlap_dichotomy(c.sizes, beta, c.lambdas, c.samples, c.seed));
  } else if (e == "limit-probe") {
    for (double beta : c.betas) append(rows, limit_order_probe(c.model, c.sizes, c.lambdas, beta, c.samples, c.seed));
  } else if (e == "assumptions") {
    for (double beta : c.betas) {
      for (double lambda : c.lambdas) append(rows, assumption_suite(c.model, c.sizes, beta, lambda, c.samples, c.seed));
    }
  } else if (e == "harris") {
    for (double beta : c.betas) append(rows, harris_sweep(c.instances, c.max_dim, beta, c.seed));
  } else if (e == "thermo-identity") {
    for (int n : c.sizes) {
      auto model = std::make_shared<const ModelInstance>(c.model.build(n, c.seed, 0, true));
      const PerturbedFamily family = assemble(model, PerturbationParams{0.0, 0.0, c.alpha, 0.0});
      for (double beta : c.betas) {
        append(rows, thermo_identity_check(family, beta, c.lambdas));
        for (double lambda : c.lambdas) rows.push_back(derivative_equivalence(family, beta, lambda));
      }
    }
  }

  for (const ScanRow& r : rows) {
    if (r.pass && !*r.pass) outcome.all_pass = false;
  }
  return outcome;
}

// ---------------------------------------------------------------------------

std::string to_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  out << kCsvHeader << '\n';
  for (const ScanRow& r : rows) {
    out << r.experiment << ',' << r.model << ',' << r.sites << ',' << r.replicas << ',' << r.beta << ','
        << r.lambda << ',' << r.mu << ',' << r.alpha << ',' << r.observable << ',' << r.estimate.mean << ','
        << r.estimate.variance << ',' << r.estimate.std_error << ',' << r.estimate.count << ',';
    if (r.bound) out << *r.bound;
    out << ',';
    if (r.ratio) out << *r.ratio;
    out << ',';
    if (r.pass) out << (*r.pass ? "true" : "false");
    out << '\n';
  }
  return out.str();
}

int run(const RunConfig& config, std::ostream& log, bool quiet) {
#ifdef _OPENMP
  if (const char* threads = std::getenv("SPINVAR_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    outcome = execute(config);
  } catch (const InvalidArgument& e) {
    log << "invalid configuration: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const CapacityError& e) {
    log << "invalid configuration: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    log << "numerical failure in experiment '" << config.experiment << "': " << e.what() << '\n';
    return kExitNumericalFailure;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    log << "cannot create output directory " << dir << ": " << ec.message() << '\n';
    return kExitInvalidConfig;
  }
  {
    std::ofstream csv(dir / "results.csv", std::ios::binary);
    csv << to_csv(outcome.rows);
  }
  {
    json manifest{{"config", to_json(config)},
                  {"seed", config.seed},
                  {"tool_version", kToolVersion},
                  {"wall_time_seconds", seconds},
                  {"rows", outcome.rows.size()},
                  {"all_pass", outcome.all_pass}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
  }

  if (!quiet) {
    std::size_t checked = 0;
    std::size_t failed = 0;
    for (const ScanRow& r : outcome.rows) {
      if (!r.pass) continue;
      ++checked;
      if (!*r.pass) {
        ++failed;
        log << "FAIL " << r.observable << " N=" << r.sites << " beta=" << r.beta << " lambda=" << r.lambda
            << " value=" << r.estimate.mean << " bound=" << *r.bound << '\n';
      }
    }
    log << config.experiment << ": " << outcome.rows.size() << " rows, " << checked << " bound checks, " << failed
        << " failed (seed " << config.seed << ", " << std::fixed << std::setprecision(2) << seconds << " s) -> "
        << (dir / "results.csv").string() << '\n';
  }
  return outcome.all_pass ? kExitOk : kExitBoundFailed;
}

}  // namespace spinvar
