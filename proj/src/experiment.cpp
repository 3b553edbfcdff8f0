#include "vasifit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace vasifit {

void McConfig::validate() const {
  params.validate();
  spec.validate();
  if (spec.d != params.d()) {
    throw ConfigError("noise dimension does not match the model");
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (n_steps < 2) throw ConfigError("n_steps must be >= 2");
  if (h <= 0.0) throw ConfigError("h must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (static_cast<double>(n_steps) * h < 2.0 * cfg.t_upper) {
    throw ConfigError("path duration must be at least 2 * t_upper");
  }
  if (r0.size() != 0 && r0.size() != params.d()) {
    throw ConfigError("r0 dimension does not match the model");
  }
}

double quantile_midpoint(std::vector<double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile of empty sample");
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  return 0.5 * (sorted[lo] + sorted[hi]);
}

namespace {

ComponentSummary summarize_component(const std::string& name,
                                     const std::vector<double>& errors) {
  ComponentSummary s;
  s.name = name;
  const auto n = static_cast<double>(errors.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / n;
  double ss = 0.0;
  for (double e : errors) ss += (e - s.mean) * (e - s.mean);
  s.stddev = errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.q01 = quantile_midpoint(errors, 0.01);
  s.q05 = quantile_midpoint(errors, 0.05);
  s.q50 = quantile_midpoint(errors, 0.50);
  s.q95 = quantile_midpoint(errors, 0.95);
  s.q99 = quantile_midpoint(errors, 0.99);

  double lo = quantile_midpoint(errors, 0.005);
  double hi = quantile_midpoint(errors, 0.995);
  if (hi <= lo) hi = lo + 1.0;  // degenerate sample, single bin span
  constexpr int kBins = 40;
  s.histogram.edges.resize(kBins + 1);
  s.histogram.counts.assign(kBins, 0);
  for (int i = 0; i <= kBins; ++i) {
    s.histogram.edges[i] = lo + (hi - lo) * static_cast<double>(i) / kBins;
  }
  for (double e : errors) {
    if (e < lo || e > hi) continue;
    int bin = static_cast<int>((e - lo) / (hi - lo) * kBins);
    bin = std::clamp(bin, 0, kBins - 1);
    ++s.histogram.counts[static_cast<std::size_t>(bin)];
  }
  return s;
}

// Exception type name used for failure accounting.
std::string failure_kind_of(const Error& e) {
  if (dynamic_cast<const FitError*>(&e)) return "care_failure";
  if (dynamic_cast<const NoPdSolutionError*>(&e)) return "care_failure";
  if (dynamic_cast<const SynthesisError*>(&e)) return "synthesis_failure";
  if (dynamic_cast<const SingularityError*>(&e)) return "singular_matrix";
  if (dynamic_cast<const InsufficientDataError*>(&e)) return "short_path";
  if (dynamic_cast<const DomainError*>(&e)) return "degenerate_input";
  return "other";
}

}  // namespace

McReport summarize(std::vector<RepEstimate> estimates,
                   const ModelParams& truth) {
  if (estimates.empty()) {
    throw Error("summarize: empty per-replication table");
  }
  McReport report;
  const int d = truth.d();
  std::vector<std::vector<double>> theta_err(
      static_cast<std::size_t>(d * d));
  std::vector<std::vector<double>> b_err(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> sigma_err(static_cast<std::size_t>(d));
  std::vector<double> frob;

  for (const RepEstimate& rep : estimates) {
    if (!rep.success) {
      ++report.failures;
      ++report.failure_reasons[rep.failure_kind];
      continue;
    }
    ++report.successes;
    const Matrix dtheta = rep.theta_hat - truth.theta;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        theta_err[static_cast<std::size_t>(r * d + c)].push_back(
            dtheta(r, c));
      }
      b_err[static_cast<std::size_t>(r)].push_back(rep.b_hat[r] -
                                                   truth.b[r]);
      sigma_err[static_cast<std::size_t>(r)].push_back(
          rep.sigma_hat(r, r) - truth.sigma(r, r));
    }
    frob.push_back(dtheta.norm());
  }
  report.estimates = std::move(estimates);
  if (report.successes == 0) {
    throw Error("summarize: no successful replication to summarize");
  }
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      report.theta_errors.push_back(summarize_component(
          "theta_" + std::to_string(r + 1) + std::to_string(c + 1),
          theta_err[static_cast<std::size_t>(r * d + c)]));
    }
    report.b_errors.push_back(summarize_component(
        "b_" + std::to_string(r + 1), b_err[static_cast<std::size_t>(r)]));
    report.sigma_errors.push_back(
        summarize_component("sigma_" + std::to_string(r + 1),
                            sigma_err[static_cast<std::size_t>(r)]));
  }
  report.theta_frobenius = summarize_component("theta_frobenius", frob);
  return report;
}

McReport run_mc(const McConfig& mc) {
  mc.validate();
  const Vector r0 = mc.r0.size() > 0 ? mc.r0 : mc.params.b;

  std::vector<RepEstimate> estimates(
      static_cast<std::size_t>(mc.replications));
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int j = next.fetch_add(1);
      if (j >= mc.replications) return;
      RepEstimate rep;
      rep.index = j;
      try {
        const IncrementArray inc =
            sample_increments(mc.spec, mc.n_steps, mc.h, mc.master_seed,
                              static_cast<std::uint64_t>(j));
        const PathGrid path = simulate_path(mc.params, inc, r0);
        const FitResult fitted = fit(path, mc.spec, mc.cfg);
        rep.success = true;
        rep.theta_hat = fitted.theta_hat;
        rep.b_hat = fitted.b_hat;
        rep.sigma_hat = fitted.sigma_hat;
      } catch (const Error& e) {
        rep.success = false;
        rep.failure_kind = failure_kind_of(e);
      }
      estimates[static_cast<std::size_t>(j)] = std::move(rep);
    }
  };

  if (mc.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(mc.workers));
    for (int i = 0; i < mc.workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  bool any_success = false;
  for (const auto& rep : estimates) any_success |= rep.success;
  if (!any_success) {
    std::map<std::string, int> reasons;
    for (const auto& rep : estimates) ++reasons[rep.failure_kind];
    std::string msg = "all replications failed:";
    for (const auto& [kind, count] : reasons) {
      msg += " " + kind + "=" + std::to_string(count);
    }
    throw Error(msg);
  }
  return summarize(std::move(estimates), mc.params);
}

namespace {

nlohmann::json summary_to_json(const ComponentSummary& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  j["quantiles"] = {{"q01", s.q01},
                    {"q05", s.q05},
                    {"q50", s.q50},
                    {"q95", s.q95},
                    {"q99", s.q99}};
  return j;
}

}  // namespace

std::string mc_report_to_json(const McReport& report, const McConfig& mc) {
  nlohmann::json j;
  j["replications"] = mc.replications;
  j["n_steps"] = mc.n_steps;
  j["h"] = mc.h;
  j["master_seed"] = mc.master_seed;
  j["noise_kind"] = to_string(mc.spec.kind);
  if (mc.spec.kind == NoiseKind::fbm) j["hurst"] = mc.spec.hurst;
  j["successes"] = report.successes;
  j["failures"] = report.failures;
  j["failure_reasons"] = report.failure_reasons;
  auto dump = [](const std::vector<ComponentSummary>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : list) arr.push_back(summary_to_json(s));
    return arr;
  };
  j["theta_errors"] = dump(report.theta_errors);
  j["b_errors"] = dump(report.b_errors);
  j["sigma_errors"] = dump(report.sigma_errors);
  j["theta_frobenius"] = summary_to_json(report.theta_frobenius);
  return j.dump(2);
}

void write_mc_estimates_csv(const McReport& report, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open '" + file + "' for writing");
  int d = 0;
  for (const auto& rep : report.estimates) {
    if (rep.success) {
      d = static_cast<int>(rep.b_hat.size());
      break;
    }
  }
  os << "replication,status";
  for (int r = 1; r <= d; ++r) {
    for (int c = 1; c <= d; ++c) os << ",theta" << r << c;
  }
  for (int r = 1; r <= d; ++r) os << ",b" << r;
  for (int r = 1; r <= d; ++r) os << ",sigma" << r;
  os << "\n";
  char buf[40];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << ',' << buf;
  };
  for (const auto& rep : report.estimates) {
    if (!rep.success) {
      os << rep.index << ',' << rep.failure_kind << "\n";
      continue;
    }
    os << rep.index << ",ok";
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) put(rep.theta_hat(r, c));
    }
    for (int r = 0; r < d; ++r) put(rep.b_hat[r]);
    for (int r = 0; r < d; ++r) put(rep.sigma_hat(r, r));
    os << "\n";
  }
}

void write_mc_histograms_csv(const McReport& report, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot open '" + file + "' for writing");
  os << "component,bin_left,bin_right,count\n";
  char buf[40];
  auto row = [&](const ComponentSummary& s) {
    for (std::size_t i = 0; i < s.histogram.counts.size(); ++i) {
      os << s.name;
      std::snprintf(buf, sizeof(buf), "%.17g", s.histogram.edges[i]);
      os << ',' << buf;
      std::snprintf(buf, sizeof(buf), "%.17g", s.histogram.edges[i + 1]);
      os << ',' << buf << ',' << s.histogram.counts[i] << "\n";
    }
  };
  for (const auto& s : report.theta_errors) row(s);
  for (const auto& s : report.b_errors) row(s);
  for (const auto& s : report.sigma_errors) row(s);
  row(report.theta_frobenius);
}

}  // namespace vasifit
