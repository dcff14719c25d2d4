#include "wspin/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "wspin/greens_kernels.hpp"
#include "wspin/identity_engine.hpp"
#include "wspin/radial_geometry.hpp"
#include "wspin/spectral_radial.hpp"
#include "wspin/witten_model.hpp"

namespace wspin {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

fs::path out_file(const RunConfig& c, const RunOptions& o, const std::string& name) {
  return o.out / (c.output_prefix + name);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ModelManifold build_model(const RunConfig& c, double rho, double cap_level,
                          const std::string& label) {
  InteriorSpec in = c.interior;
  if (in.kind == InteriorSpec::Kind::Capped) in.cap_radius = cap_level * rho;
  return build_model_manifold(c.n, rho, in, label);
}

QuadTolerances quad_tol(const RunConfig& c) {
  return {c.tol.quadrature_rel, c.tol.identity_rel};
}

SpectrumOptions spec_opt(const RunConfig& c) {
  SpectrumOptions o;
  o.accuracy = c.tol.spectrum_accuracy;
  return o;
}

json provenance(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"config", c.to_json()}, {"seed", c.seed}};
}

// Runs jobs[i] on up to `limit` threads; results keep their index order.
template <class T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& jobs, int limit) {
  std::vector<T> out(jobs.size());
  std::vector<std::exception_ptr> errs(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        out[i] = jobs[i]();
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  int threads = std::max(1, std::min<int>(limit, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

int cmd_compactify(const RunConfig& c, const RunOptions& o, std::ostream& log) {
  ModelManifold m = build_model(c, c.rho, 1.0, c.label);
  Compactification comp = build_compactification(m, c.C_n, c.mollifier_width);
  json j = provenance(c, "compactify");
  j["model"] = {{"n", m.n}, {"rho", m.rho}, {"interior", m.interior.to_json()}, {"W", m.W.to_json()}};
  j["compactification"] = comp.to_json();
  std::ostringstream csv;
  csv << "r,scalar_curvature\n";
  for (auto& [r, s] : curvature_grid(m, comp)) csv << num(r) << ',' << num(s) << '\n';
  write_atomic(out_file(c, o, "compactification.json"), dump(j));
  write_atomic(out_file(c, o, "curvature.csv"), csv.str());
  log << "compactify " << c.label << ": sigma " << comp.sigma << ", R " << comp.R
      << ", min curvature " << comp.min_curvature << "\n";
  return kExitOk;
}

int cmd_greens_check(const RunConfig& c, const RunOptions& o, std::ostream& log) {
  ModelManifold m = build_model(c, c.rho, 1.0, c.label);
  Compactification comp = build_compactification(m, c.C_n, c.mollifier_width);
  CliffordRep rep = build_clifford_rep(c.n);
  KernelClosedForms k = counter_terms(rep, comp.sigma, comp.R);
  const double Rp = k.R_prime;
  bool ok = true;

  std::vector<std::function<json()>> jobs;
  for (std::size_t i = 0; i < c.greens_points.size(); ++i) {
    double frac = c.greens_points[i];
    jobs.push_back([&, frac, i]() -> json {
      Vec y = Vec::Zero(c.n);
      y[0] = frac * Rp;
      double closed = k.g_delta(frac * Rp);
      json row{{"r_prime", frac * Rp}, {"closed_form", closed}};
      auto attempt = [&](OracleMethod method, double tol, const char* name) {
        OracleOptions oo{method, c.mc_samples, c.seed + i, tol};
        json r;
        try {
          OracleResult q = brute_force_g_delta(rep, comp.sigma, comp.R, y, oo);
          double rel = std::abs(q.scalar - closed) / std::abs(closed);
          r = {{"value", q.scalar}, {"error_estimate", q.scalar_error}, {"rel_diff", rel},
               {"bivector_norm", q.bivector_norm}, {"tolerance", tol}, {"pass", rel <= tol}};
        } catch (const ToleranceError& e) {
          r = {{"error", e.what()}, {"achieved", e.achieved()}, {"tolerance", tol}, {"pass", false}};
        }
        row[name] = r;
      };
      attempt(OracleMethod::AxisymmetricProduct, c.tol.oracle_axisym, "axisymmetric");
      attempt(OracleMethod::MonteCarlo, c.tol.oracle_mc, "monte_carlo");
      return row;
    });
  }
  std::vector<json> rows = run_parallel(jobs, o.jobs);

  std::ostringstream csv;
  csv << "r_prime,closed_form,axisym,axisym_rel,mc,mc_err,mc_rel,pass\n";
  json table = json::array();
  for (auto& r : rows) {
    bool pass = r["axisymmetric"]["pass"].get<bool>() && r["monte_carlo"]["pass"].get<bool>();
    ok = ok && pass;
    auto val = [](const json& x, const char* key) {
      return x.contains(key) ? num(x[key].get<double>()) : std::string("nan");
    };
    csv << num(r["r_prime"]) << ',' << num(r["closed_form"]) << ','
        << val(r["axisymmetric"], "value") << ',' << val(r["axisymmetric"], "rel_diff") << ','
        << val(r["monte_carlo"], "value") << ',' << val(r["monte_carlo"], "error_estimate") << ','
        << val(r["monte_carlo"], "rel_diff") << ',' << (pass ? 1 : 0) << '\n';
    table.push_back(r);
  }

  // Closed-form kernel product trace against the direct matrix product.
  json prod = json::array();
  double worst = 0.0;
  for (int i = 1; i <= 50; ++i) {
    double rp = Rp * std::pow(10.0, -2.0 + 3.0 * i / 50.0);
    Vec x = Vec::Zero(c.n);
    x[c.n - 1] = rp;
    double direct = trace(south_kernel_product(rep, comp.sigma, x)).real();
    double closed = k.s_product_trace(rp);
    double rel = std::abs(direct - closed) / std::abs(closed);
    worst = std::max(worst, rel);
    prod.push_back({{"r_prime", rp}, {"closed_form", closed}, {"direct", direct}, {"rel_diff", rel}});
  }
  bool prod_ok = worst <= c.tol.kernel_product;
  ok = ok && prod_ok;

  json j = provenance(c, "greens-check");
  j["sigma"] = comp.sigma;
  j["R"] = comp.R;
  j["R_prime"] = Rp;
  j["g_delta"] = table;
  j["s_product_trace"] = {{"points", prod}, {"max_rel_diff", worst},
                          {"tolerance", c.tol.kernel_product}, {"pass", prod_ok}};
  j["h_delta_at_pole"] = {{"value", rep.N * k.h_delta_at_pole()}};
  j["passed"] = ok;
  write_atomic(out_file(c, o, "greens_check.json"), dump(j));
  write_atomic(out_file(c, o, "greens_check.csv"), csv.str());
  log << "greens-check " << c.label << ": " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kExitOk : kExitVerification;
}

struct ModelRun {
  IdentityReport report;
  SpectrumResult spectrum;
  BoundRatios bounds;
  double scale = 1.0;
  double cap_level = 1.0;
};

ModelRun run_model(const RunConfig& c, double rho, double cap_level, double scale,
                   const std::string& label) {
  ModelManifold m = build_model(c, rho, cap_level, label);
  CompactifiedModel cm = make_compactified_model(m, c.C_n, c.mollifier_width);
  if (scale != 1.0) cm = cm.rescaled(scale);
  WittenFamily fam = make_witten_family(m);
  ModelRun r;
  r.scale = scale;
  r.cap_level = cap_level;
  r.report = verify_identity(cm, fam, quad_tol(c), c.seed);
  r.spectrum = radial_dirac_spectrum(cm, c.mesh, c.k_max, spec_opt(c));
  r.bounds = bound_report(cm, r.report, r.spectrum.inf_spec_sq);
  return r;
}

json bounds_json(const BoundRatios& b) {
  return {{"ratio1", b.ratio1}, {"ratio2", b.ratio2}, {"inf_spec_sq", b.inf_spec_sq}};
}

int cmd_verify_identity(const RunConfig& c, const RunOptions& o, std::ostream& log) {
  ModelRun r = run_model(c, c.rho, 1.0, 1.0, c.label);
  bool ok = r.report.passed;
  json waves;
  if (!c.modes.empty()) {
    // Partial-wave families enter through the angular identity on the end.
    ModelManifold m = build_model(c, c.rho, 1.0, c.label);
    WittenFamily fam = make_witten_family(m, c.modes);
    json pts = json::array();
    double worst = 0.0;
    for (double f : {1.25, 1.5, 2.0, 4.0, 10.0}) {
      PartialWaveResult pw = partial_wave_check(fam, f * c.rho);
      double scale = std::max({1.0, std::abs(pw.pi_minus_weight), std::abs(pw.deviation)});
      double rel = pw.difference() / scale;
      worst = std::max(worst, rel);
      pts.push_back({{"r", f * c.rho}, {"pi_minus_weight", pw.pi_minus_weight},
                     {"deviation", pw.deviation}, {"difference", rel}});
    }
    bool pw_ok = worst <= c.tol.partial_wave;
    ok = ok && pw_ok;
    waves = {{"points", pts}, {"max_difference", worst}, {"tolerance", c.tol.partial_wave},
             {"pass", pw_ok}};
  }
  json j = r.report.to_json();
  j["bounds"] = bounds_json(r.bounds);
  j["spectrum"] = r.spectrum.to_json();
  if (!waves.is_null()) j["partial_waves"] = waves;
  j["config"] = c.to_json();
  write_atomic(out_file(c, o, "report.json"), dump(j));
  write_atomic(out_file(c, o, "report.csv"),
               csv_header() + "\n" + csv_row(r.report, r.bounds) + "\n");
  log << "verify-identity " << c.label << ": residual_rel " << r.report.residual_rel << " ("
      << (ok ? "pass" : "FAIL") << ")\n";
  return ok ? kExitOk : kExitVerification;
}

int cmd_spectrum(const RunConfig& c, const RunOptions& o, std::ostream& log) {
  ModelManifold m = build_model(c, c.rho, 1.0, c.label);
  CompactifiedModel cm = make_compactified_model(m, c.C_n, c.mollifier_width);
  SpectrumResult s = radial_dirac_spectrum(cm, c.mesh, c.k_max, spec_opt(c));
  double bound = rayleigh_upper_bound(cm);
  HNormProfile h = h_norm_profile(cm.comp, 2);
  bool ok = bound >= s.inf_spec_sq + 1e-8;
  json j = provenance(c, "spectrum");
  j["spectrum"] = s.to_json();
  j["spectrum"]["accuracy_tolerance"] = c.tol.spectrum_accuracy;
  j["rayleigh_upper_bound"] = {{"value", bound}, {"trial_support", 0.9 * cm.comp.delta},
                               {"quadrature_rel", 1e-12}};
  j["h_norm_profile"] = h.to_json();
  j["passed"] = ok;
  write_atomic(out_file(c, o, "spectrum.json"), dump(j));
  log << "spectrum " << c.label << ": inf_spec_sq " << s.inf_spec_sq << ", rayleigh " << bound
      << "\n";
  return ok ? kExitOk : kExitVerification;
}

std::string tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int cmd_sweep(const RunConfig& c, const RunOptions& o, std::ostream& log) {
  struct Item {
    double rho, cap, scale;
    std::string label;
  };
  std::vector<Item> items;
  for (double rho : c.rho_values)
    for (double cap : c.cap_levels)
      for (double s : c.scales)
        items.push_back({rho, cap, s,
                         c.label + "_rho" + tag(rho) + "_cap" + tag(cap) + "_s" + tag(s)});
  std::vector<std::function<ModelRun()>> jobs;
  for (auto& it : items)
    jobs.push_back([&c, it] { return run_model(c, it.rho, it.cap, it.scale, it.label); });
  std::vector<ModelRun> runs = run_parallel(jobs, o.jobs);

  bool ok = true;
  std::ostringstream csv;
  csv << csv_header() << ",scale,cap_level\n";
  double r1min = INFINITY, r1max = -INFINITY, r2min = INFINITY, r2max = -INFINITY;
  double drift = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ModelRun& r = runs[i];
    ok = ok && r.report.passed;
    csv << csv_row(r.report, r.bounds) << ',' << num(r.scale) << ',' << num(r.cap_level) << '\n';
    json j = r.report.to_json();
    j["bounds"] = bounds_json(r.bounds);
    j["spectrum"] = r.spectrum.to_json();
    j["scale"] = r.scale;
    j["cap_level"] = r.cap_level;
    write_atomic(out_file(c, o, "sweep/" + items[i].label + ".json"), dump(j));
    if (r.scale == c.scales.front()) {
      r1min = std::min(r1min, r.bounds.ratio1);
      r1max = std::max(r1max, r.bounds.ratio1);
      r2min = std::min(r2min, r.bounds.ratio2);
      r2max = std::max(r2max, r.bounds.ratio2);
    }
    // ratio2 drift against the same model at the first scale.
    std::size_t base = i - (i % c.scales.size());
    double ref = runs[base].bounds.ratio2;
    drift = std::max(drift, std::abs(r.bounds.ratio2 - ref) / std::abs(ref));
  }
  auto spread_ok = [&](double lo, double hi) {
    return std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi / lo <= c.tol.ratio_spread;
  };
  bool b1 = spread_ok(r1min, r1max), b2 = spread_ok(r2min, r2max);
  bool d_ok = drift <= c.tol.scaling_drift;
  ok = ok && b1 && b2 && d_ok;
  json summary = provenance(c, "sweep");
  summary["models"] = runs.size();
  summary["ratio1"] = {{"min", r1min}, {"max", r1max}, {"spread_tolerance", c.tol.ratio_spread},
                       {"pass", b1}};
  summary["ratio2"] = {{"min", r2min}, {"max", r2max}, {"spread_tolerance", c.tol.ratio_spread},
                       {"pass", b2}};
  summary["ratio2_scaling_drift"] = {{"value", drift}, {"tolerance", c.tol.scaling_drift},
                                     {"pass", d_ok}};
  summary["passed"] = ok;
  write_atomic(out_file(c, o, "sweep.csv"), csv.str());
  write_atomic(out_file(c, o, "sweep.json"), dump(summary));
  log << "sweep " << c.label << ": " << runs.size() << " models, ratio1 spread "
      << r1max / r1min << ", ratio2 spread " << r2max / r2min << " (" << (ok ? "pass" : "FAIL")
      << ")\n";
  return ok ? kExitOk : kExitVerification;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const RunOptions& opt,
                std::ostream& log) {
  if (command == "compactify") return cmd_compactify(config, opt, log);
  if (command == "greens-check") return cmd_greens_check(config, opt, log);
  if (command == "verify-identity") return cmd_verify_identity(config, opt, log);
  if (command == "spectrum") return cmd_spectrum(config, opt, log);
  if (command == "sweep") return cmd_sweep(config, opt, log);
  throw ConfigError("unknown command '" + command + "'");
}

int run(const std::string& command, const RunOptions& opt, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opt.config.string());
    for (const auto& kv : opt.tol_overrides) apply_tolerance_override(cfg, kv);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.jobs < 1) throw ConfigError("--jobs must be at least 1");
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    return run_command(command, cfg, opt, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidInteriorError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const GluingError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InfeasibleCompactificationError& e) {
    log << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    log << "verification failure: " << e.what() << "\n";
    return kExitVerification;
  }
}

}  // namespace wspin
