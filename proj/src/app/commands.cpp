#include "sqzcam/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "sqzcam/errors.hpp"
#include "sqzcam/fock_oracle.hpp"
#include "sqzcam/frame_io.hpp"

namespace sqzcam::app {

using nlohmann::json;

namespace {

bool is_squeezed_phase(double phi) { return std::abs(std::cos(2.0 * phi) - 1.0) < 1e-12; }
bool is_anti_squeezed_phase(double phi) { return std::abs(std::cos(2.0 * phi) + 1.0) < 1e-12; }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.precision(17);
  return os;
}

json config_json(const RunConfig& cfg) {
  json j = json::object();
  std::istringstream is(cfg.to_text());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

void write_json(const std::filesystem::path& path, json body, const RunConfig& cfg) {
  body["config"] = config_json(cfg);
  auto os = open_out(path);
  os << body.dump(2) << '\n';
  if (!os) throw IoError("write failed for " + path.string());
}

// CSV artifacts carry the resolved config as leading '#' lines.
void write_config_header(std::ostream& os, const RunConfig& cfg) {
  std::istringstream is(cfg.to_text());
  std::string line;
  while (std::getline(is, line)) os << "# " << line << '\n';
}

void archive_config(const RunConfig& cfg, const std::string& command) {
  auto os = open_out(cfg.out_dir / (command + "_config.txt"));
  os << cfg.to_text();
}

json fit_json(const QFit& f) {
  return {{"q", f.q},
          {"q_se", f.q_se},
          {"mode", f.mode == FitMode::kConstrained ? "constrained" : "free_quadratic"},
          {"residual_norm", f.residual_norm},
          {"intercept", f.intercept},
          {"linear", f.linear}};
}

json branch_json(const BranchEstimate& b) {
  const BatchAnalysis& a = b.analysis;
  json j{{"source", b.source.string()},
         {"n_alpha", b.params.n_alpha},
         {"n_s", b.params.n_s},
         {"phi1", b.params.phi1},
         {"n_frames", a.curve.n_frames},
         {"mean_total", a.mean_total},
         {"mean_total_se", a.mean_total_se},
         {"q", a.fit.q()},
         {"q_se", a.reported_fit().q_se},
         {"q_se_residual", a.fit.q_se()},
         {"jackknife_blocks", a.jackknife_blocks},
         {"constrained_fit", fit_json(a.fit.constrained)}};
  if (a.fit.free_quadratic) j["free_quadratic_fit"] = fit_json(*a.fit.free_quadratic);
  if (a.mean_total > 0.0) j["q_theory"] = q_coefficient(b.params);
  return j;
}

std::string branch_label(double phi) {
  if (is_squeezed_phase(phi)) return "squeezed";
  if (is_anti_squeezed_phase(phi)) return "anti_squeezed";
  std::ostringstream os;
  os << "phi_" << std::setprecision(6) << phi;
  return os.str();
}

void write_curve_csv(const std::filesystem::path& path, const IntegrationCurve& c, const RunConfig& cfg) {
  auto os = open_out(path);
  write_config_header(os, cfg);
  os << "k,eta,mean,variance\n";
  for (const auto& p : c.points) os << p.k << ',' << p.eta << ',' << p.mean << ',' << p.variance << '\n';
}

}  // namespace

// analytic ------------------------------------------------------------------

AnalyticReport cmd_analytic(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const StateParams sq = cfg.state(kSqueezedPhase);
  const StateParams as = cfg.state(kAntiSqueezedPhase);

  AnalyticReport r;
  r.mean = mean_total(sq);
  r.shot_noise = shot_noise_limit(sq);
  r.homodyne_var_ns = homodyne_sensitivity(cfg.n_s);
  auto fill = [&](const StateParams& p, BranchAnalytics& b) {
    b.phi1 = p.phi1;
    b.variance = variance_total(p);
    b.q = q_coefficient(p);
    if (p.n_s > 0.0) {
      try {
        b.sensitivity = sensitivity_report(p, 1.0);
      } catch (const DegenerateDerivativeError&) {
      }
    }
  };
  fill(sq, r.squeezed);
  fill(as, r.anti_squeezed);

  ensure_dir(cfg.out_dir);
  archive_config(cfg, "analytic");
  write_json(cfg.out_dir / "analytic.json", to_json(r), cfg);

  log << std::setprecision(6) << "mean photons        " << r.mean << '\n'
      << "shot-noise limit    " << r.shot_noise << '\n'
      << "variance (phi=0)    " << r.squeezed.variance << '\n'
      << "variance (phi=pi/2) " << r.anti_squeezed.variance << '\n'
      << std::setprecision(5) << "q_s                 " << r.squeezed.q << '\n'
      << "q_as                " << r.anti_squeezed.q << '\n'
      << "homodyne Var(n_s)   " << r.homodyne_var_ns << '\n';
  if (r.squeezed.sensitivity) {
    log << "camera Var(n_s)     " << r.squeezed.sensitivity->camera_var_ns << " / "
        << (r.anti_squeezed.sensitivity ? r.anti_squeezed.sensitivity->camera_var_ns : NAN)
        << "  (squeezed / anti-squeezed)\n";
  }
  return r;
}

// simulate ------------------------------------------------------------------

std::uint32_t branch_stream(std::size_t branch_index) { return static_cast<std::uint32_t>(branch_index); }

std::string branch_file_name(double phi1) {
  std::ostringstream os;
  os << "frames_phi" << std::setprecision(8) << phi1 * 180.0 / std::numbers::pi << ".sqzf";
  return os.str();
}

std::vector<SimulatedFile> cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const SensorGeometry geom = cfg.geometry();
  ensure_dir(cfg.out_dir);
  archive_config(cfg, "simulate");
  if (cfg.frames < 2) {
    log << "warning: " << cfg.frames << " frame(s) per batch; the estimate command needs at least 2\n";
  }

  std::vector<SimulatedFile> out;
  for (std::size_t i = 0; i < cfg.phases.size(); ++i) {
    const double phi = cfg.phases[i];
    SimulationOptions opts;
    opts.threads = cfg.threads;
    const FrameBatch b = simulate_batch(cfg.state(phi), geom, cfg.frames, cfg.seed, branch_stream(i), opts);
    SimulatedFile f;
    f.path = cfg.out_dir / branch_file_name(phi);
    f.phi1 = phi;
    write_batch(b, f.path);
    f.checksum = batch_checksum(b);
    if (cfg.export_csv) {
      auto path = f.path;
      path.replace_extension(".csv");
      auto os = open_out(path);
      write_batch_csv(b, os);
    }
    log << "wrote " << f.path.string() << "  phi1=" << phi << "  seed=" << cfg.seed
        << "  stream=" << branch_stream(i) << "  checksum=" << std::hex << std::setw(16)
        << std::setfill('0') << f.checksum << std::dec << std::setfill(' ') << '\n';
    out.push_back(f);
  }
  return out;
}

// estimate ------------------------------------------------------------------

EstimateReport cmd_estimate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.inputs.empty()) throw ConfigError("estimate needs at least one frame file");

  std::vector<BranchEstimate> branches;
  std::vector<SensorGeometry> geometries;
  for (const auto& path : cfg.inputs) {
    const FrameBatch b = read_batch(path);
    if (!branches.empty()) {
      const StateParams& ref = branches.front().params;
      if (b.params().n_alpha != ref.n_alpha || b.params().n_s != ref.n_s) {
        throw ConfigError("config mismatch: " + path.string() + " was generated with different state parameters than " +
                          branches.front().source.string());
      }
      if (!(b.geometry() == geometries.front())) {
        throw ConfigError("config mismatch: " + path.string() + " uses a different sensor geometry than " +
                          branches.front().source.string());
      }
    }
    geometries.push_back(b.geometry());
    const bool expected = std::any_of(cfg.phases.begin(), cfg.phases.end(),
                                      [&](double phi) { return std::cos(2.0 * (phi - b.params().phi1)) > 1.0 - 1e-12; });
    if (!expected) {
      std::ostringstream os;
      os << "config mismatch: " << path.string() << " has phi1=" << b.params().phi1
         << ", which is not among the configured phases (--phi)";
      throw ConfigError(os.str());
    }
    for (const auto& other : branches) {
      if (std::cos(2.0 * (other.params.phi1 - b.params().phi1)) > 1.0 - 1e-12) {
        throw ConfigError("config mismatch: " + path.string() + " and " + other.source.string() +
                          " belong to the same phase branch");
      }
    }
    BranchEstimate e;
    e.source = path;
    e.params = b.params();
    e.analysis = analyse_batch(b, {}, cfg.jackknife_blocks, cfg.threads);
    branches.push_back(std::move(e));
  }

  EstimateReport r;
  for (auto& b : branches) {
    if (is_squeezed_phase(b.params.phi1)) {
      r.squeezed = std::move(b);
    } else if (is_anti_squeezed_phase(b.params.phi1)) {
      r.anti_squeezed = std::move(b);
    } else {
      r.other.push_back(std::move(b));
    }
  }

  if (r.squeezed && r.anti_squeezed) {
    const BatchAnalysis& s = r.squeezed->analysis;
    const BatchAnalysis& a = r.anti_squeezed->analysis;
    r.n_total = 0.5 * (s.mean_total + a.mean_total);
    const double n_total_se = 0.5 * std::hypot(s.mean_total_se, a.mean_total_se);
    r.estimate = estimate_squeezing(s.reported_fit(), a.reported_fit(), r.n_total, n_total_se);
  }

  ensure_dir(cfg.out_dir);
  archive_config(cfg, "estimate");
  auto emit_curve = [&](const BranchEstimate& b) {
    write_curve_csv(cfg.out_dir / ("curve_" + branch_label(b.params.phi1) + ".csv"), b.analysis.curve, cfg);
    log << branch_label(b.params.phi1) << ": q = " << std::setprecision(6) << b.analysis.fit.q() << " +- "
        << std::setprecision(2) << b.analysis.reported_fit().q_se << "  (theory " << std::setprecision(6)
        << q_coefficient(b.params) << ")\n";
  };
  if (r.squeezed) emit_curve(*r.squeezed);
  if (r.anti_squeezed) emit_curve(*r.anti_squeezed);
  for (const auto& b : r.other) emit_curve(b);
  if (r.estimate) {
    log << std::setprecision(6) << "n_s     = " << r.estimate->n_s_hat << " +- " << r.estimate->n_s_se << '\n'
        << "n_alpha = " << r.estimate->n_alpha_hat << " +- " << r.estimate->n_alpha_se << '\n';
    if (!r.estimate->physical) log << "warning: recovered n_s is outside [0, n_total]\n";
  } else {
    log << "squeezing estimate needs batches at both phi1 = 0 and phi1 = pi/2\n";
  }
  write_json(cfg.out_dir / "estimate.json", to_json(r), cfg);
  return r;
}

// sweep ---------------------------------------------------------------------

SweepReport cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::vector<double> phases(cfg.sweep_points);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    phases[i] = cfg.sweep_max * static_cast<double>(i) / static_cast<double>(phases.size() - 1);
  }
  const StateParams p = cfg.state(0.0);
  SweepReport r;
  for (const SweepPoint& s : phase_sweep(p, phases)) {
    r.rows.push_back({s.phi1, s.variance, s.shot_noise, s.variance < s.shot_noise});
  }

  const double root = shot_noise_crossing_phase(p);
  if (root >= 0.0) {
    r.crossing_phase = root;
    auto excess = [&](double phi) {
      const StateParams at = p.with_phase(phi);
      return variance_total(at) - shot_noise_limit(at);
    };
    // bracket from the sampled curve, then bisect
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      double lo = r.rows[i - 1].phi1, hi = r.rows[i].phi1;
      if (lo >= std::numbers::pi / 2) break;
      hi = std::min(hi, std::numbers::pi / 2);
      double flo = excess(lo), fhi = excess(hi);
      if (flo == 0.0) {
        r.crossing_phase_bisection = lo;
        break;
      }
      if ((flo < 0.0) != (fhi < 0.0)) {
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = excess(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        r.crossing_phase_bisection = 0.5 * (lo + hi);
        break;
      }
    }
  }

  ensure_dir(cfg.out_dir);
  archive_config(cfg, "sweep");
  auto os = open_out(cfg.out_dir / "sweep.csv");
  write_config_header(os, cfg);
  os << "phi1,variance,snl,below_snl\n";
  for (const auto& row : r.rows) {
    os << row.phi1 << ',' << row.variance << ',' << row.shot_noise << ',' << (row.below_shot_noise ? 1 : 0) << '\n';
  }
  const auto below = std::count_if(r.rows.begin(), r.rows.end(), [](const SweepRow& x) { return x.below_shot_noise; });
  log << "wrote " << (cfg.out_dir / "sweep.csv").string() << " (" << r.rows.size() << " phases, " << below
      << " below shot noise)\n";
  if (r.crossing_phase) log << "shot-noise crossing at phi1 = " << std::setprecision(10) << *r.crossing_phase << '\n';
  return r;
}

// precision -----------------------------------------------------------------

PrecisionReport cmd_precision(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const SensorGeometry geom = cfg.geometry();
  PrecisionOptions opts;
  opts.groups = cfg.groups;
  opts.threads = cfg.threads;

  PrecisionReport r;
  opts.stream_base = 1u << 16;
  r.squeezed = precision_study(cfg.state(kSqueezedPhase), geom, cfg.frames_per_run, cfg.run_counts, cfg.seed, opts);
  opts.stream_base = 2u << 16;
  r.anti_squeezed =
      precision_study(cfg.state(kAntiSqueezedPhase), geom, cfg.frames_per_run, cfg.run_counts, cfg.seed, opts);
  r.sd_ratio = precision_sd_ratio(r.anti_squeezed, r.squeezed);
  r.photon_sd_ratio = r.anti_squeezed.photon_sd / r.squeezed.photon_sd;

  ensure_dir(cfg.out_dir);
  archive_config(cfg, "precision");
  auto os = open_out(cfg.out_dir / "precision.csv");
  write_config_header(os, cfg);
  os << "branch,runs,groups,sd_q,mean_q\n";
  auto rows = [&](const char* name, const PrecisionStudy& s) {
    for (const auto& row : s.rows) {
      os << name << ',' << row.runs << ',' << row.groups << ',' << row.sd_q << ',' << row.mean_q << '\n';
    }
  };
  rows("squeezed", r.squeezed);
  rows("anti_squeezed", r.anti_squeezed);
  write_json(cfg.out_dir / "precision.json", to_json(r), cfg);

  auto slope_text = [](const PrecisionStudy& s) {
    if (!s.slope) return std::string("undefined");
    std::ostringstream o;
    o << std::setprecision(3) << *s.slope;
    return o.str();
  };
  log << "slope squeezed      " << slope_text(r.squeezed) << '\n'
      << "slope anti-squeezed " << slope_text(r.anti_squeezed) << '\n'
      << std::setprecision(3) << "sd(q) ratio anti/squeezed " << r.sd_ratio << '\n'
      << "photon SD ratio anti/squeezed " << r.photon_sd_ratio << '\n';
  return r;
}

// oracle-check --------------------------------------------------------------

bool OracleReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

std::vector<MixGap> beam_splitter_gaps(double pump_photons, double r, const std::vector<double>& thetas) {
  const std::complex<double> alpha(std::sqrt(pump_photons), 0.0);
  const int max_total = mix_cutoff_for(alpha, r, 1e-10);
  std::vector<MixGap> out;
  for (double theta : thetas) {
    const FockMoments exact = moments(exact_mix_and_trace(alpha, r, theta, max_total, 1e-10));
    const FockMoments approx = moments(dsv_distribution_auto(alpha * std::sin(theta), r, 0.0));
    out.push_back({theta, exact.mean - approx.mean, exact.variance - approx.variance});
  }
  return out;
}

OracleReport cmd_oracle_check(const RunConfig& cfg, std::ostream& log) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  const double n_alphas[] = {0.5, 2.0, 4.0, 10.0};
  const double n_ss[] = {0.25, 1.0, 2.0};
  const double phis[] = {0.0, std::numbers::pi / 4, std::numbers::pi / 2};
  const double etas[] = {0.1, 0.25, 0.5, 0.9, 1.0};

  auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };

  OracleCheck moments_check{"dsv moments vs closed form", 0.0, cfg.tolerance, false};
  OracleCheck loss_check{"loss channel vs pixel moments", 0.0, cfg.tolerance, false};
  OracleCheck compose_check{"loss composition", 0.0, 1e-12, false};
  for (double na : n_alphas) {
    for (double ns : n_ss) {
      for (double phi : phis) {
        const StateParams p{na, ns, phi};
        const FockDistribution d = dsv_distribution_auto(std::sqrt(na), p.squeeze_r(), phi, 1e-14);
        const FockMoments m = moments(d);
        moments_check.worst = std::max({moments_check.worst, rel(m.mean, mean_total(p)),
                                        rel(m.variance, variance_total(p))});
        for (double eta : etas) {
          const FockMoments ml = moments(apply_loss(d, eta));
          loss_check.worst = std::max({loss_check.worst, rel(ml.mean, pixel_mean(p, eta)),
                                       rel(ml.variance, pixel_variance(p, eta))});
        }
        if (phi == 0.0) {
          const FockDistribution two = apply_loss(apply_loss(d, 0.7), 0.4);
          const FockDistribution one = apply_loss(d, 0.7 * 0.4);
          for (int n = 0; n <= d.cutoff(); ++n) {
            compose_check.worst = std::max(compose_check.worst, std::abs(two.prob(n) - one.prob(n)));
          }
        }
      }
    }
  }
  for (OracleCheck* c : {&moments_check, &loss_check, &compose_check}) c->passed = c->worst <= c->tolerance;

  OracleReport r;
  r.checks = {moments_check, loss_check, compose_check};

  const auto gaps = beam_splitter_gaps(100.0, std::asinh(1.0), {0.2, 0.1, 0.05});
  OracleCheck theta_check{"beam-splitter gap ratio (theta halved) vs 4", 0.0, 0.2, false};
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double ratio = gaps[i - 1].mean_gap / gaps[i].mean_gap;
    r.theta_gap_ratios.push_back(ratio);
    theta_check.worst = std::max(theta_check.worst, std::abs(ratio - 4.0) / 4.0);
  }
  theta_check.passed = theta_check.worst <= theta_check.tolerance;
  r.checks.push_back(theta_check);

  ensure_dir(cfg.out_dir);
  archive_config(cfg, "oracle_check");
  write_json(cfg.out_dir / "oracle_check.json", to_json(r), cfg);
  for (const auto& c : r.checks) {
    log << (c.passed ? "PASS " : "FAIL ") << c.name << ": worst " << std::setprecision(3) << c.worst
        << " (tolerance " << c.tolerance << ")\n";
  }
  return r;
}

// json ----------------------------------------------------------------------

nlohmann::json to_json(const AnalyticReport& r) {
  auto branch = [](const BranchAnalytics& b) {
    json j{{"phi1", b.phi1}, {"variance", b.variance}, {"q", b.q}};
    if (b.sensitivity) {
      j["camera_var_ns"] = b.sensitivity->camera_var_ns;
      j["sensitivity_ratio"] = b.sensitivity->ratio;
    }
    return j;
  };
  return {{"mean", r.mean},
          {"shot_noise_limit", r.shot_noise},
          {"homodyne_var_ns", r.homodyne_var_ns},
          {"squeezed", branch(r.squeezed)},
          {"anti_squeezed", branch(r.anti_squeezed)}};
}

nlohmann::json to_json(const EstimateReport& r) {
  json j = json::object();
  if (r.squeezed) j["squeezed"] = branch_json(*r.squeezed);
  if (r.anti_squeezed) j["anti_squeezed"] = branch_json(*r.anti_squeezed);
  if (!r.other.empty()) {
    j["other"] = json::array();
    for (const auto& b : r.other) j["other"].push_back(branch_json(b));
  }
  if (r.estimate) {
    j["n_total"] = r.n_total;
    j["estimate"] = {{"n_s", r.estimate->n_s_hat},
                     {"n_s_se", r.estimate->n_s_se},
                     {"n_alpha", r.estimate->n_alpha_hat},
                     {"n_alpha_se", r.estimate->n_alpha_se},
                     {"consistency_residual", r.estimate->consistency_residual},
                     {"physical", r.estimate->physical}};
  }
  return j;
}

nlohmann::json to_json(const PrecisionReport& r) {
  auto study = [](const PrecisionStudy& s) {
    json rows = json::array();
    for (const auto& row : s.rows) {
      rows.push_back({{"runs", row.runs}, {"groups", row.groups}, {"sd_q", row.sd_q}, {"mean_q", row.mean_q}});
    }
    return json{{"rows", rows},
                {"slope", s.slope ? json(*s.slope) : json(nullptr)},
                {"frames_per_run", s.frames_per_run},
                {"pool_runs", s.pool_runs},
                {"photon_sd", s.photon_sd}};
  };
  return {{"squeezed", study(r.squeezed)},
          {"anti_squeezed", study(r.anti_squeezed)},
          {"sd_ratio", r.sd_ratio},
          {"photon_sd_ratio", r.photon_sd_ratio}};
}

nlohmann::json to_json(const OracleReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"worst", c.worst}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  return {{"checks", checks}, {"theta_gap_ratios", r.theta_gap_ratios}, {"passed", r.passed()}};
}

// cli -----------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App cli{"Camera-based detection of displaced squeezed vacuum: analytics, simulation, estimation"};
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  cli.add_option("--config", config_path, "key = value config file; flags override it");

  // every remaining flag maps one-to-one onto a config key
  const std::vector<std::pair<std::string, std::string>> keyed = {
      {"n-alpha", "displacement photon number"},
      {"n-s", "squeezed-vacuum photon number"},
      {"phi", "comma-separated phases in radians (accepts pi, pi/2)"},
      {"rows", "sensor rows"},
      {"cols", "sensor columns"},
      {"weights", "'uniform' or a file with rows*cols weights"},
      {"frames", "frames per batch"},
      {"seed", "RNG seed"},
      {"threads", "worker threads (0 = all cores)"},
      {"out-dir", "output directory"},
      {"sweep-points", "phase grid size for sweep"},
      {"sweep-max", "upper end of the phase grid"},
      {"run-counts", "comma-separated run counts for precision"},
      {"frames-per-run", "frames per run for precision"},
      {"groups", "replicates at the largest run count for precision"},
      {"tolerance", "relative tolerance for oracle-check"},
      {"jackknife-blocks", "frame blocks for the q uncertainty in estimate"},
      {"export-csv", "also write frame batches as CSV (true/false)"},
  };
  std::vector<std::string> values(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    cli.add_option("--" + keyed[i].first, values[i], keyed[i].second);
  }

  auto* analytic = cli.add_subcommand("analytic", "closed-form moments, q and sensitivities");
  auto* simulate = cli.add_subcommand("simulate", "write frame batches for each phase branch");
  auto* estimate = cli.add_subcommand("estimate", "fit q and recover n_s, n_alpha from frame files");
  std::vector<std::string> files;
  estimate->add_option("files", files, "frame files, one per phase branch")->required();
  auto* sweep = cli.add_subcommand("sweep", "photon-number variance versus phase");
  auto* precision = cli.add_subcommand("precision", "precision of q versus number of runs");
  auto* oracle = cli.add_subcommand("oracle-check", "closed forms versus exact Fock computations");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (cli.count("--" + keyed[i].first) > 0) set_config_value(cfg, keyed[i].first, values[i]);
    }
    if (!files.empty()) cfg.inputs.assign(files.begin(), files.end());

    if (analytic->parsed()) {
      cmd_analytic(cfg, std::cout);
    } else if (simulate->parsed()) {
      cmd_simulate(cfg, std::cout);
    } else if (estimate->parsed()) {
      cmd_estimate(cfg, std::cout);
    } else if (sweep->parsed()) {
      cmd_sweep(cfg, std::cout);
    } else if (precision->parsed()) {
      cmd_precision(cfg, std::cout);
    } else if (oracle->parsed()) {
      if (!cmd_oracle_check(cfg, std::cout).passed()) return kExitCheckFailed;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace sqzcam::app
