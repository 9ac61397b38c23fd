#include "hhlab/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace hhlab {

namespace {

void set_precision(std::ostream& os) { os << std::setprecision(17); }

Json array_to_json(const Array& a) {
  Json j = Json::array();
  for (Index i = 0; i < a.size(); ++i) j.push_back(a[i]);
  return j;
}

Array array_from_json(const Json& j) {
  Array a(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& v : j) a[i++] = v.get<Real>();
  return a;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw config_error("cannot open for writing: " + path.string());
  set_precision(os);
  return os;
}

}  // namespace

void write_region_csv(const RegionMask& mask, std::ostream& os) {
  set_precision(os);
  os << "s\\invq";
  for (Real u : mask.invq_axis) os << "," << u;
  os << "\n";
  for (size_t j = 0; j < mask.s_axis.size(); ++j) {
    os << mask.s_axis[j];
    for (size_t i = 0; i < mask.invq_axis.size(); ++i) os << "," << (mask.mask[i][j] ? 1 : 0);
    os << "\n";
  }
}

Json region_to_json(const RegionMask& mask) {
  Json j;
  j["condition_set"] = mask.condition_set;
  j["invq_axis"] = mask.invq_axis;
  j["s_axis"] = mask.s_axis;
  // run-length encoding of the row-major mask, starting from the given bit
  std::vector<long long> runs;
  int start = -1;
  int current = -1;
  long long count = 0;
  for (size_t i = 0; i < mask.mask.size(); ++i) {
    for (size_t k = 0; k < mask.mask[i].size(); ++k) {
      const int bit = mask.mask[i][k] ? 1 : 0;
      if (start < 0) {
        start = bit;
        current = bit;
      }
      if (bit == current) {
        ++count;
      } else {
        runs.push_back(count);
        current = bit;
        count = 1;
      }
    }
  }
  if (count > 0) runs.push_back(count);
  j["mask_start"] = start < 0 ? 0 : start;
  j["mask_runs"] = runs;
  return j;
}

RegionMask region_from_json(const Json& j) {
  RegionMask m;
  m.condition_set = j.at("condition_set").get<std::string>();
  m.invq_axis = j.at("invq_axis").get<std::vector<Real>>();
  m.s_axis = j.at("s_axis").get<std::vector<Real>>();
  m.mask.assign(m.invq_axis.size(), std::vector<bool>(m.s_axis.size(), false));
  int bit = j.at("mask_start").get<int>();
  auto runs = j.at("mask_runs").get<std::vector<long long>>();
  size_t flat = 0;
  const size_t cols = m.s_axis.size();
  for (long long run : runs) {
    for (long long c = 0; c < run; ++c, ++flat)
      m.mask[flat / cols][flat % cols] = bit == 1;
    bit = 1 - bit;
  }
  return m;
}

Json condition_report_to_json(const ConditionReport& rep) {
  Json j;
  j["condition_set"] = rep.condition_set;
  j["overall"] = rep.overall;
  Json items = Json::array();
  for (const auto& it : rep.items) {
    Json o;
    o["label"] = it.label;
    o["lhs"] = it.lhs;
    o["relation"] = it.relation == Relation::less ? "<" : "<=";
    o["rhs"] = it.rhs;
    o["satisfied"] = it.satisfied;
    o["margin"] = it.margin;
    o["exact"] = it.exact;
    items.push_back(std::move(o));
  }
  j["items"] = std::move(items);
  return j;
}

Json field_header_json(const Field& f) {
  Json j;
  if (f.kind() == FieldKind::radial) {
    const auto& g = f.radial_geometry();
    j["kind"] = "radial";
    j["d"] = g.d;
    j["n"] = g.n;
    j["r_max"] = g.r_max;
    j["points_per_octave"] = g.points_per_octave;
  } else {
    const auto& g = f.grid_geometry();
    j["kind"] = "grid";
    j["d"] = g.d;
    j["n"] = g.n;
    j["half_extent"] = g.half_extent;
  }
  if (f.homogeneity()) j["homogeneity"] = *f.homogeneity();
  return j;
}

void write_field_csv(const Field& f, std::ostream& os) {
  set_precision(os);
  if (f.kind() == FieldKind::radial) {
    os << "r,value\n";
    const auto& g = f.radial_geometry();
    for (Index i = 0; i < g.n; ++i) os << g.radii[i] << "," << f.values()[i] << "\n";
  } else {
    const auto& g = f.grid_geometry();
    if (g.d == 1) {
      os << "x,value\n";
      for (Index i = 0; i < g.n; ++i) os << g.axis[i] << "," << f.values()[i] << "\n";
    } else {
      os << "x,y,value\n";
      for (Index i = 0; i < g.n; ++i)
        for (Index k = 0; k < g.n; ++k)
          os << g.axis[i] << "," << g.axis[k] << "," << f.values()[i * g.n + k] << "\n";
    }
  }
}

void write_field(const Field& f, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  auto hdr = open_out(dir / (stem + ".json"));
  hdr << field_header_json(f).dump(2) << "\n";
  auto csv = open_out(dir / (stem + ".csv"));
  write_field_csv(f, csv);
}

void write_trajectory(const Trajectory& u, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json index;
  index["times"] = array_to_json(u.times());
  index["header"] = field_header_json(u.slice(0));
  Json files = Json::array();
  for (Index k = 0; k < u.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%04lld.csv", static_cast<long long>(k));
    files.push_back(name);
    auto os = open_out(dir / name);
    write_field_csv(u.slice(k), os);
  }
  index["slices"] = std::move(files);
  auto os = open_out(dir / "index.json");
  os << index.dump(2) << "\n";
}

void write_solve_outcome(const SolveOutcome& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_trajectory(out.trajectory, dir / "trajectory");
  Json diag;
  diag["verdict"] = to_string(out.verdict);
  diag["window"] = out.window;
  diag["free_kato"] = out.free_kato;
  diag["residual"] = out.residual;
  diag["maximal_time"] = out.maximal_time;
  diag["blowup_rate_exponent"] = out.blowup_rate_exponent;
  diag["restart_times"] = out.restart_times;
  diag["constants"] = {{"smoothing_const", out.constants.smoothing_const},
                       {"beta_stability", out.constants.beta_stability},
                       {"beta_difference", out.constants.beta_difference},
                       {"C0", out.constants.C0},
                       {"C1", out.constants.C1},
                       {"rho", out.constants.rho},
                       {"M", out.constants.M},
                       {"gate", out.constants.gate},
                       {"gate_ok", out.constants.gate_ok}};
  auto os = open_out(dir / "diagnostics.json");
  os << diag.dump(2) << "\n";

  auto csv = open_out(dir / "norm_history.csv");
  csv << "iteration,kato_norm,distance,contraction_ratio\n";
  for (size_t k = 0; k < out.kato_history.size(); ++k) {
    csv << k << "," << out.kato_history[k] << ",";
    if (k >= 1 && k - 1 < out.distances.size()) csv << out.distances[k - 1];
    csv << ",";
    if (k >= 2 && k - 2 < out.contraction_ratios.size()) csv << out.contraction_ratios[k - 2];
    csv << "\n";
  }
  if (out.sample_times.size() > 0) {
    auto scsv = open_out(dir / "norm_samples.csv");
    scsv << "t,norm\n";
    for (Index k = 0; k < out.sample_times.size(); ++k)
      scsv << out.sample_times[k] << "," << out.sample_norms[k] << "\n";
  }
}

void write_smoothing_csv(const SmoothingRate& rate, std::ostream& os) {
  set_precision(os);
  os << "t,norm,theory\n";
  // theory line anchored at the first sample
  const Real c0 = rate.norms[0] / std::pow(rate.times[0], rate.theory_slope);
  for (Index k = 0; k < rate.times.size(); ++k)
    os << rate.times[k] << "," << rate.norms[k] << ","
       << c0 * std::pow(rate.times[k], rate.theory_slope) << "\n";
}

Json divergence_report_to_json(const DivergenceReport& rep) {
  Json j;
  j["case"] = rep.case_name;
  j["resolutions"] = array_to_json(rep.resolutions);
  j["values"] = array_to_json(rep.values);
  j["monotone_growth"] = rep.monotone_growth;
  j["bounded_below"] = rep.bounded_below;
  return j;
}

Json moment_probe_to_json(const MomentProbe& probe) {
  Json j;
  j["divergent"] = probe.divergent;
  j["value"] = probe.value;
  j["probe_radii"] = array_to_json(probe.probe_radii);
  j["probe_values"] = array_to_json(probe.probe_values);
  j["divergence_trend"] = array_to_json(probe.divergence_trend);
  return j;
}

Json deviation_report_to_json(const DeviationReport& rep) {
  Json j;
  j["lambdas"] = rep.lambdas;
  j["deviations"] = rep.deviations;
  return j;
}

void write_profile_csv(const Field& profile, std::ostream& os) {
  set_precision(os);
  os << "y,psi\n";
  const auto& g = profile.radial_geometry();
  for (Index i = 0; i < g.n; ++i) os << g.radii[i] << "," << profile.values()[i] << "\n";
}

void write_scan_csv(const ContradictionScan& scan, std::ostream& os) {
  set_precision(os);
  os << "T,lhs,bound,ratio\n";
  for (Index k = 0; k < scan.T_values.size(); ++k)
    os << scan.T_values[k] << "," << scan.lhs_values[k] << "," << scan.bound_values[k] << ","
       << scan.ratio_values[k] << "\n";
}

Json scan_verdict_json(const ContradictionScan& scan) {
  Json j;
  j["feasible"] = scan.feasible;
  j["verdict"] = scan.verdict;
  j["beta"] = scan.beta;
  j["fitted_slope"] = scan.fitted_slope;
  j["expected_slope"] = scan.expected_slope;
  j["note"] =
      "scaling mechanism evaluated on the initial-data pairing and closed-form bound "
      "exponents; no hypothetical positive solution is simulated";
  return j;
}

Params params_from_json(const Json& j) {
  Params p;
  p.d = j.at("d").get<int>();
  p.gamma = j.at("gamma").get<Real>();
  p.alpha = j.at("alpha").get<Real>();
  return p;
}

SampleSpec sample_spec_from_json(const Json& j) {
  SampleSpec s;
  s.family = j.at("family").get<std::string>();
  if (j.contains("amplitude")) s.amplitude = j["amplitude"].get<Real>();
  if (j.contains("exponent")) s.exponent = j["exponent"].get<Real>();
  if (j.contains("radius")) s.radius = j["radius"].get<Real>();
  if (j.contains("outer_radius")) s.outer_radius = j["outer_radius"].get<Real>();
  if (j.contains("sigma")) s.sigma = j["sigma"].get<Real>();
  if (j.contains("log_power")) s.log_power = j["log_power"].get<Real>();
  if (j.contains("seed")) s.seed = j["seed"].get<unsigned long long>();
  return s;
}

SolveSpec solve_spec_from_json(const Json& j, const Params& p) {
  SolveSpec s;
  s.params = p;
  s.q = j.at("q").is_string() ? inf : j.at("q").get<Real>();
  s.s = j.at("s").get<Real>();
  const std::string regime = j.value("regime", "critical");
  if (regime == "critical") {
    s.regime = Regime::critical;
  } else if (regime == "subcritical") {
    s.regime = Regime::subcritical;
    s.stilde = j.at("stilde").get<Real>();
  } else {
    throw config_error("solve spec: regime must be critical or subcritical");
  }
  if (j.contains("theta")) s.theta = j["theta"].get<Real>();
  if (j.contains("horizon")) s.horizon = j["horizon"].get<Real>();
  if (j.contains("picard_tol")) s.picard_tol = j["picard_tol"].get<Real>();
  if (j.contains("max_iterations")) s.max_iterations = j["max_iterations"].get<int>();
  if (j.contains("constant_safety")) s.constant_safety = j["constant_safety"].get<Real>();
  if (j.contains("fixed_window")) s.fixed_window = j["fixed_window"].get<bool>();
  if (j.contains("tmesh")) {
    const auto& t = j["tmesh"];
    if (t.contains("nodes")) s.tmesh.nodes = t["nodes"].get<Index>();
    if (t.contains("ratio")) s.tmesh.ratio = t["ratio"].get<Real>();
    if (t.contains("ratio_log2_denominator")) {
      // ratio = 2^(1/k): keeps dyadic rescaling exact
      const int k = t["ratio_log2_denominator"].get<int>();
      if (k < 1) throw config_error("tmesh: ratio_log2_denominator must be >= 1");
      s.tmesh.ratio = std::pow(2.0, 1.0 / k);
    }
  }
  if (j.contains("rho")) {
    s.rho_policy = SolveSpec::RhoPolicy::prescribed;
    s.rho_prescribed = j["rho"].get<Real>();
  }
  return s;
}

AngularProfile angular_profile_from_json(const Json& j) {
  AngularProfile omega;
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant")
    omega.kind = AngularProfile::Kind::constant;
  else if (kind == "fourier_mode")
    omega.kind = AngularProfile::Kind::fourier_mode;
  else if (kind == "axis_modulated")
    omega.kind = AngularProfile::Kind::axis_modulated;
  else
    throw config_error("angular profile: unknown kind '" + kind + "'");
  if (j.contains("c")) omega.c = j["c"].get<Real>();
  if (j.contains("eps")) omega.eps = j["eps"].get<Real>();
  if (j.contains("mode")) omega.mode = j["mode"].get<int>();
  return omega;
}

TestFunctionSpec test_function_from_json(const Json& j) {
  TestFunctionSpec t;
  const std::string kind = j.value("kind", "ball");
  if (kind == "ball")
    t.kind = TestFunctionSpec::Kind::ball;
  else if (kind == "annulus")
    t.kind = TestFunctionSpec::Kind::annulus;
  else
    throw config_error("test function: unknown kind '" + kind + "'");
  if (j.contains("radius")) t.radius = j["radius"].get<Real>();
  if (j.contains("inner_radius")) t.inner_radius = j["inner_radius"].get<Real>();
  if (j.contains("time_rate")) t.time_rate = j["time_rate"].get<Real>();
  return t;
}

}  // namespace hhlab
