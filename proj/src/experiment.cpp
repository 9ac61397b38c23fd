#include "hhlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

namespace hhlab {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw config_error("cannot open for writing: " + path.string());
  os << std::setprecision(17);
  return os;
}

std::shared_ptr<const RadialGeometry> radial_geom_from_json(const Json& j, int d) {
  const Index n = j.value("n", Index(1504));
  const int ppo = j.value("points_per_octave", 80);
  const Real r_max = j.value("r_max", 32.0);
  return RadialGeometry::make(d, n, r_max, ppo);
}

std::shared_ptr<const GridGeometry> grid_geom_from_json(const Json& j, int d) {
  const Index n = j.value("n", Index(96));
  const Real L = j.value("half_extent", 16.0);
  return GridGeometry::make(d, n, L);
}

Field field_from_config(const Json& block, const Params& p, unsigned long long seed) {
  SampleSpec spec = sample_spec_from_json(block.at("data"));
  spec.seed = seed;
  const Json grid = block.value("grid", Json::object());
  const std::string kind = grid.value("kind", "radial");
  if (kind == "radial") return sample_field(spec, radial_geom_from_json(grid, p.d));
  if (kind == "grid") return sample_field(spec, grid_geom_from_json(grid, p.d));
  throw config_error("grid: kind must be 'radial' or 'grid'");
}

Array geometric_list(const Json& j) {
  if (j.is_array()) {
    Array out(static_cast<Index>(j.size()));
    Index i = 0;
    for (const auto& v : j) out[i++] = v.get<Real>();
    return out;
  }
  const Real lo = j.at("lo").get<Real>();
  const Real hi = j.at("hi").get<Real>();
  const Index count = j.at("count").get<Index>();
  if (!(lo > 0 && hi > lo && count >= 2)) throw config_error("geometric list: need 0 < lo < hi");
  Array out(count);
  for (Index k = 0; k < count; ++k)
    out[k] = lo * std::pow(hi / lo, static_cast<Real>(k) / (count - 1));
  return out;
}

std::vector<Real> linear_axis(const Json& j) {
  if (j.is_array()) return j.get<std::vector<Real>>();
  const Real lo = j.at("lo").get<Real>();
  const Real hi = j.at("hi").get<Real>();
  const int count = j.at("count").get<int>();
  if (count < 1) throw config_error("axis: count must be >= 1");
  std::vector<Real> out;
  for (int k = 0; k < count; ++k)
    out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1.0));
  return out;
}

std::optional<std::vector<Rational>> rational_axis_from_json(const Json& j) {
  if (j.is_array()) return std::nullopt;  // explicit lists run in doubles
  auto lo = Rational::from_double(j.at("lo").get<Real>());
  auto hi = Rational::from_double(j.at("hi").get<Real>());
  if (!lo || !hi) return std::nullopt;
  return rational_axis(*lo, *hi, j.at("count").get<int>());
}

void run_region(const Json& cfg, const Params& p, const std::filesystem::path& dir,
                int threads, Json& manifest) {
  const Json& block = cfg.at("region");
  const std::string set = block.at("set").get<std::string>();
  std::map<std::string, Real> extra;
  std::map<std::string, Rational> extra_exact;
  bool extra_rational = true;
  if (block.contains("extra")) {
    for (auto it = block["extra"].begin(); it != block["extra"].end(); ++it) {
      extra[it.key()] = it.value().get<Real>();
      auto r = Rational::from_double(it.value().get<Real>());
      if (r)
        extra_exact[it.key()] = *r;
      else
        extra_rational = false;
    }
  }
  RegionMask mask;
  auto invq_exact = rational_axis_from_json(block.at("invq"));
  auto s_exact = rational_axis_from_json(block.at("s"));
  auto pg = Rational::from_double(p.gamma);
  auto pa = Rational::from_double(p.alpha);
  if (invq_exact && s_exact && extra_rational && pg && pa) {
    mask = admissible_region_exact(set, p, *invq_exact, *s_exact, extra_exact, threads);
    manifest["exact_arithmetic"] = true;
  } else {
    mask = admissible_region(set, p, linear_axis(block.at("invq")), linear_axis(block.at("s")),
                             extra, threads);
    manifest["exact_arithmetic"] = false;
  }
  {
    auto os = open_out(dir / "region.csv");
    write_region_csv(mask, os);
  }
  {
    auto os = open_out(dir / "region.json");
    os << region_to_json(mask).dump(2) << "\n";
  }
  // contour-ready margins: smallest signed margin across the set's atoms
  {
    auto os = open_out(dir / "margins.csv");
    os << std::setprecision(17) << "s\\invq";
    for (Real u : mask.invq_axis) os << "," << u;
    os << "\n";
    for (size_t j = 0; j < mask.s_axis.size(); ++j) {
      os << mask.s_axis[j];
      for (size_t i = 0; i < mask.invq_axis.size(); ++i) {
        std::map<std::string, Real> args = extra;
        args["invq"] = mask.invq_axis[i];
        args["s"] = mask.s_axis[j];
        auto rep = check_conditions(set, p, args);
        Real m = inf;
        for (const auto& item : rep.items) m = std::min(m, item.margin);
        os << "," << m;
      }
      os << "\n";
    }
  }
  manifest["cells"] = mask.invq_axis.size() * mask.s_axis.size();
}

void run_smoothing(const Json& cfg, const Params& p, const std::filesystem::path& dir,
                   Json& manifest, unsigned long long seed) {
  const Json& block = cfg.at("smoothing");
  Field f = field_from_config(block, p, seed);
  const Real pp = block.at("p").is_string() ? inf : block.at("p").get<Real>();
  const Real qq = block.at("q").is_string() ? inf : block.at("q").get<Real>();
  auto rate = smoothing_rate(f, pp, block.at("s").get<Real>(), qq,
                             block.at("sprime").get<Real>(), geometric_list(block.at("times")));
  auto os = open_out(dir / "smoothing.csv");
  write_smoothing_csv(rate, os);
  Json sum;
  sum["fitted_slope"] = rate.fitted_slope;
  sum["theory_slope"] = rate.theory_slope;
  sum["constant_estimate"] = rate.constant_estimate;
  auto js = open_out(dir / "summary.json");
  js << sum.dump(2) << "\n";
  manifest["fitted_slope"] = rate.fitted_slope;
}

void run_solve(const Json& cfg, const Params& p, const std::filesystem::path& dir,
               Json& manifest, unsigned long long seed, bool extend) {
  const Json& block = cfg.at(extend ? "extend" : "solve");
  Field u0 = field_from_config(block, p, seed);
  SolveSpec spec = solve_spec_from_json(block, p);
  SolveOutcome out = extend ? extend_maximal(u0, spec, block.at("horizon").get<Real>())
                            : solve_local(u0, spec);
  write_field(u0, dir, "data");
  write_solve_outcome(out, dir);
  manifest["verdict"] = to_string(out.verdict);
  manifest["window"] = out.window;
  manifest["maximal_time"] = out.maximal_time;
}

void run_selfsim(const Json& cfg, const Params& p, const std::filesystem::path& dir,
                 Json& manifest) {
  const Json& block = cfg.at("selfsim");
  AngularProfile omega = angular_profile_from_json(block.at("omega"));
  const Json grid = block.value("grid", Json::object());
  const std::string kind = grid.value("kind", "radial");
  Field phi = kind == "radial" ? profile_data(omega, p, radial_geom_from_json(grid, p.d))
                               : profile_data(omega, p, grid_geom_from_json(grid, p.d));
  SolveSpec spec = solve_spec_from_json(block, p);
  SolveOutcome out = solve_local(phi, spec);
  write_solve_outcome(out, dir);
  manifest["verdict"] = to_string(out.verdict);
  if (out.verdict != SolveVerdict::converged) return;

  std::vector<Real> lambdas = block.value("lambdas", std::vector<Real>{0.5, 2.0, 4.0});
  auto rep = self_similarity_deviation(out.trajectory, lambdas, p, spec.kato_spec(),
                                       spec.reference_order());
  {
    auto os = open_out(dir / "deviation.json");
    os << deviation_report_to_json(rep).dump(2) << "\n";
  }
  // similarity profiles at two interior mesh times
  const Array& times = out.trajectory.times();
  const Index k1 = times.size() / 2;
  const Index k2 = std::min<Index>(times.size() - 1, k1 + 16);
  if (phi.kind() == FieldKind::radial) {
    auto pr1 = extract_profile(out.trajectory, times[k1], p);
    auto pr2 = extract_profile(out.trajectory, times[k2], p);
    auto os1 = open_out(dir / "profile_t1.csv");
    write_profile_csv(pr1, os1);
    auto os2 = open_out(dir / "profile_t2.csv");
    write_profile_csv(pr2, os2);
    manifest["profile_deviation"] =
        profile_deviation(out.trajectory, times[k1], times[k2], p, spec.data_spec());
  }
  // initial trace residuals against annular test functions
  std::vector<TestFunctionSpec> tests;
  if (block.contains("tests"))
    for (const auto& t : block["tests"]) tests.push_back(test_function_from_json(t));
  if (!tests.empty()) {
    auto traces = initial_trace_check(out.trajectory, phi, tests);
    auto os = open_out(dir / "initial_trace.csv");
    os << std::setprecision(17) << "t";
    for (size_t j = 0; j < tests.size(); ++j) os << ",residual_" << j;
    os << "\n";
    for (Index k = 0; k < traces.times.size(); ++k) {
      os << traces.times[k];
      for (const auto& r : traces.residuals) os << "," << r[k];
      os << "\n";
    }
  }
}

void run_nonexist(const Json& cfg, const Params& p, const std::filesystem::path& dir,
                  Json& manifest) {
  const Json& block = cfg.at("nonexist");
  CutoffSpec spec;
  spec.l = block.value("l", 7);
  const Real q = block.at("q").is_string() ? inf : block.at("q").get<Real>();
  auto scan = contradiction_scan(p, block.at("beta").get<Real>(), q, block.at("s").get<Real>(),
                                 geometric_list(block.at("T")), spec,
                                 radial_geom_from_json(block.value("grid", Json::object()), p.d));
  if (scan.feasible) {
    auto os = open_out(dir / "scan.csv");
    write_scan_csv(scan, os);
  }
  auto js = open_out(dir / "verdict.json");
  js << scan_verdict_json(scan).dump(2) << "\n";
  manifest["verdict"] = scan.verdict;
  manifest["fitted_slope"] = scan.fitted_slope;
}

void run_weakcheck(const Json& cfg, const Params& p, const std::filesystem::path& dir,
                   Json& manifest, unsigned long long seed) {
  const Json& block = cfg.at("weakcheck");
  Field u0 = field_from_config(block, p, seed);
  SolveSpec spec = solve_spec_from_json(block, p);
  SolveOutcome out = solve_local(u0, spec);
  manifest["verdict"] = to_string(out.verdict);
  if (out.verdict != SolveVerdict::converged) return;
  const Real t_end = block.value("t_end", out.window);
  const bool with_nl = block.value("include_nonlinearity", true);
  Json residuals = Json::array();
  for (const auto& t : block.at("tests")) {
    const auto tf = test_function_from_json(t);
    residuals.push_back(weak_residual(out.trajectory, u0, p, tf, t_end, with_nl));
  }
  Json j;
  j["t_end"] = t_end;
  j["residuals"] = residuals;
  auto os = open_out(dir / "weak_residuals.json");
  os << j.dump(2) << "\n";
  manifest["max_residual"] = residuals.empty() ? 0.0 : static_cast<Real>([&] {
    Real m = 0;
    for (const auto& r : residuals) m = std::max(m, r.get<Real>());
    return m;
  }());
}

}  // namespace

ExperimentResult run_experiment(const Json& config, const std::filesystem::path& out_dir,
                                int threads,
                                std::optional<unsigned long long> seed_override) {
  ExperimentResult res;
  const auto started = std::chrono::steady_clock::now();
  Json manifest;
  try {
    const std::string command = config.at("command").get<std::string>();
    const Params p = params_from_json(config.at("params"));
    const unsigned long long seed =
        seed_override ? *seed_override : config.value("seed", 1ULL);
    std::filesystem::create_directories(out_dir);
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["threads"] = threads;
    manifest["config"] = config;

    if (command == "region")
      run_region(config, p, out_dir, threads, manifest);
    else if (command == "smoothing")
      run_smoothing(config, p, out_dir, manifest, seed);
    else if (command == "solve")
      run_solve(config, p, out_dir, manifest, seed, false);
    else if (command == "extend")
      run_solve(config, p, out_dir, manifest, seed, true);
    else if (command == "selfsim")
      run_selfsim(config, p, out_dir, manifest);
    else if (command == "nonexist")
      run_nonexist(config, p, out_dir, manifest);
    else if (command == "weakcheck")
      run_weakcheck(config, p, out_dir, manifest, seed);
    else
      throw config_error("unknown command: " + command);

    res.message = manifest.value("verdict", std::string("ok"));
  } catch (const config_error& e) {
    res.exit_code = 2;
    res.message = e.what();
    return res;
  } catch (const Json::exception& e) {
    res.exit_code = 2;
    res.message = std::string("config parse: ") + e.what();
    return res;
  } catch (const quadrature_overflow& e) {
    res.exit_code = 3;
    res.message = e.what();
    return res;
  }
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  manifest["elapsed_seconds"] = elapsed;  // timings live only here
  auto os = std::ofstream(out_dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  return res;
}

std::string describe(const std::string& name) {
  for (const auto& set : condition_set_names())
    if (set == name) return describe_condition_set(name);
  if (name == "region")
    return "region: fill an admissibility mask over a (1/q, s) grid.\n"
           "config block 'region': set, invq {lo,hi,count}, s {lo,hi,count}, extra {...}\n"
           "outputs: region.csv (0/1 mask), region.json (RLE), margins.csv (contour data)\n";
  if (name == "smoothing")
    return "smoothing: fit the heat-semigroup decay rate against the weighted estimate.\n"
           "config block 'smoothing': p, q, s, sprime, times {lo,hi,count}, data, grid\n"
           "outputs: smoothing.csv (t, norm, theory), summary.json\n";
  if (name == "solve")
    return "solve: one local mild solve by contraction iteration.\n"
           "config block 'solve': q, s, regime, stilde?, horizon, picard_tol, max_iterations,\n"
           "  tmesh {nodes, ratio_log2_denominator}, rho?, data {family,...}, grid {...}\n"
           "outputs: trajectory/, diagnostics.json, norm_history.csv\n";
  if (name == "extend")
    return "extend: continuation by repeated local solves until the horizon or blow-up.\n"
           "config block 'extend': as solve plus horizon\n"
           "outputs: as solve plus norm_samples.csv and the maximal-time estimate\n";
  if (name == "selfsim")
    return "selfsim: self-similar solution from degree-0-modulated homogeneous data.\n"
           "config block 'selfsim': omega {kind,c,eps,mode}, lambdas [...], tests [...],\n"
           "  plus the solve block fields\n"
           "outputs: deviation.json, profile_t1.csv, profile_t2.csv, initial_trace.csv\n";
  if (name == "nonexist")
    return "nonexist: supercritical scaling scan of the rescaled-test-function argument.\n"
           "config block 'nonexist': beta, q, s, l, T {lo,hi,count}, grid {...}\n"
           "outputs: scan.csv (T, lhs, bound, ratio), verdict.json\n";
  if (name == "weakcheck")
    return "weakcheck: distributional residual of a computed solution.\n"
           "config block 'weakcheck': solve fields plus tests [...] and t_end\n"
           "outputs: weak_residuals.json\n";
  throw config_error("unknown name: " + name);
}

}  // namespace hhlab
