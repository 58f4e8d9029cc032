// fracdecay: experiment runner.
//
//   fracdecay <transform|oscillate|decay|gamma|cover|normality|verify> [--config PATH] [flags]
//
// Each subcommand prints a JSON summary on stdout and, with --out DIR, also
// writes its data series as CSV next to the summary. Exit codes: 0 all hard
// invariants held, 1 invariant violation (machine-readable list on stdout),
// 2 configuration or parameter error.

#include <complex>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracdecay/fracdecay.hpp"

namespace fs = std::filesystem;
using namespace fracdecay;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<unsigned> threads;
  std::optional<std::string> phase_kind;
  std::vector<double> phase_coefficients;
  bool plumbing = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment config (JSON)");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--out", c.out, "directory for CSV/JSON artifacts");
  sub->add_option("--tol", c.tol, "absolute error tolerance");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--phase", c.phase_kind, "phase kind: quadratic, exponential, polynomial, identity");
  sub->add_option("--coefficients", c.phase_coefficients, "phase coefficients");
  sub->add_flag("--plumbing", c.plumbing, "admit the linear identity phase");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? parse_config(json::object(), "<defaults>") : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out_dir = *c.out;
  if (c.tol) {
    if (!(*c.tol > 0.0 && *c.tol < 1.0)) throw Error(ErrorCode::ConfigError, "--tol must lie in (0, 1)");
    cfg.tol = *c.tol;
  }
  if (c.threads) cfg.threads = *c.threads;
  if (c.phase_kind) {
    json p = {{"kind", *c.phase_kind}};
    if (!c.phase_coefficients.empty()) p["coefficients"] = c.phase_coefficients;
    cfg.phase = parse_config(json{{"phase", p}}, "--phase").phase;
  }
  cfg.plumbing = cfg.plumbing || c.plumbing;
  cfg.normality.seed = cfg.seed;
  cfg.normality.threads = cfg.threads;
  return cfg;
}

/// Writes `name` under the output directory when --out was given.
struct Sink {
  std::optional<fs::path> dir;
  void write(const std::string& name, const std::string& text) const {
    if (dir) write_text(*dir / name, text);
  }
};

Sink sink_for(const Common& c, const ExperimentConfig& cfg) {
  Sink s;
  if (c.out || cfg.out_dir != ".") s.dir = fs::path(cfg.out_dir);
  return s;
}

int emit(const Sink& sink, const std::string& name, const json& summary) {
  const std::string text = to_json_text(summary);
  sink.write(name, text);
  std::cout << text;
  return 0;
}

json ifs_json(const DerivedIfs& d) {
  return {{"rho", d.rho()},     {"theta", d.theta}, {"alpha", d.alpha}, {"delta", d.delta},
          {"p_l", d.p_l},       {"p_s", d.p_s},     {"a_l", d.a_l},     {"a_s", d.a_s},
          {"hull", {d.hull.lo, d.hull.hi}}};
}

int run_transform(const Common& c, const std::vector<double>& xi_flag) {
  const ExperimentConfig cfg = resolve(c);
  const DerivedIfs ifs = validate(cfg.ifs);
  const std::vector<double> xis = xi_flag.empty() ? cfg.transform.xi : xi_flag;
  CsvTable csv({"xi", "re", "im", "abs"});
  json values = json::array();
  for (double xi : xis) {
    const Complex z = mu_hat(ifs, xi, cfg.tol);
    csv.row({fmt17(xi), fmt17(z.real()), fmt17(z.imag()), fmt17(std::abs(z))});
    values.push_back({{"xi", xi}, {"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}});
  }
  const Sink sink = sink_for(c, cfg);
  sink.write("transform.csv", csv.text());
  return emit(sink, "transform.json", {{"tol", cfg.tol}, {"ifs", ifs_json(ifs)}, {"values", values}});
}

int run_oscillate(const Common& c, const std::vector<double>& xi_flag) {
  const ExperimentConfig cfg = resolve(c);
  const DerivedIfs ifs = validate(cfg.ifs);
  const OscillatoryIntegrator osc(ifs, cfg.phase, cfg.weight,
                                  OscillatoryOptions{kDefaultAtomBudget, cfg.threads, cfg.plumbing});
  const std::vector<double> xis = xi_flag.empty() ? cfg.oscillate.xi : xi_flag;
  CsvTable csv({"xi", "re", "im", "abs", "level", "error_bound"});
  json values = json::array();
  for (double xi : xis) {
    const OscillatoryResult r = osc(xi, cfg.tol);
    csv.row({fmt17(xi), fmt17(r.value.real()), fmt17(r.value.imag()), fmt17(std::abs(r.value)),
             std::to_string(r.level), fmt17(r.error_bound)});
    values.push_back({{"xi", xi},
                      {"re", r.value.real()},
                      {"im", r.value.imag()},
                      {"abs", std::abs(r.value)},
                      {"level", r.level},
                      {"error_bound", r.error_bound}});
  }
  const auto& k = osc.constants();
  const Sink sink = sink_for(c, cfg);
  sink.write("oscillate.csv", csv.text());
  return emit(sink, "oscillate.json",
              {{"tol", cfg.tol},
               {"hull_constants", {{"H0", k.H0}, {"M", k.M}, {"H1", k.H1}, {"H2", k.H2}, {"sup_phi1", k.sup_phi1}}},
               {"values", values}});
}

int run_decay(const Common& c, std::optional<double> xi_min, std::optional<double> xi_max, std::optional<int> ppd) {
  ExperimentConfig cfg = resolve(c);
  if (xi_min) cfg.decay.xi_min = *xi_min;
  if (xi_max) cfg.decay.xi_max = *xi_max;
  if (ppd) cfg.decay.points_per_decade = *ppd;
  const DerivedIfs ifs = validate(cfg.ifs);
  const OscillatoryIntegrator osc(ifs, cfg.phase, cfg.weight, OscillatoryOptions{kDefaultAtomBudget, 1, cfg.plumbing});
  const DecayProfile prof =
      decay_profile(osc, cfg.decay.xi_min, cfg.decay.xi_max, cfg.decay.points_per_decade, cfg.tol, cfg.threads);
  CsvTable csv({"xi", "magnitude", "window_id"});
  for (std::size_t i = 0; i < prof.grid.size(); ++i) {
    csv.row({fmt17(prof.grid[i]), fmt17(prof.magnitudes[i]), std::to_string(window_id(prof.grid[i]))});
  }
  CsvTable win({"window_id", "lo", "hi", "sup", "argmax", "points", "complete"});
  json windows = json::array();
  for (const auto& w : prof.windows) {
    win.row({std::to_string(w.id), fmt17(w.lo), fmt17(w.hi), fmt17(w.sup), fmt17(w.argmax), std::to_string(w.points),
             w.complete ? "1" : "0"});
    windows.push_back({{"id", w.id}, {"sup", w.sup}, {"argmax", w.argmax}, {"complete", w.complete}});
  }
  const Sink sink = sink_for(c, cfg);
  sink.write("profile.csv", csv.text());
  sink.write("windows.csv", win.text());
  return emit(sink, "fit.json",
              {{"gamma_hat", prof.fitted_gamma},
               {"residual", prof.residual},
               {"fit_range", {prof.fit_lo, prof.fit_hi}},
               {"windows", windows},
               {"points", prof.grid.size()},
               {"tol", cfg.tol},
               {"max_level", *std::max_element(prof.levels.begin(), prof.levels.end())}});
}

int run_gamma(const Common& c, std::optional<int> resolution) {
  ExperimentConfig cfg = resolve(c);
  if (resolution) cfg.gamma.resolution = *resolution;
  const DerivedIfs ifs = validate(cfg.ifs);
  const ExponentSolution s = optimize_gamma(ifs, cfg.gamma.resolution);
  const Sink sink = sink_for(c, cfg);
  return emit(sink, "gamma.json",
              {{"beta", s.beta},
               {"epsilon", s.epsilon},
               {"gamma", s.gamma},
               {"binding", to_string(s.binding)},
               {"slack", s.feasibility_slack},
               {"resolution", cfg.gamma.resolution},
               {"ifs", ifs_json(ifs)}});
}

struct CoverFlags {
  std::optional<double> c0, theta, epsilon;
  std::optional<int> N;
  std::vector<double> range;
  std::optional<std::uint64_t> grid_points;
};

int run_cover(const Common& c, const CoverFlags& f) {
  ExperimentConfig cfg = resolve(c);
  CoverConfig& cc = cfg.cover.cover;
  if (f.c0) cc.c0 = *f.c0;
  if (f.theta) cc.theta = *f.theta;
  if (f.epsilon) cc.epsilon = *f.epsilon;
  if (f.N) cc.N = *f.N;
  if (!f.range.empty()) {
    if (f.range.size() != 2) throw Error(ErrorCode::ConfigError, "--range takes two values H1 H2");
    cc.range = {f.range[0], f.range[1]};
  }
  if (f.grid_points) cfg.cover.grid_points = *f.grid_points;
  try {
    cc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  const std::uint64_t min_grid =
      static_cast<std::uint64_t>(std::ceil(10.0 * cc.scale() * cc.range.width())) + 1;
  const std::uint64_t grid = cfg.cover.grid_points ? cfg.cover.grid_points : min_grid;
  const CoverResult cover = build_cover(cc);
  const CoverReport rep = verify_cover(cc, grid, cover, false);
  CsvTable csv({"left", "right"});
  for (const auto& iv : cover.intervals) csv.row({fmt17(iv.left), fmt17(iv.right)});
  json violations = json::array();
  for (double x : rep.violations) violations.push_back({{"kind", "uncovered_member"}, {"x", x}});
  if (!rep.within_bound()) violations.push_back({{"kind", "count_exceeds_bound"}, {"count", rep.count}});
  const Sink sink = sink_for(c, cfg);
  sink.write("cover.csv", csv.text());
  emit(sink, "cover.json",
       {{"theta", cc.theta},
        {"epsilon", cc.epsilon},
        {"N", cc.N},
        {"c0", cc.c0},
        {"range", {cc.range.lo, cc.range.hi}},
        {"count", rep.count},
        {"bound", rep.bound},
        {"omega_bound", rep.omega_bound},
        {"ratio", rep.ratio},
        {"grid_points", rep.grid_points},
        {"members", rep.members},
        {"nodes", rep.nodes},
        {"max_children", rep.max_children},
        {"violations", violations}});
  return violations.empty() ? 0 : 1;
}

struct NormalityFlags {
  std::optional<int> base, digits, offset;
  std::optional<std::size_t> samples, weyl_samples, weyl_n, del_n;
  std::vector<std::int64_t> h;
};

int run_normality(const Common& c, const NormalityFlags& f) {
  ExperimentConfig cfg = resolve(c);
  NormalityConfig& n = cfg.normality;
  if (f.base) n.base = *f.base;
  if (f.digits) n.digit_count = *f.digits;
  if (f.offset) n.digit_offset = *f.offset;
  if (f.samples) n.sample_count = *f.samples;
  if (f.weyl_samples) n.weyl_samples = *f.weyl_samples;
  if (f.weyl_n) n.weyl_n_max = *f.weyl_n;
  if (f.del_n) n.del_n_max = *f.del_n;
  if (!f.h.empty()) n.h_list = f.h;
  n.weyl_samples = std::min(n.weyl_samples, n.sample_count);
  const DerivedIfs ifs = validate(cfg.ifs);
  const NormalityReport rep = normality_report(ifs, cfg.phase, n);

  CsvTable digits({"position", "digit", "count", "frequency"});
  json per_position = json::array();
  for (int p = 0; p < rep.digits.digit_count; ++p) {
    json row = json::array();
    for (int d = 0; d < rep.base; ++d) {
      const auto cnt = rep.digits.counts[static_cast<std::size_t>(p)][static_cast<std::size_t>(d)];
      digits.row({std::to_string(p + 1 + rep.digits.offset), std::to_string(d), std::to_string(cnt),
                  fmt17(rep.digits.frequency_at(p, d))});
      row.push_back(rep.digits.frequency_at(p, d));
    }
    per_position.push_back(row);
  }
  CsvTable weyl({"h", "n", "magnitude"});
  json weyl_json = json::array();
  for (const auto& w : rep.weyl) {
    for (const auto& p : w.points) weyl.row({std::to_string(w.h), std::to_string(p.n), fmt17(p.magnitude)});
    weyl_json.push_back({{"h", w.h}, {"n_max", w.points.back().n}, {"final_magnitude", w.points.back().magnitude}});
  }
  CsvTable del({"h", "n", "inner", "increment", "partial"});
  json del_json = json::array();
  for (const auto& s : rep.del) {
    for (const auto& p : s.points) {
      del.row({std::to_string(s.h), std::to_string(p.n), fmt17(p.inner), fmt17(p.increment), fmt17(p.partial)});
    }
    del_json.push_back({{"h", s.h},
                        {"n_max", s.points.back().n},
                        {"partial", s.points.back().partial},
                        {"increment_log_slope", s.slope.slope},
                        {"diverges", s.diverges}});
  }
  const Sink sink = sink_for(c, cfg);
  sink.write("digits.csv", digits.text());
  if (!rep.weyl.empty()) sink.write("weyl.csv", weyl.text());
  if (!rep.del.empty()) sink.write("del.csv", del.text());
  return emit(sink, "normality.json",
              {{"base", rep.base},
               {"sample_count", rep.sample_count},
               {"precision_bits", rep.precision_bits},
               {"sample_digits", rep.sample_digits},
               {"digit_count", rep.digits.digit_count},
               {"digit_offset", rep.digits.offset},
               {"digit_frequencies", rep.digit_frequencies},
               {"position_frequencies", per_position},
               {"sigma", rep.sigma},
               {"weyl", weyl_json},
               {"del", del_json}});
}

int run_verify(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const auto results = run_invariants(cfg);
  const json j = to_json(results);
  const Sink sink = sink_for(c, cfg);
  emit(sink, "verify.json", j);
  return j["ok"].get<bool>() ? 0 : 1;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::OracleViolation:
    case ErrorCode::ImaginaryResidue:
    case ErrorCode::NoFeasiblePoint:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier decay of smooth images of self-similar measures: experiment runner"};
  app.require_subcommand(1);

  Common common;
  std::vector<double> xi;

  auto* transform = app.add_subcommand("transform", "mu_hat at the given frequencies");
  add_common(transform, common);
  transform->add_option("--xi", xi, "frequencies");

  auto* oscillate = app.add_subcommand("oscillate", "int e(xi phi) g dmu at the given frequencies");
  add_common(oscillate, common);
  oscillate->add_option("--xi", xi, "frequencies");

  std::optional<double> xi_min, xi_max;
  std::optional<int> ppd;
  auto* decay = app.add_subcommand("decay", "decay profile and fitted envelope exponent");
  add_common(decay, common);
  decay->add_option("--xi-min", xi_min);
  decay->add_option("--xi-max", xi_max);
  decay->add_option("--points-per-decade", ppd);

  std::optional<int> resolution;
  auto* gamma = app.add_subcommand("gamma", "explicit decay exponent");
  add_common(gamma, common);
  gamma->add_option("--resolution", resolution);

  CoverFlags cf;
  auto* cover = app.add_subcommand("cover", "interval cover of Gamma(eps) with oracle check");
  add_common(cover, common);
  cover->add_option("--c0", cf.c0);
  cover->add_option("--theta", cf.theta);
  cover->add_option("--epsilon", cf.epsilon);
  cover->add_option("--N", cf.N);
  cover->add_option("--range", cf.range)->expected(2);
  cover->add_option("--grid-points", cf.grid_points);

  NormalityFlags nf;
  auto* normality = app.add_subcommand("normality", "digit statistics, Weyl sums and DEL partial sums");
  add_common(normality, common);
  normality->add_option("--base", nf.base);
  normality->add_option("--samples", nf.samples);
  normality->add_option("--digits", nf.digits);
  normality->add_option("--digit-offset", nf.offset);
  normality->add_option("--harmonics", nf.h, "nonzero integers h");
  normality->add_option("--weyl-samples", nf.weyl_samples);
  normality->add_option("--weyl-n", nf.weyl_n);
  normality->add_option("--del-n", nf.del_n);

  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  add_common(verify, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*transform) return run_transform(common, xi);
    if (*oscillate) return run_oscillate(common, xi);
    if (*decay) return run_decay(common, xi_min, xi_max, ppd);
    if (*gamma) return run_gamma(common, resolution);
    if (*cover) return run_cover(common, cf);
    if (*normality) return run_normality(common, nf);
    if (*verify) return run_verify(common);
  } catch (const Error& e) {
    const int rc = exit_code_for(e.code());
    if (rc == 1) {
      std::cout << to_json_text({{"violations", json::array({{{"kind", to_string(e.code())}, {"message", e.what()}}})}});
    }
    std::cerr << "fracdecay: " << e.what() << "\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "fracdecay: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
