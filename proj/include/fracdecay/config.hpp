#pragma once

// Experiment configuration: one JSON document, sections per subcommand.
//
//   {
//     "ifs":    {"rho": "1/3", "translations": [0, "2/3"], "probabilities": [0.5, 0.5]},
//     "phase":  {"kind": "quadratic", "coefficients": [1, 0, 0]},   // c2, c1, c0
//     "weight": {"kind": "constant", "coefficients": [1]},
//     "seed": 1, "tol": 1e-6, "threads": 1,
//     "decay": {...}, "cover": {...}, "normality": {...}, ...
//   }
//
// A flat IFS document (rho / translations / probabilities at top level) is
// accepted as well. Numbers may be written as "p/q" strings; the exact
// fraction is kept for high-precision sampling. Errors name the offending
// field as a JSON pointer, or the line and column for syntax errors.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracdecay/erdos.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/normality.hpp"
#include "fracdecay/phase.hpp"
#include "json.hpp"

namespace fracdecay {

using Json = nlohmann::json;

struct TransformSection {
  std::vector<double> xi{0.0, 1.0, 10.0, 100.0};
};

struct OscillateSection {
  std::vector<double> xi{0.0, 1.0, 10.0, 100.0, 1000.0};
};

struct DecaySection {
  double xi_min = 1e2;
  double xi_max = 1e5;
  int points_per_decade = 64;
};

struct GammaSection {
  int resolution = 400;
};

struct CoverSection {
  CoverConfig cover{1.0, 3.0, 0.3, 8, {1.0, 2.0}};
  std::uint64_t grid_points = 0;  // 0: ten per cover interval
};

struct ExperimentConfig {
  std::string source;  // file name for diagnostics
  IfsSpec ifs;
  PhaseSpec phase = PhaseSpec::quadratic(1.0);
  WeightSpec weight = WeightSpec::constant(1.0);
  std::uint64_t seed = 1;
  double tol = 1e-6;
  unsigned threads = 1;
  bool plumbing = false;
  std::string out_dir = ".";
  TransformSection transform;
  OscillateSection oscillate;
  DecaySection decay;
  GammaSection gamma;
  CoverSection cover;
  NormalityConfig normality;
};

/// The Cantor measure rho = 1/3, a = (0, 2/3), p = (1/2, 1/2).
inline IfsSpec cantor_spec() {
  IfsSpec s;
  s.rho = 1.0 / 3.0;
  s.translations = {0.0, 2.0 / 3.0};
  s.probabilities = {0.5, 0.5};
  s.rho_exact = Fraction{1, 3};
  s.translations_exact = {Fraction{0, 1}, Fraction{2, 3}};
  return s;
}

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorCode::ConfigError, source_ + ": " + (path.empty() ? "/" : path) + ": " + what);
  }

  /// A number, or a "p/q" / integer string. Sets `exact` for string input.
  double real(const Json& j, const std::string& path, std::optional<Fraction>* exact = nullptr) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (auto f = Fraction::parse(s)) {
        if (exact) *exact = *f;
        return f->value();
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
      } catch (const std::exception&) {
      }
      fail(path, "expected a number or \"p/q\", got \"" + s + "\"");
    }
    fail(path, std::string("expected a number, got ") + j.type_name());
  }

  std::int64_t integer(const Json& j, const std::string& path) const {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
    }
    fail(path, std::string("expected an integer, got ") + j.dump());
  }

  std::uint64_t count(const Json& j, const std::string& path) const {
    const auto v = integer(j, path);
    if (v < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  std::vector<double> reals(const Json& j, const std::string& path,
                            std::vector<std::optional<Fraction>>* exact = nullptr) const {
    if (!j.is_array()) fail(path, std::string("expected an array, got ") + j.type_name());
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      std::optional<Fraction> f;
      out.push_back(real(j[i], path + "/" + std::to_string(i), &f));
      if (exact) exact->push_back(f);
    }
    return out;
  }

  std::string text(const Json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, std::string("expected a string, got ") + j.type_name());
    return j.get<std::string>();
  }

  bool flag(const Json& j, const std::string& path) const {
    if (!j.is_boolean()) fail(path, std::string("expected true/false, got ") + j.type_name());
    return j.get<bool>();
  }

  void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, std::string("expected an object, got ") + j.type_name());
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) fail(path + "/" + it.key(), "unknown key");
    }
  }

  IfsSpec ifs(const Json& j, const std::string& path) const {
    check_keys(j, path, {"rho", "translations", "probabilities"});
    for (const char* k : {"rho", "translations", "probabilities"}) {
      if (!j.contains(k)) fail(path + "/" + k, "missing");
    }
    IfsSpec s;
    std::optional<Fraction> rho_exact;
    s.rho = real(j["rho"], path + "/rho", &rho_exact);
    s.rho_exact = rho_exact;
    s.translations = reals(j["translations"], path + "/translations", &s.translations_exact);
    s.probabilities = reals(j["probabilities"], path + "/probabilities");
    return s;
  }

  PhaseSpec phase(const Json& j, const std::string& path) const {
    check_keys(j, path, {"kind", "coefficients"});
    if (!j.contains("kind")) fail(path + "/kind", "missing");
    const std::string kind = text(j["kind"], path + "/kind");
    std::vector<double> c;
    if (j.contains("coefficients")) c = reals(j["coefficients"], path + "/coefficients");
    if (kind == "identity") return PhaseSpec::identity();
    if (kind == "quadratic") {
      if (c.empty() || c.size() > 3) fail(path + "/coefficients", "quadratic takes [c2, c1, c0]");
      c.resize(3, 0.0);
      return PhaseSpec::quadratic(c[0], c[1], c[2]);
    }
    if (kind == "exponential") {
      if (c.size() > 1) fail(path + "/coefficients", "exponential takes [scale]");
      return PhaseSpec::exponential(c.empty() ? 1.0 : c[0]);
    }
    if (kind == "polynomial") {
      if (c.empty()) fail(path + "/coefficients", "polynomial needs ascending coefficients");
      return PhaseSpec::polynomial(c);
    }
    fail(path + "/kind", "unknown phase kind \"" + kind + "\" (quadratic, exponential, polynomial, identity)");
  }

  WeightSpec weight(const Json& j, const std::string& path) const {
    check_keys(j, path, {"kind", "coefficients"});
    const std::string kind = j.contains("kind") ? text(j["kind"], path + "/kind") : "constant";
    std::vector<double> c;
    if (j.contains("coefficients")) c = reals(j["coefficients"], path + "/coefficients");
    if (kind == "constant") {
      if (c.size() > 1) fail(path + "/coefficients", "constant takes [c]");
      return WeightSpec::constant(c.empty() ? 1.0 : c[0]);
    }
    if (kind == "polynomial") {
      if (c.empty()) fail(path + "/coefficients", "polynomial needs ascending coefficients");
      return WeightSpec::polynomial(c);
    }
    fail(path + "/kind", "unknown weight kind \"" + kind + "\" (constant, polynomial)");
  }

  SequenceSpec sequence(const Json& j, const std::string& path) const {
    check_keys(j, path, {"kind", "a", "d", "b", "values"});
    const std::string kind = j.contains("kind") ? text(j["kind"], path + "/kind") : "identity";
    try {
      if (kind == "identity") return SequenceSpec::identity();
      if (kind == "arithmetic") {
        return SequenceSpec::arithmetic(j.contains("a") ? integer(j["a"], path + "/a") : 1,
                                        j.contains("d") ? integer(j["d"], path + "/d") : 1);
      }
      if (kind == "geometric") {
        if (!j.contains("b")) fail(path + "/b", "missing");
        return SequenceSpec::geometric(integer(j["b"], path + "/b"));
      }
      if (kind == "explicit") {
        if (!j.contains("values") || !j["values"].is_array()) fail(path + "/values", "expected an array");
        std::vector<std::int64_t> v;
        for (std::size_t i = 0; i < j["values"].size(); ++i) {
          v.push_back(integer(j["values"][i], path + "/values/" + std::to_string(i)));
        }
        return SequenceSpec::explicit_list(std::move(v));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      fail(path, e.what());
    }
    fail(path + "/kind", "unknown sequence kind \"" + kind + "\" (identity, arithmetic, geometric, explicit)");
  }

 private:
  std::string source_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const Json& root, const std::string& source = "<config>") {
  const detail::ConfigReader rd(source);
  ExperimentConfig cfg;
  cfg.source = source;
  if (!root.is_object()) rd.fail("", "top level must be an object");

  const bool flat = root.contains("rho");
  if (flat) {
    Json ifs_only = Json::object();
    for (const char* k : {"rho", "translations", "probabilities"}) {
      if (root.contains(k)) ifs_only[k] = root[k];
    }
    cfg.ifs = rd.ifs(ifs_only, "");
  } else if (root.contains("ifs")) {
    cfg.ifs = rd.ifs(root["ifs"], "/ifs");
  } else {
    cfg.ifs = cantor_spec();
  }

  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    const std::string path = "/" + key;
    if (key == "rho" || key == "translations" || key == "probabilities" || key == "ifs") continue;
    if (key == "phase") {
      cfg.phase = rd.phase(v, path);
    } else if (key == "weight") {
      cfg.weight = rd.weight(v, path);
    } else if (key == "seed") {
      cfg.seed = rd.count(v, path);
    } else if (key == "tol") {
      cfg.tol = rd.real(v, path);
      if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) rd.fail(path, "tol must lie in (0, 1)");
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, rd.count(v, path)));
    } else if (key == "plumbing") {
      cfg.plumbing = rd.flag(v, path);
    } else if (key == "out") {
      cfg.out_dir = rd.text(v, path);
    } else if (key == "transform") {
      rd.check_keys(v, path, {"xi"});
      if (v.contains("xi")) cfg.transform.xi = rd.reals(v["xi"], path + "/xi");
    } else if (key == "oscillate") {
      rd.check_keys(v, path, {"xi"});
      if (v.contains("xi")) cfg.oscillate.xi = rd.reals(v["xi"], path + "/xi");
    } else if (key == "decay") {
      rd.check_keys(v, path, {"xi_min", "xi_max", "points_per_decade"});
      if (v.contains("xi_min")) cfg.decay.xi_min = rd.real(v["xi_min"], path + "/xi_min");
      if (v.contains("xi_max")) cfg.decay.xi_max = rd.real(v["xi_max"], path + "/xi_max");
      if (v.contains("points_per_decade")) {
        cfg.decay.points_per_decade = static_cast<int>(rd.integer(v["points_per_decade"], path + "/points_per_decade"));
      }
      if (!(cfg.decay.xi_min > 0.0 && cfg.decay.xi_min < cfg.decay.xi_max)) rd.fail(path, "need 0 < xi_min < xi_max");
      if (cfg.decay.points_per_decade < 16) rd.fail(path + "/points_per_decade", "must be >= 16");
    } else if (key == "gamma") {
      rd.check_keys(v, path, {"resolution"});
      if (v.contains("resolution")) cfg.gamma.resolution = static_cast<int>(rd.integer(v["resolution"], path + "/resolution"));
      if (cfg.gamma.resolution < 100) rd.fail(path + "/resolution", "must be >= 100");
    } else if (key == "cover") {
      rd.check_keys(v, path, {"c0", "theta", "epsilon", "N", "range", "grid_points"});
      auto& c = cfg.cover.cover;
      if (v.contains("c0")) c.c0 = rd.real(v["c0"], path + "/c0");
      if (v.contains("theta")) c.theta = rd.real(v["theta"], path + "/theta");
      if (v.contains("epsilon")) c.epsilon = rd.real(v["epsilon"], path + "/epsilon");
      if (v.contains("N")) c.N = static_cast<int>(rd.integer(v["N"], path + "/N"));
      if (v.contains("range")) {
        const auto r = rd.reals(v["range"], path + "/range");
        if (r.size() != 2) rd.fail(path + "/range", "expected [H1, H2]");
        c.range = {r[0], r[1]};
      }
      if (v.contains("grid_points")) cfg.cover.grid_points = rd.count(v["grid_points"], path + "/grid_points");
      try {
        c.validate();
      } catch (const Error& e) {
        rd.fail(path, e.what());
      }
    } else if (key == "normality") {
      rd.check_keys(v, path, {"base", "sample_count", "digit_count", "digit_offset", "sequence", "h", "weyl_samples",
                              "weyl_n_max", "del_n_max", "del_tol"});
      auto& n = cfg.normality;
      if (v.contains("base")) n.base = static_cast<int>(rd.integer(v["base"], path + "/base"));
      if (v.contains("sample_count")) n.sample_count = rd.count(v["sample_count"], path + "/sample_count");
      if (v.contains("digit_count")) n.digit_count = static_cast<int>(rd.count(v["digit_count"], path + "/digit_count"));
      if (v.contains("digit_offset")) n.digit_offset = static_cast<int>(rd.count(v["digit_offset"], path + "/digit_offset"));
      if (v.contains("sequence")) n.sequence = rd.sequence(v["sequence"], path + "/sequence");
      if (v.contains("h")) {
        n.h_list.clear();
        if (!v["h"].is_array()) rd.fail(path + "/h", "expected an array of nonzero integers");
        for (std::size_t i = 0; i < v["h"].size(); ++i) {
          const auto h = rd.integer(v["h"][i], path + "/h/" + std::to_string(i));
          if (h == 0) rd.fail(path + "/h/" + std::to_string(i), "h must be nonzero");
          n.h_list.push_back(h);
        }
      }
      if (v.contains("weyl_samples")) n.weyl_samples = rd.count(v["weyl_samples"], path + "/weyl_samples");
      if (v.contains("weyl_n_max")) n.weyl_n_max = rd.count(v["weyl_n_max"], path + "/weyl_n_max");
      if (v.contains("del_n_max")) n.del_n_max = rd.count(v["del_n_max"], path + "/del_n_max");
      if (v.contains("del_tol")) n.del_tol = rd.real(v["del_tol"], path + "/del_tol");
      if (n.base < 2) rd.fail(path + "/base", "must be >= 2");
      if (n.weyl_samples > n.sample_count) rd.fail(path + "/weyl_samples", "exceeds sample_count");
    } else {
      rd.fail(path, "unknown key");
    }
  }
  cfg.normality.seed = cfg.seed;
  cfg.normality.threads = cfg.threads;
  return cfg;
}

inline Json read_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    // locate the byte offset as line:column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ConfigError,
                source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(read_json_text(ss.str(), path), path);
}

}  // namespace fracdecay
