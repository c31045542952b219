#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "specsim/builtin.hpp"
#include "specsim/expr.hpp"
#include "specsim/spectra.hpp"

namespace specsim {

// JSON spec files. Every object carries a fixed key set; unknown keys are errors.
//
//   {"kind": "eigen", "lambda": "<n, w>", "phi": "<n, w, x>", "n_max": 500}
//   {"kind": "kernel", "re": "<w, x, y>", "im": "<w, x, y>"}
//   {"kind": "farfima", "d": 0.2, "ar": [{"kernel": "<x, y>", "rank_one": {"c": 0.34, "g": "<x>"}}],
//    "ma": ["<x, y>"], "noise": <noise>}
//   {"kind": "filter", "theta": {"identity": "<w>", "re": "<w, x, y>", "im": "<w, x, y>"}, "noise": <noise>}
//
//   noise: {"type": "kernel", "kernel": "<x, y>"}
//        | {"type": "mercer", "eta": "<n>", "e": "<n, x>", "n_max": 1000}
//        | {"type": "lowrank", "sigma": [..], "f": ["<x>", ..]}
//
// An optional "name" is accepted at the top level.

namespace spec_io_detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidSpec(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw InvalidSpec(where + ": unknown key '" + key + "'");
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InvalidSpec(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline Expr expr_field(const json& j, const std::string& key, const std::string& where) {
  const json& v = field(j, key, where);
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return Expr::parse(os.str());
  }
  if (!v.is_string()) throw InvalidSpec(where + "." + key + ": expected an expression string");
  return Expr::parse(v.get<std::string>());
}

inline Expr optional_expr(const json& j, const std::string& key, const std::string& where, const char* fallback) {
  return j.contains(key) ? expr_field(j, key, where) : Expr::parse(fallback);
}

inline CovarianceSpec parse_noise(const json& j) {
  const std::string where = "noise";
  const std::string type = field(j, "type", where).get<std::string>();
  CovarianceSpec cov;
  if (type == "kernel") {
    require_keys(j, {"type", "kernel"}, where);
    const Expr k = expr_field(j, "kernel", where);
    cov.form = ClosedFormKernel{[k](double x, double y) { return k(x, y); }};
  } else if (type == "mercer") {
    require_keys(j, {"type", "eta", "e", "n_max"}, where);
    const Expr eta = expr_field(j, "eta", where);
    const Expr e = expr_field(j, "e", where);
    MercerSeries m{[eta](int n) { return eta({0, 0, 0, static_cast<double>(n)}); },
                   [e](int n, double x) { return e({x, 0, 0, static_cast<double>(n)}); },
                   j.value("n_max", kUnbounded)};
    if (m.n_max < 1) throw InvalidSpec("noise.n_max must be >= 1");
    cov.form = std::move(m);
  } else if (type == "lowrank") {
    require_keys(j, {"type", "sigma", "f"}, where);
    LowRankSum lr;
    lr.sigma = field(j, "sigma", where).get<std::vector<double>>();
    for (const auto& f : field(j, "f", where)) {
      const Expr e = Expr::parse(f.get<std::string>());
      lr.f.push_back([e](double x) { return e(x); });
    }
    if (lr.sigma.size() != lr.f.size()) throw InvalidSpec("noise: sigma and f have different lengths");
    cov.form = std::move(lr);
  } else {
    throw InvalidSpec("noise: unknown type '" + type + "'");
  }
  return cov;
}

}  // namespace spec_io_detail

inline SpectralDensitySpec parse_spec_json(const nlohmann::json& j) {
  using namespace spec_io_detail;
  const std::string kind = field(j, "kind", "spec").get<std::string>();
  const std::string name = j.value("name", kind);
  if (kind == "eigen") {
    require_keys(j, {"kind", "name", "lambda", "phi", "n_max"}, "spec");
    const Expr lambda = expr_field(j, "lambda", "spec");
    const Expr phi = expr_field(j, "phi", "spec");
    EigenSpec e{j.value("n_max", kUnbounded),
                [lambda](int n, double w) { return lambda({0, 0, w, static_cast<double>(n)}); },
                [phi](int n, double w, double x) { return phi({x, 0, w, static_cast<double>(n)}); }};
    if (e.n_max < 1) throw InvalidSpec("spec.n_max must be >= 1");
    return {name, std::move(e)};
  }
  if (kind == "kernel") {
    require_keys(j, {"kind", "name", "re", "im"}, "spec");
    const Expr re = expr_field(j, "re", "spec");
    const Expr im = optional_expr(j, "im", "spec", "0");
    return {name, KernelSpec{[re, im](double w, double x, double y) {
              return cdouble(re({x, y, w, 0}), im({x, y, w, 0}));
            }}};
  }
  if (kind == "farfima") {
    require_keys(j, {"kind", "name", "d", "ar", "ma", "noise"}, "spec");
    FarfimaSpec f;
    f.d = j.value("d", 0.0);
    if (j.contains("ar")) {
      for (const auto& a : j.at("ar")) {
        const std::string where = "spec.ar";
        require_keys(a, {"kernel", "rank_one"}, where);
        const Expr k = expr_field(a, "kernel", where);
        ArOperator op{[k](double x, double y) { return k(x, y); }, std::nullopt};
        if (a.contains("rank_one")) {
          const json& r = a.at("rank_one");
          require_keys(r, {"c", "g"}, where + ".rank_one");
          const Expr g = expr_field(r, "g", where + ".rank_one");
          op.rank_one = RankOneTag{field(r, "c", where).get<double>(), [g](double x) { return g(x); }};
        }
        f.ar.push_back(std::move(op));
      }
    }
    if (j.contains("ma")) {
      for (const auto& b : j.at("ma")) {
        const Expr k = Expr::parse(b.get<std::string>());
        f.ma.push_back([k](double x, double y) { return k(x, y); });
      }
    }
    f.noise_cov = parse_noise(field(j, "noise", "spec"));
    return {name, std::move(f)};
  }
  if (kind == "filter") {
    require_keys(j, {"kind", "name", "theta", "noise"}, "spec");
    const json& t = field(j, "theta", "spec");
    require_keys(t, {"identity", "re", "im"}, "spec.theta");
    const Expr identity = optional_expr(t, "identity", "spec.theta", t.contains("re") ? "0" : "1");
    const bool has_kernel = t.contains("re") || t.contains("im");
    const Expr re = optional_expr(t, "re", "spec.theta", "0");
    const Expr im = optional_expr(t, "im", "spec.theta", "0");
    FilterSpec fs;
    fs.theta = [identity, has_kernel, re, im](double w, const Grid& grid) -> FilterResponse {
      const cdouble a(identity({0, 0, w, 0}), 0.0);
      if (!has_kernel) return IdentityResponse{a};
      KernelResponse k{a, Eigen::MatrixXcd(grid.M, grid.M)};
      for (int r = 0; r < grid.M; ++r)
        for (int c = 0; c < grid.M; ++c) {
          const ExprVars v{grid.points[r], grid.points[c], w, 0};
          k.kernel(r, c) = cdouble(re(v), im(v));
        }
      return k;
    };
    fs.noise_cov = parse_noise(field(j, "noise", "spec"));
    return {name, std::move(fs)};
  }
  throw InvalidSpec("spec: unknown kind '" + kind + "'");
}

inline SpectralDensitySpec parse_spec_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("spec file is not valid JSON: ") + e.what());
  }
  try {
    return parse_spec_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("spec file has a malformed field: ") + e.what());
  }
}

inline SpectralDensitySpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

}  // namespace specsim
