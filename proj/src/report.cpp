#include "lps/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "lps/algebra.hpp"
#include "lps/classify.hpp"
#include "lps/corpus.hpp"
#include "lps/errors.hpp"
#include "lps/symmetry.hpp"
#include "lps/transform.hpp"

namespace lps {

using json = nlohmann::ordered_json;

const char* tool_version() { return "0.1.0"; }

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bound_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json interval_json(const Interval& iv) { return {{"lo", bound_json(iv.lo)}, {"hi", bound_json(iv.hi)}}; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << v;
  return ss.str();
}

double constant_of(const SymmetryClassification& c, const std::string& key) {
  if (key == "c2") return c.c2;
  if (key == "c1") return c.c1;
  if (key == "c0") return c.c0;
  if (key == "mu") return c.mu;
  throw Error("unknown expectation key '" + key + "'");
}

json classification_json(const SymmetryClassification& c) {
  json j;
  j["dim"] = c.dim;
  j["c2"] = number(c.c2);
  j["c1"] = number(c.c1);
  j["c0"] = number(c.c0);
  j["mu"] = c.dim == 4 ? number(c.mu) : json(nullptr);
  j["shift"] = c.dim == 4 ? number(c.shift) : json(nullptr);
  j["fit_mode"] = c.fit_mode == FitMode::Symbolic ? "symbolic" : "numeric";
  j["residual"] = number(c.residual);
  j["scale"] = number(c.scale);
  j["residual6"] = number(c.residual6);
  j["residual4"] = number(c.residual4);
  if (c.exact) {
    json e = json::array();
    for (const auto& x : *c.exact) e.push_back(expr_json(x));
    j["exact"] = e;
  } else {
    j["exact"] = nullptr;
  }
  return j;
}

json transform_json(const ParabolicEquation& eq, const HeatTransform& ht, const AnalyzeOptions& opt,
                    bool& verified) {
  json j;
  j["branch"] = branch_name(ht.mobius.branch);
  if (auto t = ht.text()) {
    j["text"] = *t;
  } else {
    j["text"] = nullptr;
  }
  j["t_interval"] = interval_json(ht.t_interval);
  j["T"] = expr_json(ht.mobius.T);
  j["omega"] = expr_json(ht.omega);
  j["log_nu"] = ht.log_nu ? expr_json(*ht.log_nu) : json(nullptr);
  j["x_tilde"] = expr_json(ht.x_tilde);
  j["log_multiplier"] = expr_json(ht.log_multiplier);
  json table = json::array();
  for (const auto& s : ht.table(5))
    table.push_back({{"t", number(s.t)}, {"T", number(s.T)}, {"Tdot", number(s.Tdot)}, {"omega", number(s.omega)},
                     {"nu", number(s.nu)}});
  j["samples"] = table;
  const double sch = schwarzian_residual(ht.mobius, ht.t_interval);
  j["residuals"] = {{"schwarzian", number(sch)}, {"omega", number(omega_residual(ht))}, {"nu", number(nu_residual(ht))}};
  PullbackGrid grid;
  grid.nx = grid.nt = opt.grid;
  json pull = json::array();
  for (const auto& [name, f] : reference_heat_solutions()) {
    PullbackReport r = pullback_residual(eq, ht, f, grid);
    const bool ok = r.max_relative <= opt.tol_residual;
    verified = verified && ok;
    pull.push_back({{"solution", name},
                    {"max_relative", number(r.max_relative)},
                    {"richardson_gap", number(r.richardson_gap)},
                    {"points", r.points},
                    {"ok", ok}});
  }
  j["pullback"] = pull;
  return j;
}

json table_json(const CommutatorTable& t) {
  json rows = json::array();
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j) {
      json coeffs = json::array();
      for (int k = 0; k < t.n; ++k) {
        const double c = t.at(i, j, k);
        if (std::abs(c) > 1e-12) coeffs.push_back({{"k", k + 1}, {"c", number(c)}});
      }
      rows.push_back({{"i", i + 1}, {"j", j + 1}, {"bracket", coeffs}});
    }
  return rows;
}

json symmetry_json(const ParabolicEquation& eq, const SymmetryBasis& b, const AnalyzeOptions& opt, bool& verified,
                   std::vector<std::string>& warnings) {
  json j;
  j["dim"] = b.dim;
  j["family"] = family_name(b.family);
  j["kappa"] = number(b.kappa);
  j["time_reflected"] = b.time_reflected;
  j["reflection"] = b.time_reflected ? json("generators are written in the reflected time t -> -t") : json(nullptr);
  json gens = json::array();
  for (const auto& v : b.fields) {
    DeterminingReport r = check_determining(eq, v, b.t_window);
    const bool ok = r.max() <= opt.tol_determining;
    verified = verified && ok;
    gens.push_back({{"label", v.label},
                    {"text", v.text()},
                    {"tau", expr_json(v.tau)},
                    {"xi", expr_json(v.xi)},
                    {"phi", expr_json(v.phi)},
                    {"provenance", v.provenance},
                    {"determining", {{"eq1", number(r.eq1)}, {"eq2", number(r.eq2)}, {"xi_eq", number(r.xi_eq)}}},
                    {"ok", ok}});
  }
  j["generators"] = gens;
  CommutatorTable t = commutator_table(b);
  j["table"] = table_json(t);
  j["table_residual"] = number(t.residual);
  j["jacobi_defect"] = number(t.jacobi_defect());
  j["algebra"] = algebra_name(t);
  TableReport rep = verify_table(t, published_table(b.family, b.c1, b.c0, b.kappa));
  json flagged = json::array();
  for (const auto& [i, k] : rep.flagged_lines()) {
    flagged.push_back({i + 1, k + 1});
    warnings.push_back("reference bracket [v" + std::to_string(i + 1) + ", v" + std::to_string(k + 1) +
                       "] differs from the computed bracket");
  }
  j["reference_table"] = {{"max_deviation", number(rep.max_deviation)}, {"flagged_lines", flagged}};
  return j;
}

}  // namespace

json expr_json(const Expr& e) { return {{"text", to_string(e)}, {"sexpr", to_sexpr(e)}}; }

AnalysisReport analyze_source(const std::string& source, const std::string& path, const AnalyzeOptions& opt) {
  AnalysisReport rep;
  json& j = rep.doc;
  json config = {{"tol_classify", opt.tol_classify},
                 {"tol_residual", opt.tol_residual},
                 {"tol_determining", opt.tol_determining},
                 {"grid", opt.grid},
                 {"require_nontrivial", opt.require_nontrivial},
                 {"seed", opt.seed}};
  j["schema_version"] = kSchemaVersion;
  j["tool"] = {{"name", "lps"}, {"version", tool_version()}};
  j["config"] = config;
  j["config_hash"] = hex(fnv1a(config.dump() + "\n" + source));

  ParsedProgram prog = parse(source);
  ParabolicEquation eq = ParabolicEquation::from_program(prog);
  eq.seed = opt.seed;
  eq.validate();

  json in;
  in["path"] = path;
  in["source"] = source;
  in["variable"] = eq.variable;
  json consts = json::object();
  for (const auto& [k, v] : eq.constants) consts[k] = number(v);
  in["constants"] = consts;
  in["a"] = expr_json(eq.a);
  in["b"] = expr_json(eq.b);
  in["c"] = expr_json(eq.c);
  in["domain"] = interval_json(eq.domain);
  in["window"] = interval_json(eq.analysis_window());
  in["backward"] = eq.backward;
  j["input"] = in;

  InvariantTriple inv = compute_invariants(eq);
  json ij;
  ij["I"] = expr_json(inv.I);
  ij["J"] = expr_json(inv.J);
  ij["K"] = expr_json(inv.K);
  ij["G"] = expr_json(inv.G);
  ij["sqrt_a"] = expr_json(inv.sqrt_a);
  ij["symbolic_I"] = inv.symbolic_I;
  ij["symbolic_G"] = inv.symbolic_G;
  ij["x_ref"] = number(inv.x_ref);
  json samples = json::array();
  for (double x : deterministic_points(inv.spec.lo, inv.spec.hi))
    samples.push_back({{"x", number(x)}, {"I", number(inv.I_at(x))}, {"K", number(inv.K_at(x))}});
  ij["samples"] = samples;
  j["invariants"] = ij;
  if (!inv.symbolic_I) rep.warnings.push_back("I has no closed form; evaluated by quadrature");

  ClassifyOptions co;
  co.tolerance = opt.tol_classify;
  SymmetryClassification cls = classify(inv, co);
  rep.dim = cls.dim;
  j["classification"] = classification_json(cls);
  for (const auto& w : cls.warnings) rep.warnings.push_back(w);

  j["transform"] = nullptr;
  if (cls.dim == 6) {
    try {
      HeatTransform ht = build_heat_transform(cls, inv);
      j["transform"] = transform_json(eq, ht, opt, rep.verified);
    } catch (const Error& e) {
      rep.warnings.push_back(std::string("transform: ") + e.what());
    }
  }

  j["symmetry"] = nullptr;
  if (cls.dim >= 4) {
    SymmetryBasis b = emit_basis(cls, inv, eq.backward);
    for (const auto& w : b.warnings) rep.warnings.push_back(w);
    j["symmetry"] = symmetry_json(eq, b, opt, rep.verified, rep.warnings);
  }

  j["verified"] = rep.verified;
  j["warnings"] = rep.warnings;
  if (!rep.verified) rep.exit_code = 1;
  if (opt.require_nontrivial && cls.dim == 2) rep.exit_code = 2;
  return rep;
}

AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& opt) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return analyze_source(ss.str(), path, opt);
}

namespace {

std::string num(const json& v) { return v.is_number() ? fixed(v.get<double>(), 10) : v.dump(); }

}  // namespace

std::string AnalysisReport::text() const {
  std::ostringstream ss;
  const json& in = doc.at("input");
  const json& c = doc.at("classification");
  const bool backward = in["backward"].get<bool>();
  ss << "equation: u_t " << (backward ? "+ (" : "= (") << in["a"]["text"].get<std::string>() << ") u_xx + ("
     << in["b"]["text"].get<std::string>() << ") u_x + (" << in["c"]["text"].get<std::string>() << ") u"
     << (backward ? " = 0" : "") << "\n";
  const json& iv = doc.at("invariants");
  ss << "I = " << iv["I"]["text"].get<std::string>() << "\n";
  ss << "K = " << iv["K"]["text"].get<std::string>() << "\n";
  ss << "symmetry dimension: " << dim << "\n";
  if (dim == 6)
    ss << "K = c2 I^2 + c1 I + c0 with c2 = " << num(c["c2"]) << ", c1 = " << num(c["c1"]) << ", c0 = " << num(c["c0"]) << "\n";
  if (dim == 4)
    ss << "K = mu/(I+s)^2 + c2 (I+s)^2 + c0 with mu = " << num(c["mu"]) << ", c2 = " << num(c["c2"]) << ", c0 = " << num(c["c0"])
       << ", s = " << num(c["shift"]) << "\n";
  if (!doc.at("transform").is_null()) {
    const json& t = doc.at("transform");
    ss << "transform (" << t["branch"].get<std::string>() << "):\n";
    if (!t["text"].is_null()) {
      ss << "  " << t["text"].get<std::string>() << "\n";
    } else {
      ss << "  t~ = " << t["T"]["text"].get<std::string>() << ", x~ = " << t["x_tilde"]["text"].get<std::string>()
         << ", u = exp(" << t["log_multiplier"]["text"].get<std::string>() << ") nu(t) u~\n";
    }
    for (const auto& p : t["pullback"])
      ss << "  pullback " << p["solution"].get<std::string>() << ": " << num(p["max_relative"]) << "\n";
  }
  if (!doc.at("symmetry").is_null()) {
    const json& s = doc.at("symmetry");
    ss << "generators (" << s["family"].get<std::string>() << "):\n";
    for (const auto& g : s["generators"]) ss << "  " << g["label"].get<std::string>() << " = " << g["text"].get<std::string>() << "\n";
    ss << "brackets:\n";
    for (const auto& r : s["table"]) {
      if (r["bracket"].empty()) continue;
      ss << "  [v" << r["i"] << ", v" << r["j"] << "] =";
      bool first = true;
      for (const auto& t : r["bracket"]) {
        ss << (first ? " " : " + ") << num(t["c"]) << " v" << t["k"];
        first = false;
      }
      ss << "\n";
    }
    ss << "algebra: " << s["algebra"].get<std::string>() << "\n";
    if (s["time_reflected"].get<bool>()) ss << "note: " << s["reflection"].get<std::string>() << "\n";
  }
  for (const auto& w : warnings) ss << "warning: " << w << "\n";
  ss << "verified: " << (verified ? "yes" : "no") << "\n";
  return ss.str();
}

std::string describe_error(const std::exception& e, const std::string& path) {
  if (const auto* s = dynamic_cast<const SyntaxError*>(&e))
    return path + ":" + std::to_string(s->line()) + ":" + std::to_string(s->column()) + ": " + s->message();
  return path.empty() ? std::string(e.what()) : path + ": " + e.what();
}

namespace {

json delta_json(const DeltaLimitReport& d) {
  json taus = json::array(), devs = json::array();
  for (double t : d.taus) taus.push_back(number(t));
  for (double v : d.deviations) devs.push_back(number(v));
  return {{"label", d.label}, {"taus", taus},     {"deviations", devs},          {"sup", number(d.sup)},
          {"monotone", d.monotone()}, {"final", number(d.final_deviation())}, {"ok", d.ok()}};
}

}  // namespace

json kernel_report_json(const KernelEntry& e, const KernelReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = r.name;
  j["equation"] = r.equation;
  j["kernel"] = expr_json(e.K);
  json consts = json::object();
  for (const auto& [k, v] : e.constants) consts[k] = number(v);
  j["constants"] = consts;
  j["validity"] = e.validity;
  j["citation"] = e.citation;
  j["residual"] = {{"value", number(r.residual)}, {"tolerance", r.residual_tol}, {"ok", r.residual_ok()}};
  json norm = json::array();
  for (const auto& p : r.normalization)
    norm.push_back({{"tau", number(p.tau)}, {"value", number(p.value)}, {"target", number(p.target)},
                    {"deviation", number(p.deviation)}});
  j["normalization"] = {{"claimed_density", e.normalization.density},
                        {"over", e.normalization.over == Normalization::Over::Space ? "space" : "source"},
                        {"tolerance", r.normalization_tol},
                        {"points", norm},
                        {"ok", r.normalization_ok()}};
  json delta = json::array();
  for (const auto& d : r.delta) delta.push_back(delta_json(d));
  j["delta_limit"] = {{"tests", delta}, {"ok", r.delta_ok()}};
  j["notes"] = r.notes;
  j["pass"] = r.ok();
  return j;
}

json heat_2d_json(const Heat2dResolution& r) {
  auto variant = [](const Heat2dVariant& v) {
    return json{{"factor_four", v.factor_four},    {"fd_residual", number(v.fd_residual)},
                {"normalization", number(v.normalization)}, {"delta_limit", delta_json(v.delta)},
                {"passes", v.passes()}};
  };
  return {{"with_four", variant(r.with_four)},
          {"without_four", variant(r.without_four)},
          {"chosen", r.chosen_factor_four ? "with_four" : "without_four"}};
}

std::string kernel_report_text(const KernelEntry& e, const KernelReport& r) {
  std::ostringstream ss;
  ss << r.name << ": " << r.equation << "\n";
  ss << "  K = " << r.kernel_text << "\n";
  ss << "  valid: " << e.validity << "\n";
  ss << "  residual " << fixed(r.residual) << " (tol " << r.residual_tol << ") " << (r.residual_ok() ? "ok" : "FAIL")
     << "\n";
  for (const auto& p : r.normalization)
    ss << "  normalization t=" << p.tau << ": " << std::setprecision(12) << p.value << " target " << p.target
       << " deviation " << std::setprecision(3) << p.deviation << "\n";
  ss << "  normalization " << (r.normalization_ok() ? "ok" : "FAIL") << "\n";
  for (const auto& d : r.delta) {
    ss << "  delta limit (" << d.label << "):";
    for (double v : d.deviations) ss << " " << fixed(v);
    ss << (d.ok() ? " ok" : " FAIL") << "\n";
  }
  for (const auto& n : r.notes) ss << "  note: " << n << "\n";
  ss << "  " << (r.ok() ? "PASS" : "FAIL") << "\n";
  return ss.str();
}

namespace {

void add_row(std::vector<SelftestRow>& rows, std::string group, std::string name, bool ok, std::string detail) {
  rows.push_back({std::move(group), std::move(name), ok, std::move(detail)});
}

template <class F>
void guarded(std::vector<SelftestRow>& rows, const std::string& group, const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    add_row(rows, group, name, false, std::string("error: ") + e.what());
  }
}

void corpus_rows(const std::string& dir, std::vector<SelftestRow>& rows) {
  for (const auto& e : load_corpus(dir)) {
    guarded(rows, "classify", e.name, [&] {
      ParabolicEquation eq = ParabolicEquation::from_program(e.program);
      InvariantTriple inv = compute_invariants(eq);
      SymmetryClassification cls = classify(inv);
      bool ok = cls.dim == e.expect_dim;
      double worst = 0.0;
      for (const auto& [k, v] : e.expect) worst = std::max(worst, std::abs(constant_of(cls, k) - v));
      ok = ok && worst <= e.tolerance;
      add_row(rows, "classify", e.name, ok, "dim " + std::to_string(cls.dim) + ", worst constant error " + fixed(worst));

      if (cls.dim == 6) {
        guarded(rows, "transform", e.name, [&] {
          HeatTransform ht = build_heat_transform(cls, inv);
          double worst_pull = 0.0;
          for (const auto& [name, f] : reference_heat_solutions())
            worst_pull = std::max(worst_pull, pullback_residual(eq, ht, f).max_relative);
          add_row(rows, "transform", e.name, worst_pull <= 1e-6, "pullback " + fixed(worst_pull));
        });
      }
      if (cls.dim >= 4) {
        guarded(rows, "symmetry", e.name, [&] {
          SymmetryBasis b = emit_basis(cls, inv, eq.backward);
          double det = 0.0;
          for (const auto& v : b.fields) det = std::max(det, check_determining(eq, v, b.t_window).max());
          CommutatorTable t = commutator_table(b);
          TableReport rep = verify_table(t, published_table(b.family, b.c1, b.c0, b.kappa));
          const bool flags_ok =
              rep.flagged_lines() == known_flagged_lines(b.family, std::abs(b.c1) > 1e-12 ? b.c1 : 0.0);
          add_row(rows, "symmetry", e.name, det <= 1e-8 && flags_ok,
                  "determining " + fixed(det) + ", " + algebra_name(t) + ", " +
                      std::to_string(rep.flagged_lines().size()) + " flagged");
        });
      }
    });
  }
}

void family_rows(std::vector<SelftestRow>& rows) {
  const int dims[6] = {4, 4, 4, 6, 6, 6};
  const int signs[6] = {0, -1, 1, 0, -1, 1};
  for (int fam = 0; fam < 6; ++fam) {
    const std::string name = family_name(static_cast<BasisFamily>(fam));
    guarded(rows, "tables", name, [&] {
      std::mt19937_64 rng(20241016 + fam);
      std::uniform_real_distribution<double> kd(0.3, 1.5), cd(-2.0, 2.0), md(0.5, 3.0);
      double worst = 0.0;
      bool ok = true;
      for (int draw = 0; draw < 20; ++draw) {
        const double k = kd(rng), c1 = dims[fam] == 6 ? cd(rng) : 0.0, c0 = cd(rng);
        const double mu = (draw % 2 ? 1 : -1) * md(rng);
        CanonicalSetup s = canonical_setup(dims[fam], signs[fam] * k * k, c1, c0, mu);
        CommutatorTable t = commutator_table(s.basis);
        TableReport rep = verify_table(t, published_table(s.basis.family, c1, c0, s.basis.kappa));
        auto flagged = rep.flagged_lines();
        ok = ok && flagged == known_flagged_lines(s.basis.family, c1);
        for (int i = 0; i < t.n; ++i)
          for (int j = 0; j < t.n; ++j) {
            if (std::find(flagged.begin(), flagged.end(), std::pair{std::min(i, j), std::max(i, j)}) != flagged.end())
              continue;
            CommutatorTable p = published_table(s.basis.family, c1, c0, s.basis.kappa);
            for (int l = 0; l < t.n; ++l) worst = std::max(worst, std::abs(t.at(i, j, l) - p.at(i, j, l)));
          }
      }
      add_row(rows, "tables", name, ok && worst <= 1e-7, "20 draws, worst unflagged deviation " + fixed(worst));
    });
  }
}

void kernel_rows(const SelftestOptions& opt, std::vector<SelftestRow>& rows) {
  for (const auto& n : kernel_names()) {
    guarded(rows, "kernels", n, [&] {
      KernelEntry e = kernel(n);
      const bool flip = std::find(opt.sign_flips.begin(), opt.sign_flips.end(), n) != opt.sign_flips.end();
      if (flip) e.equation.potential = -e.equation.potential;
      KernelReport r = verify_entry(e);
      double norm = 0.0;
      for (const auto& p : r.normalization) norm = std::max(norm, p.deviation);
      add_row(rows, "kernels", n + (flip ? " (sign flipped)" : ""), r.ok(),
              "residual " + fixed(r.residual) + ", normalization " + fixed(norm) + ", delta " +
                  fixed(r.delta.empty() ? 0.0 : r.delta.front().final_deviation()));
    });
  }
  guarded(rows, "kernels", "heat_2d factor", [&] {
    Heat2dResolution r = resolve_heat_2d();
    add_row(rows, "kernels", "heat_2d factor", r.chosen_factor_four && r.with_four.passes() && !r.without_four.passes(),
            std::string("chosen ") + (r.chosen_factor_four ? "with" : "without") + " the factor 4");
  });
  guarded(rows, "kernels", "mehler vs transform", [&] {
    double spread = std::max(mehler_transform_ratio_spread(0.0), mehler_transform_ratio_spread(0.6));
    add_row(rows, "kernels", "mehler vs transform", spread <= 1e-7, "ratio spread " + fixed(spread));
  });
}

void polynomial_rows(std::vector<SelftestRow>& rows) {
  guarded(rows, "heat polynomials", "u_0..u_10", [&] {
    bool ok = true;
    for (int n = 0; n <= 10; ++n) {
      Expr e = heat_polynomial(n).expr();
      ok = ok && rational_zero_test(differentiate(e, "t") - differentiate(e, "x", 2)) == std::optional<bool>(true);
    }
    add_row(rows, "heat polynomials", "u_0..u_10", ok, "u_t = u_xx exactly");
  });
  guarded(rows, "heat polynomials", "biorthogonality", [&] {
    double worst = 0.0;
    for (int m = 0; m <= 5; ++m)
      for (int n = 0; n <= 5; ++n) {
        const double scale = std::pow(2.0, n) * std::tgamma(n + 1.0);
        worst = std::max(worst, std::abs(biorthogonality(m, n) - (m == n ? scale : 0.0)) / scale);
      }
    add_row(rows, "heat polynomials", "biorthogonality", worst <= 1e-6, "worst relative " + fixed(worst));
  });
  guarded(rows, "solutions", "invariant solutions", [&] {
    bool ok = true;
    double worst = 0.0;
    for (const auto& c : invariant_solution_checks()) {
      ok = ok && c.ok();
      worst = std::max(worst, c.residual);
    }
    add_row(rows, "solutions", "invariant solutions", ok, "worst residual " + fixed(worst));
  });
}

}  // namespace

std::vector<SelftestRow> run_selftest(const SelftestOptions& opt) {
  std::vector<SelftestRow> rows;
  corpus_rows(opt.corpus_dir, rows);
  family_rows(rows);
  kernel_rows(opt, rows);
  polynomial_rows(rows);
  return rows;
}

std::string selftest_matrix(const std::vector<SelftestRow>& rows) {
  std::size_t gw = 5, nw = 4;
  for (const auto& r : rows) {
    gw = std::max(gw, r.group.size());
    nw = std::max(nw, r.name.size());
  }
  std::ostringstream ss;
  int failed = 0;
  for (const auto& r : rows) {
    ss << std::left << std::setw(static_cast<int>(gw) + 2) << r.group << std::setw(static_cast<int>(nw) + 2) << r.name
       << (r.passed ? "PASS  " : "FAIL  ") << r.detail << "\n";
    failed += r.passed ? 0 : 1;
  }
  ss << rows.size() - failed << "/" << rows.size() << " passed\n";
  return ss.str();
}

}  // namespace lps
