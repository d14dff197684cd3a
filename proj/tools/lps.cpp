#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "lps/errors.hpp"
#include "lps/kernels.hpp"
#include "lps/report.hpp"

using json = nlohmann::ordered_json;

namespace {

// --name value or --name=value pairs left over by the parser.
lps::Bindings constant_flags(const std::vector<std::string>& extra) {
  lps::Bindings out;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    std::string arg = extra[i];
    if (arg.rfind("--", 0) != 0) throw lps::Error("unexpected argument '" + arg + "'");
    arg = arg.substr(2);
    std::string value;
    if (auto eq = arg.find('='); eq != std::string::npos) {
      value = arg.substr(eq + 1);
      arg = arg.substr(0, eq);
    } else {
      if (i + 1 >= extra.size()) throw lps::Error("missing value for --" + arg);
      value = extra[++i];
    }
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw lps::Error("bad value '" + value + "' for --" + arg);
    out[arg] = v;
  }
  return out;
}

int run_analyze(const std::string& path, const lps::AnalyzeOptions& opt, bool as_json) {
  try {
    lps::AnalysisReport r = lps::analyze_file(path, opt);
    if (as_json) {
      std::cout << r.doc.dump(2) << "\n";
    } else {
      std::cout << r.text();
    }
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << lps::describe_error(e, path) << "\n";
    return 1;
  }
}

int run_kernels_list(bool as_json) {
  json list = json::array();
  for (const auto& n : lps::kernel_names()) {
    lps::KernelEntry e = lps::kernel(n);
    if (as_json) {
      list.push_back({{"name", n}, {"equation", e.equation.text()}, {"kernel", lps::expr_json(e.K)}, {"validity", e.validity}});
    } else {
      std::cout << n << "\n  " << e.equation.text() << "\n  valid: " << e.validity << "\n";
    }
  }
  if (as_json) std::cout << json{{"schema_version", lps::kSchemaVersion}, {"kernels", list}}.dump(2) << "\n";
  return 0;
}

int run_kernels_verify(const std::string& name, const std::vector<std::string>& extra, bool as_json) {
  try {
    lps::KernelEntry e = lps::kernel(name, constant_flags(extra));
    lps::KernelReport r = lps::verify_entry(e);
    std::optional<lps::Heat2dResolution> res;
    if (name == "heat_2d_timedep") res = lps::resolve_heat_2d(e.constants);
    if (as_json) {
      json j = lps::kernel_report_json(e, r);
      j["factor_resolution"] = res ? lps::heat_2d_json(*res) : json(nullptr);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << lps::kernel_report_text(e, r);
      if (res)
        std::cout << "  factor 4 variant: " << (res->with_four.passes() ? "passes" : "fails")
                  << "; variant without it: " << (res->without_four.passes() ? "passes" : "fails") << "\n";
    }
    return r.ok() ? 0 : 1;
  } catch (const lps::UnknownKernel& e) {
    std::cerr << "error: UnknownKernel: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_selftest(const lps::SelftestOptions& opt, bool as_json) {
  try {
    auto rows = lps::run_selftest(opt);
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.passed;
    if (as_json) {
      json list = json::array();
      for (const auto& r : rows) list.push_back({{"group", r.group}, {"name", r.name}, {"pass", r.passed}, {"detail", r.detail}});
      std::cout << json{{"schema_version", lps::kSchemaVersion}, {"rows", list}, {"pass", ok}}.dump(2) << "\n";
    } else {
      std::cout << lps::selftest_matrix(rows);
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie point symmetries and heat kernels of linear parabolic equations"};
  app.set_version_flag("--version", lps::tool_version());
  app.require_subcommand(1);

  lps::AnalyzeOptions aopt;
  std::string path;
  bool json_out = false;
  auto* analyze = app.add_subcommand("analyze", "Invariants, classification, transform and generators of an equation file");
  analyze->add_option("file", path, "Equation file")->required();
  analyze->add_option("--tol-classify", aopt.tol_classify, "Classification fit tolerance")->capture_default_str();
  analyze->add_option("--tol-residual", aopt.tol_residual, "Pullback residual tolerance")->capture_default_str();
  analyze->add_option("--grid", aopt.grid, "Points per axis of the residual grid")->capture_default_str()->check(CLI::Range(5, 401));
  analyze->add_flag("--require-nontrivial", aopt.require_nontrivial, "Exit 2 when only the trivial symmetries exist");
  analyze->add_option("--seed", aopt.seed, "Seed for randomized sampling")->capture_default_str();
  analyze->add_flag("--json", json_out, "Emit the JSON report");

  auto* kernels = app.add_subcommand("kernels", "Fundamental-solution catalog");
  kernels->require_subcommand(1);
  bool kjson = false;
  auto* list = kernels->add_subcommand("list", "List catalog entries");
  list->add_flag("--json", kjson, "Emit JSON");
  std::string kname;
  auto* verify = kernels->add_subcommand("verify", "Verify one entry; constants as --name value");
  verify->add_option("name", kname, "Entry name")->required();
  verify->add_flag("--json", kjson, "Emit the JSON report");
  verify->allow_extras();

  lps::SelftestOptions sopt;
#ifdef LPS_CORPUS_DIR
  sopt.corpus_dir = LPS_CORPUS_DIR;
#endif
  bool sjson = false;
  auto* selftest = app.add_subcommand("selftest", "Run the golden corpus and print a pass/fail matrix");
  selftest->add_option("--corpus", sopt.corpus_dir, "Directory of *.eq files")->capture_default_str();
  selftest->add_option("--flip-sign", sopt.sign_flips, "Flip the potential sign of a kernel entry (mutation check)");
  selftest->add_flag("--json", sjson, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*analyze) return run_analyze(path, aopt, json_out);
  if (*list) return run_kernels_list(kjson);
  if (*verify) return run_kernels_verify(kname, verify->remaining(), kjson);
  if (*selftest) return run_selftest(sopt, sjson);
  return 1;
}
