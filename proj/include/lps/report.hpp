#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lps/kernels.hpp"
#include "lps/parser.hpp"

namespace lps {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 0x5eed1234ULL;
const char* tool_version();

struct AnalyzeOptions {
  double tol_classify = 1e-7;
  double tol_residual = 1e-6;  // pullback residual of the transform
  double tol_determining = 1e-8;
  int grid = 21;
  bool require_nontrivial = false;
  std::uint64_t seed = kDefaultSeed;
};

struct AnalysisReport {
  nlohmann::ordered_json doc;
  int dim = 2;
  bool verified = true;  // every residual within tolerance
  std::vector<std::string> warnings;
  int exit_code = 0;

  std::string text() const;
};

// {"text": ..., "sexpr": ...}
nlohmann::ordered_json expr_json(const Expr& e);

// Full pipeline on an equation file. Upstream errors propagate.
AnalysisReport analyze_source(const std::string& source, const std::string& path, const AnalyzeOptions& opt = {});
AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& opt = {});

// Error message with file, line and column where known.
std::string describe_error(const std::exception& e, const std::string& path);

nlohmann::ordered_json kernel_report_json(const KernelEntry& e, const KernelReport& r);
nlohmann::ordered_json heat_2d_json(const Heat2dResolution& r);
std::string kernel_report_text(const KernelEntry& e, const KernelReport& r);

struct SelftestRow {
  std::string group;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::string corpus_dir;
  // Kernel entries whose potential sign is flipped before verification.
  std::vector<std::string> sign_flips;
};

std::vector<SelftestRow> run_selftest(const SelftestOptions& opt);
std::string selftest_matrix(const std::vector<SelftestRow>& rows);

}  // namespace lps
