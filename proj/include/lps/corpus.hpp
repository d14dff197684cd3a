#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lps/parser.hpp"

namespace lps {

// An equation file with the values its `# expect:` line asserts, e.g.
// `# expect: dim=6 c2=0 c1=0 c0=-1/4 tol=1e-8`. Values are expressions.
struct CorpusEntry {
  std::string name;
  std::string path;
  ParsedProgram program;
  int expect_dim = 0;
  std::map<std::string, double> expect;  // c2, c1, c0, mu
  double tolerance = 1e-7;
};

CorpusEntry load_entry(const std::string& path);

// All *.eq files of a directory, sorted by name.
std::vector<CorpusEntry> load_corpus(const std::string& dir);

}  // namespace lps
