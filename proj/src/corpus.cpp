#include "lps/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lps/errors.hpp"

namespace lps {

CorpusEntry load_entry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  CorpusEntry e;
  e.path = path;
  e.name = std::filesystem::path(path).stem().string();
  e.program = parse(ss.str());
  std::string line;
  std::istringstream lines(ss.str());
  const std::string tag = "# expect:";
  while (std::getline(lines, line)) {
    if (line.rfind(tag, 0) != 0) continue;
    std::istringstream fields(line.substr(tag.size()));
    std::string field;
    while (fields >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw Error(path + ": malformed expectation '" + field + "'");
      std::string key = field.substr(0, eq);
      double value = eval(parse_expression(field.substr(eq + 1), "x", std::set<std::string>{}), {});
      if (key == "dim") {
        e.expect_dim = static_cast<int>(value);
      } else if (key == "tol") {
        e.tolerance = value;
      } else {
        e.expect[key] = value;
      }
    }
  }
  if (e.expect_dim == 0) throw Error(path + ": missing '# expect: dim=...' line");
  return e;
}

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (f.path().extension() == ".eq") paths.push_back(f.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<CorpusEntry> out;
  for (const auto& p : paths) out.push_back(load_entry(p));
  return out;
}

}  // namespace lps
