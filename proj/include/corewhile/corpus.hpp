#ifndef COREWHILE_CORPUS_HPP
#define COREWHILE_CORPUS_HPP

#include <string>
#include <vector>

namespace corewhile {

struct CorpusExpectation {
  std::string query;
  bool expect_pass;
  std::string note;
};

struct CorpusEntry {
  std::string name;
  std::string text;
  std::vector<CorpusExpectation> expectations;
};

// The bundled models reproducing the running examples and the case study,
// with their expected verdicts.
const std::vector<CorpusEntry>& load_corpus();

// Entry by name; throws when absent.
const CorpusEntry& corpus_entry(const std::string& name);

}  // namespace corewhile

#endif
