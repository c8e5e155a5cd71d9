#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nldeval/errors.hpp"

namespace nldeval {

enum class Lang { C, Cpp };

// Accepts "c", "cpp", "c++" case-insensitively.
std::optional<Lang> parse_lang(const std::string& token);
const char* lang_name(Lang lang);

struct CodeExample {
    std::string id;
    std::string lang_token;  // raw token as read; kept so validation can report it
    Lang lang = Lang::C;
    std::string code;
    std::string reference;
    std::vector<std::string> tags;
};

struct Corpus {
    std::vector<CodeExample> examples;
    std::string source_path;
    // One entry per invariant violation found at load time; an empty-but-readable
    // file also produces a warning.
    std::vector<std::string> warnings;

    size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

struct ValidationResult {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Reports every violated invariant, not just the first.
ValidationResult validate_example(const CodeExample& ex);

struct WordLengthStats {
    size_t min = 0;
    double mean = 0.0;
    size_t max = 0;
};

struct CorpusStats {
    size_t count = 0;
    std::map<std::string, size_t> per_lang;
    WordLengthStats reference_words;
};

// One JSON object per line: {"id","lang","code","reference"[,"tags"]}.
// Unknown keys are ignored. Throws IoError / ParseError / DuplicateIdError.
// Records that parse but violate example invariants are loaded with a warning.
Corpus load_corpus(const std::string& path);

void write_corpus(const Corpus& corpus, const std::string& path);

// Deterministic for fixed (corpus, n, seed); preserves file order.
Corpus sample_corpus(const Corpus& corpus, size_t n, uint64_t seed);

CorpusStats corpus_stats(const Corpus& corpus);

// Stable digest over record content; used to stamp run artifacts.
std::string corpus_digest(const Corpus& corpus);

}  // namespace nldeval
