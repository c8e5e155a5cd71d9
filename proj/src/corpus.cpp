#include "nldeval/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "nldeval/hash.hpp"
#include "nldeval/metrics.hpp"

namespace nldeval {

using nlohmann::json;

std::optional<Lang> parse_lang(const std::string& token) {
    std::string t;
    t.reserve(token.size());
    for (char c : token) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "c") return Lang::C;
    if (t == "cpp" || t == "c++") return Lang::Cpp;
    return std::nullopt;
}

const char* lang_name(Lang lang) { return lang == Lang::C ? "c" : "cpp"; }

namespace {

bool all_whitespace(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

CodeExample example_from_json(const json& j, size_t line_no) {
    for (const char* key : {"id", "lang", "code", "reference"}) {
        if (!j.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"", line_no);
        if (!j[key].is_string())
            throw ParseError(std::string("key \"") + key + "\" must be a string", line_no);
    }
    CodeExample ex;
    ex.id = j["id"].get<std::string>();
    ex.lang_token = j["lang"].get<std::string>();
    ex.code = j["code"].get<std::string>();
    ex.reference = j["reference"].get<std::string>();
    if (auto lang = parse_lang(ex.lang_token)) ex.lang = *lang;
    if (j.contains("tags")) {
        if (!j["tags"].is_array()) throw ParseError("key \"tags\" must be an array", line_no);
        for (const auto& t : j["tags"]) {
            if (!t.is_string()) throw ParseError("tags entries must be strings", line_no);
            ex.tags.push_back(t.get<std::string>());
        }
    }
    return ex;
}

json example_to_json(const CodeExample& ex) {
    json j;
    j["id"] = ex.id;
    j["lang"] = ex.lang_token.empty() ? lang_name(ex.lang) : ex.lang_token;
    j["code"] = ex.code;
    j["reference"] = ex.reference;
    if (!ex.tags.empty()) j["tags"] = ex.tags;
    return j;
}

}  // namespace

ValidationResult validate_example(const CodeExample& ex) {
    ValidationResult res;
    if (ex.id.empty()) res.violations.push_back("id empty");
    if (ex.code.empty() || all_whitespace(ex.code)) res.violations.push_back("code empty");
    if (ex.reference.empty() || all_whitespace(ex.reference))
        res.violations.push_back("reference empty");
    if (!ex.lang_token.empty() && !parse_lang(ex.lang_token))
        res.violations.push_back("unknown lang \"" + ex.lang_token + "\"");
    return res;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);

    Corpus corpus;
    corpus.source_path = path;
    std::unordered_map<std::string, size_t> seen;  // id -> first line
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || all_whitespace(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!j.is_object()) throw ParseError("record is not an object", line_no);
        CodeExample ex = example_from_json(j, line_no);
        auto [it, inserted] = seen.emplace(ex.id, line_no);
        if (!inserted) throw DuplicateIdError(ex.id, line_no);
        for (const auto& v : validate_example(ex).violations)
            corpus.warnings.push_back("line " + std::to_string(line_no) + ": " + v);
        corpus.examples.push_back(std::move(ex));
    }
    if (corpus.examples.empty()) corpus.warnings.push_back("corpus is empty");
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write corpus file: " + path);
    for (const auto& ex : corpus.examples) out << example_to_json(ex).dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Corpus sample_corpus(const Corpus& corpus, size_t n, uint64_t seed) {
    if (n > corpus.size())
        throw RangeError("sample size " + std::to_string(n) + " exceeds corpus size " +
                         std::to_string(corpus.size()));
    // Partial Fisher-Yates over the index vector, then restore file order.
    std::vector<size_t> idx(corpus.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    SplitMix64 rng(seed);
    for (size_t i = 0; i < n; ++i) {
        size_t j = i + static_cast<size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());

    Corpus out;
    out.source_path = corpus.source_path;
    out.examples.reserve(n);
    for (size_t i : idx) out.examples.push_back(corpus.examples[i]);
    return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.count = corpus.size();
    size_t total = 0;
    bool first = true;
    for (const auto& ex : corpus.examples) {
        stats.per_lang[lang_name(ex.lang)] += 1;
        size_t words = tokenize(ex.reference).size();
        total += words;
        if (first) {
            stats.reference_words.min = stats.reference_words.max = words;
            first = false;
        } else {
            stats.reference_words.min = std::min(stats.reference_words.min, words);
            stats.reference_words.max = std::max(stats.reference_words.max, words);
        }
    }
    if (stats.count > 0)
        stats.reference_words.mean = static_cast<double>(total) / static_cast<double>(stats.count);
    return stats;
}

std::string corpus_digest(const Corpus& corpus) {
    uint64_t h = fnv1a64("corpus");
    for (const auto& ex : corpus.examples) {
        h = fnv1a64(ex.id, h);
        h = fnv1a64(ex.lang_token, h);
        h = fnv1a64(ex.code, h);
        h = fnv1a64(ex.reference, h);
    }
    return to_hex(h);
}

}  // namespace nldeval
