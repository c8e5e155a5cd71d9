#include "nldeval/prompting.hpp"

#include <sstream>

#include "nldeval/hash.hpp"

namespace nldeval {

const std::vector<StyleInfo>& list_styles() {
    static const std::vector<StyleInfo> styles = {
        {PromptStyle::SystemRoleBased, "system_role_based",
         "You are an AI assistant trained to analyze C and C++ code. Your task is to generate a "
         "natural language description that interprets the code’s logic, explains its "
         "purpose, or suggests relevant actions. Focus on producing a clear and purposeful "
         "explanation that reflects deep understanding."},
        {PromptStyle::ZeroShotInstruction, "zero_shot_instruction",
         "Your task is to read the provided C/C++ code and produce a natural language "
         "description. The description should be purposeful, concise, and show an informed "
         "understanding of the code's behavior and intent."},
        {PromptStyle::FewShotTask, "few_shot_task",
         "For each C or C++ code snippet, generate a short explanation or recommendation in "
         "natural language. Your output should abstract away from syntax and emphasize what the "
         "code does and why it matters."},
        {PromptStyle::SystemMessageChat, "system_message_chat",
         "You are a natural language description generator. Given a C or C++ function, produce "
         "a clear and insightful description or recommendation that captures the intent and "
         "behavior of the code."},
        {PromptStyle::DeveloperToolInstruction, "developer_tool_instruction",
         "Act as a smart code interpreter. When given a piece of C or C++ code, provide a "
         "clear, concise natural language summary that reflects what the code does and why "
         "it's written that way."},
        {PromptStyle::ConciseOneLine, "concise_one_line",
         "You are a Natural Language Descriptor (NLD) specialized in analyzing C and C++ "
         "source code. Your task is to generate a concise, one-line natural language "
         "description explaining what the code does."},
    };
    return styles;
}

const StyleInfo& style_info(PromptStyle style) {
    return list_styles()[static_cast<size_t>(style)];
}

std::optional<PromptStyle> parse_style(const std::string& name) {
    for (const auto& s : list_styles())
        if (s.name == name) return s.style;
    return std::nullopt;
}

const std::vector<GuidancePoint>& builtin_guidance() {
    static const std::vector<GuidancePoint> points = {
        {"Focus on the main purpose or effect of the code. Use no more than 50 words.",
         GuidanceCategory::TaskClarity},
        {"Use diverse prompt types. Test different aspects of source code comprehension.",
         GuidanceCategory::TaskClarity},
        {"Standardize prompt formats. Create uniformity to improve evaluation consistency.",
         GuidanceCategory::TaskClarity},
        {"Reflect real-world scenarios in prompts. Make prompts relevant to practical coding "
         "tasks.",
         GuidanceCategory::TaskClarity},
        {"Avoid ambiguous wording. Ensure prompts are precise to reduce misunderstandings.",
         GuidanceCategory::PromptQuality},
        {"Keep prompt length consistent. Maintain fairness and comparability across prompts.",
         GuidanceCategory::PromptQuality},
        {"Specify expected output style. Guide the model on how to format its response.",
         GuidanceCategory::PromptQuality},
        {"Use neutral phrasing to prevent bias. Avoid leading language that influences "
         "answers.",
         GuidanceCategory::PromptQuality},
    };
    return points;
}

namespace {

std::string fence_code(const CodeExample& ex) {
    std::string out = "```";
    out += lang_name(ex.lang);
    out += '\n';
    out += ex.code;
    if (!ex.code.empty() && ex.code.back() != '\n') out += '\n';
    out += "```";
    return out;
}

std::string hash_messages(PromptStyle style, const std::vector<ChatMessage>& messages) {
    uint64_t h = fnv1a64(style_info(style).name);
    for (const auto& m : messages) {
        h = fnv1a64(m.role, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(m.content, h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex(h);
}

constexpr const char* kFiftyWordMarker = "no more than 50 words";

bool fifty_word_rule_active(const std::vector<GuidancePoint>& guidance) {
    for (const auto& g : guidance)
        if (g.text.find(kFiftyWordMarker) != std::string::npos) return true;
    return false;
}

size_t count_words(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    size_t n = 0;
    while (in >> w) ++n;
    return n;
}

}  // namespace

const std::vector<CodeExample>& default_exemplars() {
    static const std::vector<CodeExample> exemplars = {
        {"exemplar-1", "c", Lang::C,
         "int max(int a, int b) {\n    return a > b ? a : b;\n}",
         "Returns the larger of two integers.",
         {}},
        {"exemplar-2", "cpp", Lang::Cpp,
         "void clear(std::vector<int>& v) {\n    v.clear();\n    v.shrink_to_fit();\n}",
         "Empties an integer vector and releases its capacity.",
         {}},
    };
    return exemplars;
}

std::vector<CodeExample> load_exemplars(const std::string& path) {
    return load_corpus(path).examples;
}

PromptBundle build_generator_prompt(PromptStyle style, const std::vector<GuidancePoint>& guidance,
                                    const CodeExample& ex,
                                    const std::vector<CodeExample>* exemplars) {
    PromptBundle bundle;
    bundle.style = style;
    bundle.guidance = guidance;

    std::string system_text = style_info(style).task_text;
    if (!guidance.empty()) {
        system_text += "\n\nGuidance:";
        for (const auto& g : guidance) {
            system_text += "\n- ";
            system_text += g.text;
        }
    }

    std::string user_text;
    if (style == PromptStyle::FewShotTask) {
        const auto& shots = (exemplars && !exemplars->empty()) ? *exemplars : default_exemplars();
        for (const auto& shot : shots) {
            user_text += "Code:\n";
            user_text += fence_code(shot);
            user_text += "\nDescription: ";
            user_text += shot.reference;
            user_text += "\n\n";
        }
        user_text += "Code:\n";
        user_text += fence_code(ex);
        user_text += "\nDescription:";
    } else {
        user_text = fence_code(ex);
    }

    bundle.messages = {{"system", system_text}, {"user", user_text}};
    bundle.content_hash = hash_messages(style, bundle.messages);
    return bundle;
}

PromptBundle build_refiner_prompt(const CodeExample& ex, const std::string& draft,
                                  std::optional<PromptStyle> generator_style) {
    if (draft.empty()) throw EmptyDraftError();

    PromptBundle bundle;
    bundle.style = generator_style.value_or(PromptStyle::ConciseOneLine);

    std::string system_text =
        "You are a careful reviewer of code documentation. Improve the draft description of "
        "the given code: make it clearer, more concise, and more accurate to what the code "
        "actually does. Reply with the revised description only.";
    if (generator_style == PromptStyle::ConciseOneLine)
        system_text += " Keep it to a single line of no more than 50 words.";

    std::string user_text = "Code:\n";
    user_text += fence_code(ex);
    user_text += "\n\nDraft description:\n";
    user_text += draft;

    bundle.messages = {{"system", system_text}, {"user", user_text}};
    bundle.content_hash = hash_messages(bundle.style, bundle.messages);
    return bundle;
}

std::vector<std::string> check_guidance_compliance(const std::string& text,
                                                   const std::vector<GuidancePoint>& guidance,
                                                   std::optional<PromptStyle> style) {
    std::vector<std::string> violations;
    size_t words = count_words(text);
    if (words == 0) {
        violations.push_back("empty output");
        return violations;
    }
    if (fifty_word_rule_active(guidance) && words > 50)
        violations.push_back("word count " + std::to_string(words) + " > 50");
    if (style == PromptStyle::ConciseOneLine) {
        const std::string trimmed = text.substr(text.find_first_not_of(" \t\r\n"));
        const size_t end = trimmed.find_last_not_of(" \t\r\n");
        if (trimmed.substr(0, end + 1).find('\n') != std::string::npos)
            violations.push_back("not one line");
    }
    return violations;
}

}  // namespace nldeval
