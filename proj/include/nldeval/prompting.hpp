#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nldeval/corpus.hpp"

namespace nldeval {

enum class PromptStyle {
    SystemRoleBased,
    ZeroShotInstruction,
    FewShotTask,
    SystemMessageChat,
    DeveloperToolInstruction,
    ConciseOneLine,
};

struct StyleInfo {
    PromptStyle style;
    std::string name;       // config token, e.g. "concise_one_line"
    std::string task_text;  // the NLD task description for this style
};

// The six prompt styles, in table order.
const std::vector<StyleInfo>& list_styles();
const StyleInfo& style_info(PromptStyle style);
std::optional<PromptStyle> parse_style(const std::string& name);

enum class GuidanceCategory { TaskClarity, PromptQuality };

struct GuidancePoint {
    std::string text;
    GuidanceCategory category;
};

// The built-in guidance set: 8 points, 4 per category.
const std::vector<GuidancePoint>& builtin_guidance();

struct ChatMessage {
    std::string role;  // "system" or "user"
    std::string content;
};

struct PromptBundle {
    PromptStyle style = PromptStyle::SystemRoleBased;
    std::vector<GuidancePoint> guidance;
    std::vector<ChatMessage> messages;
    std::string content_hash;  // stable digest of the rendered messages
};

// Built-in exemplar pairs for the few-shot style; overridable via
// load_exemplars() on a corpus-format file.
const std::vector<CodeExample>& default_exemplars();
std::vector<CodeExample> load_exemplars(const std::string& path);

// System message = style task text + optional "Guidance:" block; user message =
// fenced code (preceded by exemplars for the few-shot style). Pure function of
// its inputs.
PromptBundle build_generator_prompt(PromptStyle style,
                                    const std::vector<GuidancePoint>& guidance,
                                    const CodeExample& ex,
                                    const std::vector<CodeExample>* exemplars = nullptr);

// Second pipeline stage: asks the model to rewrite `draft` against the code.
// When the generator used the concise one-line style, the one-line/50-word
// constraint is restated. Throws EmptyDraftError.
PromptBundle build_refiner_prompt(const CodeExample& ex, const std::string& draft,
                                  std::optional<PromptStyle> generator_style = std::nullopt);

// Mechanically checkable compliance only: non-empty output, the 50-word cap when
// that guidance point is active, single line under the concise one-line style.
std::vector<std::string> check_guidance_compliance(
    const std::string& text, const std::vector<GuidancePoint>& guidance,
    std::optional<PromptStyle> style = std::nullopt);

}  // namespace nldeval
