#include <doctest.h>

#include <algorithm>
#include <string>

#include "nldeval/errors.hpp"
#include "nldeval/prompting.hpp"

using namespace nldeval;

namespace {

CodeExample make_example() {
    CodeExample ex;
    ex.id = "ex-add";
    ex.lang_token = "c";
    ex.lang = Lang::C;
    ex.code = "int add(int a, int b) { return a + b; }";
    ex.reference = "Adds two integers.";
    return ex;
}

}  // namespace

TEST_CASE("six styles in table order with stable config names") {
    const auto& styles = list_styles();
    REQUIRE(styles.size() == 6);
    CHECK(styles[0].name == "system_role_based");
    CHECK(styles[1].name == "zero_shot_instruction");
    CHECK(styles[2].name == "few_shot_task");
    CHECK(styles[3].name == "system_message_chat");
    CHECK(styles[4].name == "developer_tool_instruction");
    CHECK(styles[5].name == "concise_one_line");
    for (size_t i = 0; i < styles.size(); ++i) {
        CHECK(styles[i].style == static_cast<PromptStyle>(i));
        CHECK(style_info(styles[i].style).name == styles[i].name);
        CHECK(parse_style(styles[i].name) == styles[i].style);
    }
    CHECK_FALSE(parse_style("nonsense").has_value());
}

TEST_CASE("style task texts are verbatim") {
    CHECK(style_info(PromptStyle::SystemRoleBased).task_text ==
          "You are an AI assistant trained to analyze C and C++ code. Your task is to generate a "
          "natural language description that interprets the code’s logic, explains its "
          "purpose, or suggests relevant actions. Focus on producing a clear and purposeful "
          "explanation that reflects deep understanding.");
    CHECK(style_info(PromptStyle::ZeroShotInstruction).task_text ==
          "Your task is to read the provided C/C++ code and produce a natural language "
          "description. The description should be purposeful, concise, and show an informed "
          "understanding of the code's behavior and intent.");
    CHECK(style_info(PromptStyle::FewShotTask).task_text ==
          "For each C or C++ code snippet, generate a short explanation or recommendation in "
          "natural language. Your output should abstract away from syntax and emphasize what the "
          "code does and why it matters.");
    CHECK(style_info(PromptStyle::SystemMessageChat).task_text ==
          "You are a natural language description generator. Given a C or C++ function, produce "
          "a clear and insightful description or recommendation that captures the intent and "
          "behavior of the code.");
    CHECK(style_info(PromptStyle::DeveloperToolInstruction).task_text ==
          "Act as a smart code interpreter. When given a piece of C or C++ code, provide a "
          "clear, concise natural language summary that reflects what the code does and why "
          "it's written that way.");
    CHECK(style_info(PromptStyle::ConciseOneLine).task_text ==
          "You are a Natural Language Descriptor (NLD) specialized in analyzing C and C++ "
          "source code. Your task is to generate a concise, one-line natural language "
          "description explaining what the code does.");
}

TEST_CASE("built-in guidance: eight points, four per category") {
    const auto& points = builtin_guidance();
    REQUIRE(points.size() == 8);
    size_t clarity = 0, quality = 0;
    for (const auto& p : points) {
        if (p.category == GuidanceCategory::TaskClarity) ++clarity;
        if (p.category == GuidanceCategory::PromptQuality) ++quality;
    }
    CHECK(clarity == 4);
    CHECK(quality == 4);
    // The word-budget rule is part of the first task-clarity point.
    CHECK(points[0].text.find("Use no more than 50 words.") != std::string::npos);
}

TEST_CASE("generator prompt with full guidance embeds every point") {
    const auto bundle =
        build_generator_prompt(PromptStyle::ZeroShotInstruction, builtin_guidance(), make_example());
    REQUIRE(bundle.messages.size() == 2);
    CHECK(bundle.messages[0].role == "system");
    CHECK(bundle.messages[1].role == "user");
    const std::string& sys = bundle.messages[0].content;
    CHECK(sys.find(style_info(PromptStyle::ZeroShotInstruction).task_text) == 0);
    CHECK(sys.find("Guidance:") != std::string::npos);
    for (const auto& p : builtin_guidance())
        CHECK(sys.find("- " + p.text) != std::string::npos);
    CHECK(sys.find("Use no more than 50 words.") != std::string::npos);
    // User message carries the fenced code.
    CHECK(bundle.messages[1].content.find("```c\n") != std::string::npos);
    CHECK(bundle.messages[1].content.find(make_example().code) != std::string::npos);
}

TEST_CASE("generator prompt with no guidance is the bare task text") {
    const auto bundle = build_generator_prompt(PromptStyle::SystemMessageChat, {}, make_example());
    CHECK(bundle.messages[0].content == style_info(PromptStyle::SystemMessageChat).task_text);
}

TEST_CASE("few-shot user message prepends exemplars and ends with open description") {
    const auto bundle =
        build_generator_prompt(PromptStyle::FewShotTask, builtin_guidance(), make_example());
    const std::string& user = bundle.messages[1].content;
    for (const auto& shot : default_exemplars()) {
        CHECK(user.find(shot.code) != std::string::npos);
        CHECK(user.find("Description: " + shot.reference) != std::string::npos);
    }
    // The query block comes last, with the description left for the model.
    CHECK(user.rfind("Description:") == user.size() - std::string("Description:").size());
    CHECK(user.find(make_example().code) > user.find(default_exemplars().back().code));
}

TEST_CASE("content hash is deterministic and input sensitive") {
    const auto a = build_generator_prompt(PromptStyle::ConciseOneLine, builtin_guidance(), make_example());
    const auto b = build_generator_prompt(PromptStyle::ConciseOneLine, builtin_guidance(), make_example());
    CHECK(a.content_hash == b.content_hash);
    CHECK_FALSE(a.content_hash.empty());

    auto other = make_example();
    other.code += " // tweak";
    const auto c = build_generator_prompt(PromptStyle::ConciseOneLine, builtin_guidance(), other);
    CHECK(a.content_hash != c.content_hash);

    const auto d = build_generator_prompt(PromptStyle::ZeroShotInstruction, builtin_guidance(), make_example());
    CHECK(a.content_hash != d.content_hash);
}

TEST_CASE("refiner prompt contains the code and the draft") {
    const std::string draft = "This function maybe sums numbers.";
    const auto bundle = build_refiner_prompt(make_example(), draft);
    REQUIRE(bundle.messages.size() == 2);
    CHECK(bundle.messages[1].content.find(make_example().code) != std::string::npos);
    CHECK(bundle.messages[1].content.find("Draft description:\n" + draft) != std::string::npos);
    // Without the concise style, no one-line restatement.
    CHECK(bundle.messages[0].content.find("single line") == std::string::npos);

    const auto concise = build_refiner_prompt(make_example(), draft, PromptStyle::ConciseOneLine);
    CHECK(concise.messages[0].content.find("single line of no more than 50 words") !=
          std::string::npos);
}

TEST_CASE("refiner prompt rejects an empty draft") {
    CHECK_THROWS_AS(build_refiner_prompt(make_example(), ""), EmptyDraftError);
}

TEST_CASE("guidance compliance checks") {
    SUBCASE("short single-line output passes") {
        const auto v = check_guidance_compliance("Adds two integers and returns the result.",
                                                 builtin_guidance(), PromptStyle::ConciseOneLine);
        CHECK(v.empty());
    }
    SUBCASE("empty output") {
        const auto v = check_guidance_compliance("   \n ", builtin_guidance());
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "empty output");
    }
    SUBCASE("word budget exceeded") {
        std::string text;
        for (int i = 0; i < 73; ++i) text += "word ";
        const auto v = check_guidance_compliance(text, builtin_guidance());
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "word count 73 > 50");
    }
    SUBCASE("no word budget without that guidance point") {
        std::string text;
        for (int i = 0; i < 73; ++i) text += "word ";
        CHECK(check_guidance_compliance(text, {}).empty());
    }
    SUBCASE("multi-line output under the concise style") {
        const auto v = check_guidance_compliance("First line.\nSecond line.", builtin_guidance(),
                                                 PromptStyle::ConciseOneLine);
        REQUIRE(v.size() == 1);
        CHECK(v[0] == "not one line");
        // Trailing newline alone is tolerated.
        CHECK(check_guidance_compliance("One line.\n", builtin_guidance(),
                                        PromptStyle::ConciseOneLine)
                  .empty());
    }
}
