#pragma once

#include <string>
#include <string_view>

namespace agetrack {

// plain is the neutral prompt used by growing_history.
enum class PromptKind { careful, lossy, plain };

std::string to_string(PromptKind k);
PromptKind prompt_kind_from_string(std::string_view s);

// Compaction prompt with the document substituted for the single {text}
// placeholder. Braces inside the document are left alone.
std::string render_compaction_prompt(PromptKind kind, std::string_view document);

namespace prompts {

extern const char* const kCarefulCompaction;
extern const char* const kLossyCompaction;
extern const char* const kPlainCompaction;

// ReAct prompt shared by the runner-managed scenarios; carries {tool_descriptions}
// and {memory} placeholders.
extern const char* const kTier1System;
extern const char* const kS6System;
extern const char* const kWorkspaceSystem;

// Fills the Tier-1 placeholders. Prompts without a {memory} slot get the
// memory appended under the same heading.
std::string render_system_prompt(std::string_view templ, std::string_view memory);

}  // namespace prompts

}  // namespace agetrack
