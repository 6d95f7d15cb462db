#include "agetrack/prompts.hpp"

#include "agetrack/errors.hpp"

namespace agetrack {

namespace prompts {

const char* const kCarefulCompaction =
    "You are a project knowledge manager. Below is a project specification document. Rewrite it as a concise "
    "summary. You MUST preserve ALL of the following verbatim:\n"
    "- Every specific budget figure (exact dollar amounts with the $ sign)\n"
    "- Every deadline (exact dates including month and day)\n"
    "- Every named person and their assigned role\n"
    "- Every technical constraint (specific version numbers and technology names)\n"
    "Do not omit any named constraint. Use clear, direct language. Be concise but complete.\n"
    "\n"
    "DOCUMENT:\n"
    "{text}\n"
    "\n"
    "SUMMARY:";

const char* const kLossyCompaction =
    "You are a knowledge manager. Summarize the following project specification into a brief paragraph of at most "
    "300 words. Focus on the most important points. Be concise.\n"
    "\n"
    "DOCUMENT:\n"
    "{text}\n"
    "\n"
    "SUMMARY:";

const char* const kPlainCompaction =
    "Condense the notes below into a running memory for later sessions. Keep names, figures and dates exactly as "
    "written.\n"
    "\n"
    "NOTES:\n"
    "{text}\n"
    "\n"
    "MEMORY:";

const char* const kTier1System =
    "You are a helpful agent that completes tasks step by step.\n"
    "You have access to the following tools:\n"
    "{tool_descriptions}\n"
    "\n"
    "To use a tool, respond with:\n"
    "Thought: <your reasoning>\n"
    "Action: <tool_name>\n"
    "Action Input: <JSON object with tool arguments>\n"
    "\n"
    "When you have a final answer, respond with:\n"
    "Thought: I have completed the task.\n"
    "Final Answer: <your answer>\n"
    "\n"
    "Your memory from previous sessions (may be empty):\n"
    "{memory}";

const char* const kS6System =
    "You are a research analyst assistant. Your job is to analyze data from various platforms (e-commerce "
    "dashboards, mapping services, project management tools), answer questions accurately, and remember findings "
    "for future reference. When answering, be precise with names, numbers, and specific details.";

const char* const kWorkspaceSystem =
    "# Personal Assistant Memory\n"
    "\n"
    "You are a long-running personal assistant. The user will share personal information across many "
    "conversations.\n"
    "\n"
    "IMPORTANT: Save all user preferences, facts, budgets, dates, names, and constraints to files in the `notes/` "
    "directory. Each topic should have its own file (e.g., `notes/dining.md`, `notes/contacts.md`).\n"
    "\n"
    "At the start of each conversation, read your notes to recall prior context.";

namespace {

constexpr std::string_view kNoTools = "(none: answer directly with a Final Answer)";
constexpr std::string_view kMemoryHeading = "Your memory from previous sessions (may be empty):\n";

std::string replace_once(std::string s, std::string_view key, std::string_view value) {
  const auto pos = s.find(key);
  if (pos != std::string::npos) s.replace(pos, key.size(), value);
  return s;
}

}  // namespace

std::string render_system_prompt(std::string_view templ, std::string_view memory) {
  std::string s(templ);
  if (s.find("{memory}") == std::string::npos) {
    s += "\n\n";
    s += kMemoryHeading;
    s += memory;
    return s;
  }
  // Tools first so a literal "{tool_descriptions}" inside the memory survives.
  s = replace_once(std::move(s), "{tool_descriptions}", kNoTools);
  return replace_once(std::move(s), "{memory}", memory);
}

}  // namespace prompts

std::string to_string(PromptKind k) {
  switch (k) {
    case PromptKind::careful:
      return "careful";
    case PromptKind::lossy:
      return "lossy";
    case PromptKind::plain:
      break;
  }
  return "plain";
}

PromptKind prompt_kind_from_string(std::string_view s) {
  if (s == "careful") return PromptKind::careful;
  if (s == "lossy") return PromptKind::lossy;
  if (s == "plain") return PromptKind::plain;
  throw ConfigError("unknown prompt kind '" + std::string(s) + "'");
}

std::string render_compaction_prompt(PromptKind kind, std::string_view document) {
  std::string templ = kind == PromptKind::careful ? prompts::kCarefulCompaction
                      : kind == PromptKind::lossy ? prompts::kLossyCompaction
                                                  : prompts::kPlainCompaction;
  const auto pos = templ.find("{text}");
  templ.replace(pos, 6, document);
  return templ;
}

}  // namespace agetrack
