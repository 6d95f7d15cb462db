#pragma once

#include "agetrack/fact_graph.hpp"
#include "agetrack/prompts.hpp"
#include "agetrack/sentinel.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

enum class MemoryKind { empty, blob, entries, workspace };
enum class PolicyKind { no_memory, append_only, growing_history, lossy_compress, careful_compress, workspace };

std::string to_string(MemoryKind k);
std::string to_string(PolicyKind k);
MemoryKind memory_kind_from_string(std::string_view s);
PolicyKind policy_kind_from_string(std::string_view s);

// Storage shape a policy keeps its memory in.
MemoryKind memory_kind_for(PolicyKind p);
bool is_blob_policy(PolicyKind p);

struct MemoryEntry {
  int session = 0;
  std::string text;

  friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

// M_t. Only the fields of `kind` are populated; the sidecar is independent of
// the kind and exists once the overlay has seen its first effect.
struct MemoryState {
  MemoryKind kind = MemoryKind::empty;
  std::string blob;
  std::vector<MemoryEntry> entries;  // sorted by session
  std::map<std::string, std::string> files;
  std::optional<Sidecar> sidecar;

  // Everything the store holds as one text, in store order: sidecar lines,
  // then blob / entries oldest first / files by name.
  std::string serialize_text() const;
  std::size_t word_count() const;

  // Throws ValidationError when a field outside the kind is populated or the
  // entries are out of order.
  void check() const;

  Json to_json() const;
  static MemoryState from_json(const Json& j);

  friend bool operator==(const MemoryState&, const MemoryState&) = default;
};

struct PolicyConfig {
  PolicyKind policy = PolicyKind::growing_history;
  int word_budget = 200;
  int retrieval_k = 5;
  bool overlay_enabled = false;

  // Throws ConfigError.
  void validate() const;
  Json to_json() const;
  static PolicyConfig from_json(const Json& j);

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

// Compaction prompt a blob policy sends to its summarizer.
PromptKind prompt_kind_for(PolicyKind p);

MemoryState initial_state(const PolicyConfig& config);

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual std::string name() const = 0;
  // Throws BackendError when the backend fails.
  virtual std::string summarize(std::string_view source, int word_budget, PromptKind kind) = 0;
};

// First `word_budget` words.
class TruncatingSummarizer final : public Summarizer {
 public:
  std::string name() const override { return "truncating"; }
  std::string summarize(std::string_view source, int word_budget, PromptKind kind) override;
};

// Keeps, in order, sentences that carry a digit or a capitalized two-word
// name, stopping at the first one that would overflow the budget.
class ExtractiveSummarizer final : public Summarizer {
 public:
  std::string name() const override { return "extractive"; }
  std::string summarize(std::string_view source, int word_budget, PromptKind kind) override;
};

// Runs the wrapped summarizer and logs outputs longer than budget + 10%.
std::string checked_summarize(Summarizer& summarizer, std::string_view source, int word_budget, PromptKind kind);

// M_{t+1} = U(M_t, H_t). Returns the new state; on a summarizer failure the
// BackendError propagates and the caller keeps the old state. `session`
// labels the append_only entry (defaults to the next index).
MemoryState write_update(const MemoryState& state, std::string_view history, const PolicyConfig& config,
                         Summarizer& summarizer, std::optional<int> session = std::nullopt);

// Working context for a query. With the overlay enabled and a sidecar
// present, the rendered sidecar comes first.
std::string read_context(const MemoryState& state, std::string_view query, const PolicyConfig& config);

// Overlay hook: folds parsed effects into the state's sidecar (created on the
// first effect).
MemoryState overlay_apply(MemoryState state, const std::vector<SentinelEffect>& effects,
                          std::vector<std::string>* warnings = nullptr);

// A file write requested by the agent in its response text:
//   Action: write_file
//   Action Input: {"path": "notes/x.md", "content": "...", "append": true}
struct FileWrite {
  std::string path;
  std::string content;
  bool append = false;
};

// Well-formed write_file actions in order. Paths are normalized into the flat
// notes/ namespace; anything else is dropped with a warning.
std::vector<FileWrite> parse_file_writes(std::string_view text);

}  // namespace agetrack
