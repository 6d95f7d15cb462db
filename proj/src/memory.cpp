#include "agetrack/memory.hpp"

#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <algorithm>
#include <set>

namespace agetrack {

using detail::get;
using detail::get_or;

std::string to_string(MemoryKind k) {
  switch (k) {
    case MemoryKind::empty:
      return "empty";
    case MemoryKind::blob:
      return "blob";
    case MemoryKind::entries:
      return "entries";
    case MemoryKind::workspace:
      break;
  }
  return "workspace";
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::no_memory:
      return "no_memory";
    case PolicyKind::append_only:
      return "append_only";
    case PolicyKind::growing_history:
      return "growing_history";
    case PolicyKind::lossy_compress:
      return "lossy_compress";
    case PolicyKind::careful_compress:
      return "careful_compress";
    case PolicyKind::workspace:
      break;
  }
  return "workspace";
}

MemoryKind memory_kind_from_string(std::string_view s) {
  for (auto k : {MemoryKind::empty, MemoryKind::blob, MemoryKind::entries, MemoryKind::workspace}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown memory kind '" + std::string(s) + "'");
}

PolicyKind policy_kind_from_string(std::string_view s) {
  for (auto k : {PolicyKind::no_memory, PolicyKind::append_only, PolicyKind::growing_history,
                 PolicyKind::lossy_compress, PolicyKind::careful_compress, PolicyKind::workspace}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown memory policy '" + std::string(s) + "'");
}

MemoryKind memory_kind_for(PolicyKind p) {
  switch (p) {
    case PolicyKind::no_memory:
      return MemoryKind::empty;
    case PolicyKind::append_only:
      return MemoryKind::entries;
    case PolicyKind::workspace:
      return MemoryKind::workspace;
    default:
      return MemoryKind::blob;
  }
}

bool is_blob_policy(PolicyKind p) { return memory_kind_for(p) == MemoryKind::blob; }

PromptKind prompt_kind_for(PolicyKind p) {
  if (p == PolicyKind::lossy_compress) return PromptKind::lossy;
  if (p == PolicyKind::careful_compress) return PromptKind::careful;
  return PromptKind::plain;
}

std::string MemoryState::serialize_text() const {
  std::vector<std::string> parts;
  if (sidecar && !sidecar->empty()) parts.push_back(render_sidecar(*sidecar));
  switch (kind) {
    case MemoryKind::empty:
      break;
    case MemoryKind::blob:
      if (!blob.empty()) parts.push_back(blob);
      break;
    case MemoryKind::entries:
      for (const auto& e : entries) parts.push_back(e.text);
      break;
    case MemoryKind::workspace:
      for (const auto& [name, content] : files) parts.push_back(name + "\n" + content);
      break;
  }
  return text::join(parts, "\n\n");
}

std::size_t MemoryState::word_count() const {
  switch (kind) {
    case MemoryKind::blob:
      return text::word_count(blob);
    case MemoryKind::entries: {
      std::size_t n = 0;
      for (const auto& e : entries) n += text::word_count(e.text);
      return n;
    }
    case MemoryKind::workspace: {
      std::size_t n = 0;
      for (const auto& [name, content] : files) n += text::word_count(content);
      return n;
    }
    case MemoryKind::empty:
      break;
  }
  return 0;
}

void MemoryState::check() const {
  if (kind != MemoryKind::blob && !blob.empty()) throw ValidationError("memory: blob set on a " + to_string(kind) + " state");
  if (kind != MemoryKind::entries && !entries.empty()) {
    throw ValidationError("memory: entries set on a " + to_string(kind) + " state");
  }
  if (kind != MemoryKind::workspace && !files.empty()) {
    throw ValidationError("memory: files set on a " + to_string(kind) + " state");
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].session < entries[i - 1].session) throw ValidationError("memory: entries out of session order");
  }
}

Json MemoryState::to_json() const {
  Json j = {{"kind", to_string(kind)}};
  switch (kind) {
    case MemoryKind::blob:
      j["blob"] = blob;
      break;
    case MemoryKind::entries: {
      Json arr = Json::array();
      for (const auto& e : entries) arr.push_back({{"session", e.session}, {"text", e.text}});
      j["entries"] = std::move(arr);
      break;
    }
    case MemoryKind::workspace:
      j["files"] = files;
      break;
    case MemoryKind::empty:
      break;
  }
  j["sidecar"] = sidecar ? Json(*sidecar) : Json(nullptr);
  return j;
}

MemoryState MemoryState::from_json(const Json& j) {
  const std::string ctx = "memory";
  MemoryState s;
  s.kind = memory_kind_from_string(get<std::string>(j, "kind", ctx));
  s.blob = get_or<std::string>(j, "blob", "", ctx);
  if (j.contains("entries")) {
    const auto& arr = detail::array_field(j, "entries", ctx);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string ectx = ctx + ".entries[" + std::to_string(i) + "]";
      s.entries.push_back({get<int>(arr[i], "session", ectx), get<std::string>(arr[i], "text", ectx)});
    }
  }
  s.files = get_or<std::map<std::string, std::string>>(j, "files", {}, ctx);
  s.sidecar = detail::get_optional<Sidecar>(j, "sidecar", ctx);
  try {
    s.check();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return s;
}

void PolicyConfig::validate() const {
  if (word_budget < 1) throw ConfigError("policy: word_budget must be >= 1, got " + std::to_string(word_budget));
  if (retrieval_k < 1) throw ConfigError("policy: retrieval_k must be >= 1, got " + std::to_string(retrieval_k));
}

Json PolicyConfig::to_json() const {
  return {{"policy", to_string(policy)},
          {"word_budget", word_budget},
          {"retrieval_k", retrieval_k},
          {"overlay_enabled", overlay_enabled}};
}

PolicyConfig PolicyConfig::from_json(const Json& j) {
  const std::string ctx = "policy";
  PolicyConfig c;
  c.policy = policy_kind_from_string(get_or<std::string>(j, "policy", to_string(c.policy), ctx));
  c.word_budget = get_or<int>(j, "word_budget", c.word_budget, ctx);
  c.retrieval_k = get_or<int>(j, "retrieval_k", c.retrieval_k, ctx);
  c.overlay_enabled = get_or<bool>(j, "overlay_enabled", c.overlay_enabled, ctx);
  c.validate();
  return c;
}

MemoryState initial_state(const PolicyConfig& config) {
  MemoryState s;
  s.kind = memory_kind_for(config.policy);
  return s;
}

std::string TruncatingSummarizer::summarize(std::string_view source, int word_budget, PromptKind) {
  return text::first_words(source, static_cast<std::size_t>(std::max(word_budget, 0)));
}

std::string ExtractiveSummarizer::summarize(std::string_view source, int word_budget, PromptKind) {
  std::vector<std::string> kept;
  std::size_t used = 0;
  for (auto& s : text::split_sentences(source)) {
    if (!text::has_digit(s) && !text::has_capitalized_pair(s)) continue;
    const std::size_t n = text::word_count(s);
    if (used + n > static_cast<std::size_t>(std::max(word_budget, 0))) break;
    used += n;
    kept.push_back(std::move(s));
  }
  return text::join(kept, "\n");
}

std::string checked_summarize(Summarizer& summarizer, std::string_view source, int word_budget, PromptKind kind) {
  std::string out = summarizer.summarize(source, word_budget, kind);
  const auto words = text::word_count(out);
  if (static_cast<double>(words) > 1.1 * word_budget) {
    log::warn("summarizer " + summarizer.name() + ": output has " + std::to_string(words) +
              " words, over the budget of " + std::to_string(word_budget) + " plus 10%");
  }
  return out;
}

MemoryState overlay_apply(MemoryState state, const std::vector<SentinelEffect>& effects,
                          std::vector<std::string>* warnings) {
  if (effects.empty()) return state;
  state.sidecar = apply_effects(state.sidecar.value_or(Sidecar{}), effects, warnings);
  return state;
}

namespace {

// Index one past the brace that closes the object starting at `open`.
std::size_t match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<std::string> normalize_note_path(std::string path) {
  path = text::trim(path);
  if (path.rfind("./", 0) == 0) path.erase(0, 2);
  if (path.rfind("notes/", 0) == 0) path.erase(0, 6);
  if (path.empty() || path.find('/') != std::string::npos || path.find('\\') != std::string::npos ||
      path == "." || path == "..") {
    return std::nullopt;
  }
  return "notes/" + path;
}

}  // namespace

std::vector<FileWrite> parse_file_writes(std::string_view s) {
  std::vector<FileWrite> out;
  static constexpr std::string_view kAction = "Action: write_file";
  static constexpr std::string_view kInput = "Action Input:";
  std::size_t pos = 0;
  while ((pos = s.find(kAction, pos)) != std::string_view::npos) {
    pos += kAction.size();
    const auto in = s.find(kInput, pos);
    if (in == std::string_view::npos) break;
    const auto open = s.find('{', in);
    if (open == std::string_view::npos) break;
    const auto close = match_object(s, open);
    if (close == std::string_view::npos) {
      log::warn("workspace: unterminated Action Input for write_file ignored");
      break;
    }
    pos = close;
    Json j = Json::parse(s.substr(open, close - open), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("path") || !j["path"].is_string() ||
        !j.contains("content") || !j["content"].is_string()) {
      log::warn("workspace: malformed write_file input ignored");
      continue;
    }
    auto path = normalize_note_path(j["path"].get<std::string>());
    if (!path) {
      log::warn("workspace: write_file path '" + j["path"].get<std::string>() + "' is outside notes/; ignored");
      continue;
    }
    const bool append = j.contains("append") && j["append"].is_boolean() && j["append"].get<bool>();
    out.push_back({*path, j["content"].get<std::string>(), append});
  }
  return out;
}

MemoryState write_update(const MemoryState& state, std::string_view history, const PolicyConfig& config,
                         Summarizer& summarizer, std::optional<int> session) {
  if (state.kind != memory_kind_for(config.policy)) {
    throw ConfigError("write_update: state kind " + to_string(state.kind) + " does not match policy " +
                      to_string(config.policy));
  }
  MemoryState next = state;
  std::string h(history);
  if (config.overlay_enabled) {
    auto parsed = parse_sentinels(h);
    next = overlay_apply(std::move(next), parsed.effects);
    h = std::move(parsed.text);
  }

  switch (config.policy) {
    case PolicyKind::no_memory:
      break;
    case PolicyKind::append_only: {
      const int at = session.value_or(next.entries.empty() ? 0 : next.entries.back().session + 1);
      next.entries.push_back({at, h});
      break;
    }
    case PolicyKind::growing_history:
    case PolicyKind::lossy_compress:
    case PolicyKind::careful_compress: {
      const std::string source = next.blob.empty() ? h : next.blob + "\n\n" + h;
      next.blob = checked_summarize(summarizer, source, config.word_budget, prompt_kind_for(config.policy));
      break;
    }
    case PolicyKind::workspace:
      for (const auto& w : parse_file_writes(h)) {
        auto& content = next.files[w.path];
        if (w.append && !content.empty()) {
          content += "\n" + w.content;
        } else {
          content = w.content;
        }
      }
      break;
  }
  return next;
}

namespace {

std::set<std::string> token_set(std::string_view s) {
  auto v = text::content_tokens(s);
  return {v.begin(), v.end()};
}

}  // namespace

std::string read_context(const MemoryState& state, std::string_view query, const PolicyConfig& config) {
  std::string body;
  switch (state.kind) {
    case MemoryKind::empty:
      break;
    case MemoryKind::blob:
      body = state.blob;
      break;
    case MemoryKind::entries: {
      const auto q = token_set(query);
      struct Ranked {
        std::size_t overlap;
        std::size_t index;
      };
      std::vector<Ranked> ranked;
      for (std::size_t i = 0; i < state.entries.size(); ++i) {
        std::size_t overlap = 0;
        for (const auto& tok : token_set(state.entries[i].text)) overlap += q.count(tok);
        ranked.push_back({overlap, i});
      }
      std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        return a.index > b.index;  // newer first
      });
      const auto k = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config.retrieval_k));
      std::vector<std::string> parts;
      for (std::size_t i = 0; i < k; ++i) parts.push_back(state.entries[ranked[i].index].text);
      body = text::join(parts, "\n\n");
      break;
    }
    case MemoryKind::workspace: {
      std::vector<std::string> parts;
      for (const auto& [name, content] : state.files) parts.push_back("## " + name + "\n" + content);
      body = text::join(parts, "\n\n");
      break;
    }
  }
  if (config.overlay_enabled && state.sidecar && !state.sidecar->empty()) {
    const std::string side = render_sidecar(*state.sidecar);
    return body.empty() ? side : side + "\n\n" + body;
  }
  return body;
}

}  // namespace agetrack
