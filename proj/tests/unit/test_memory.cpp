#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/memory.hpp"
#include "agetrack/text.hpp"

#include <gtest/gtest.h>

using namespace agetrack;

namespace {

PolicyConfig config_for(PolicyKind p, int budget = 200, bool overlay = false) {
  PolicyConfig c;
  c.policy = p;
  c.word_budget = budget;
  c.overlay_enabled = overlay;
  return c;
}

class QuietLog : public ::testing::Test {
 protected:
  void SetUp() override { log::set_level(log::Level::off); }
  void TearDown() override { log::set_level(log::Level::warn); }
};

class FixedSummarizer final : public Summarizer {
 public:
  explicit FixedSummarizer(std::string out) : out_(std::move(out)) {}
  std::string name() const override { return "fixed"; }
  std::string summarize(std::string_view, int, PromptKind) override { return out_; }

 private:
  std::string out_;
};

}  // namespace

TEST(Sentinel, ParsesInitAndDelta) {
  const auto p = parse_sentinels("Budget set. [ACCUM_INIT:budget:5000] Spent [ACCUM:budget:-300] today.");
  ASSERT_EQ(p.effects.size(), 2u);
  EXPECT_EQ(p.effects[0], (SentinelEffect{SentinelKind::init, "budget", 5000}));
  EXPECT_EQ(p.effects[1], (SentinelEffect{SentinelKind::delta, "budget", -300}));
  EXPECT_EQ(text::trim(p.text).find("ACCUM"), std::string::npos);
  EXPECT_TRUE(p.warnings.empty());
  EXPECT_EQ(apply_effects({}, p.effects).at("budget"), 4700);
}

TEST(Sentinel, MalformedTokenStaysWithWarning) {
  const auto p = parse_sentinels("oops [ACCUM:budget] here");
  EXPECT_TRUE(p.effects.empty());
  EXPECT_NE(p.text.find("[ACCUM:budget]"), std::string::npos);
  EXPECT_EQ(p.warnings.size(), 1u);
}

TEST(Sentinel, DeltaBeforeInitWarnsButIsKept) {
  const auto p = parse_sentinels("[ACCUM:x:+5] then [ACCUM_INIT:x:10]");
  ASSERT_EQ(p.effects.size(), 2u);
  EXPECT_EQ(p.warnings.size(), 1u);
}

TEST(Sentinel, CompletenessOverRandomSequences) {
  // Parsing the rendered tokens and folding them equals the running sum.
  for (int trial = 0; trial < 40; ++trial) {
    std::string doc = "start [ACCUM_INIT:acc:" + std::to_string(100 + trial) + "]";
    double gold = 100 + trial;
    for (int i = 0; i < 10; ++i) {
      const int d = ((trial * 31 + i * 17) % 241) - 120;
      gold += d;
      doc += " filler text " + std::to_string(i) + " [ACCUM:acc:" + (d >= 0 ? "+" : "") + std::to_string(d) + "]";
    }
    const auto p = parse_sentinels(doc);
    EXPECT_EQ(p.effects.size(), 11u);
    EXPECT_EQ(apply_effects({}, p.effects).at("acc"), gold);
  }
}

TEST_F(QuietLog, DeltaOnUnknownNameIsSkipped) {
  std::vector<std::string> warnings;
  const auto s = apply_effects({}, {{SentinelKind::delta, "ghost", 5}}, &warnings);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Sentinel, RenderSortedLines) {
  EXPECT_EQ(render_sidecar({{"b", 2}, {"a", 4700}}), "a: 4700\nb: 2");
}

TEST(Overlay, ApplyCreatesSidecarOnFirstEffect) {
  MemoryState s = initial_state(config_for(PolicyKind::careful_compress));
  EXPECT_FALSE(overlay_apply(s, {}).sidecar.has_value());
  s = overlay_apply(s, {{SentinelKind::init, "budget", 5000}, {SentinelKind::delta, "budget", -300}});
  ASSERT_TRUE(s.sidecar.has_value());
  EXPECT_EQ(s.sidecar->at("budget"), 4700);
}

TEST(Overlay, ContextPrependsSidecar) {
  auto cfg = config_for(PolicyKind::lossy_compress, 200, true);
  MemoryState s = initial_state(cfg);
  s.blob = "Summary text.";
  s.sidecar = Sidecar{{"budget", 4700}};
  const auto ctx = read_context(s, "what is the budget?", cfg);
  EXPECT_EQ(ctx.rfind("budget: 4700", 0), 0u);
  EXPECT_NE(ctx.find("Summary text."), std::string::npos);
}

TEST(Overlay, TransparentWithoutSentinels) {
  // With no tokens in the text the overlay changes nothing.
  const std::string h = "Session notes: the CDN hit rate is 66.3%. Alice Smith approved it.";
  for (auto p : {PolicyKind::append_only, PolicyKind::growing_history, PolicyKind::lossy_compress,
                 PolicyKind::careful_compress, PolicyKind::workspace, PolicyKind::no_memory}) {
    ExtractiveSummarizer sum;
    const auto off = config_for(p);
    const auto on = config_for(p, 200, true);
    const auto a = write_update(initial_state(off), h, off, sum, 0);
    const auto b = write_update(initial_state(on), h, on, sum, 0);
    EXPECT_EQ(a, b) << to_string(p);
    EXPECT_EQ(read_context(a, "hit rate", off), read_context(b, "hit rate", on)) << to_string(p);
  }
}

TEST(Overlay, StripsTokensBeforeWriting) {
  auto cfg = config_for(PolicyKind::growing_history, 200, true);
  TruncatingSummarizer sum;
  const auto s = write_update(initial_state(cfg), "Init [ACCUM_INIT:budget:5000] then [ACCUM:budget:-300].", cfg, sum);
  EXPECT_EQ(s.blob.find("ACCUM"), std::string::npos);
  EXPECT_EQ(s.sidecar->at("budget"), 4700);
}

TEST(Policies, NoMemoryStaysEmpty) {
  const auto cfg = config_for(PolicyKind::no_memory);
  TruncatingSummarizer sum;
  auto s = initial_state(cfg);
  for (int i = 0; i < 5; ++i) s = write_update(s, "history " + std::to_string(i), cfg, sum);
  EXPECT_EQ(s.kind, MemoryKind::empty);
  EXPECT_EQ(read_context(s, "anything", cfg), "");
}

TEST(Policies, BlobPoliciesStayWithinBudget) {
  std::string long_history;
  for (int i = 0; i < 120; ++i) long_history += "Item " + std::to_string(i) + " costs $" + std::to_string(i * 3) + ". ";
  for (auto p : {PolicyKind::growing_history, PolicyKind::lossy_compress, PolicyKind::careful_compress}) {
    for (int budget : {20, 50, 200}) {
      const auto cfg = config_for(p, budget);
      TruncatingSummarizer trunc;
      ExtractiveSummarizer extr;
      auto a = initial_state(cfg);
      auto b = initial_state(cfg);
      for (int t = 0; t < 4; ++t) {
        a = write_update(a, long_history, cfg, trunc);
        b = write_update(b, long_history, cfg, extr);
        EXPECT_LE(text::word_count(a.blob), static_cast<std::size_t>(budget));
        EXPECT_LE(text::word_count(b.blob), static_cast<std::size_t>(budget));
      }
    }
  }
}

TEST(Policies, BlobFoldsPreviousMemory) {
  const auto cfg = config_for(PolicyKind::growing_history, 100);
  TruncatingSummarizer sum;
  auto s = write_update(initial_state(cfg), "first session", cfg, sum);
  s = write_update(s, "second session", cfg, sum);
  EXPECT_EQ(s.blob, "first session second session");
}

TEST(Policies, PromptKinds) {
  EXPECT_EQ(prompt_kind_for(PolicyKind::careful_compress), PromptKind::careful);
  EXPECT_EQ(prompt_kind_for(PolicyKind::lossy_compress), PromptKind::lossy);
  EXPECT_EQ(prompt_kind_for(PolicyKind::growing_history), PromptKind::plain);
}

TEST(Policies, AppendOnlyRanksByOverlapThenRecency) {
  auto cfg = config_for(PolicyKind::append_only);
  cfg.retrieval_k = 2;
  TruncatingSummarizer sum;
  auto s = initial_state(cfg);
  s = write_update(s, "dinner budget is $309", cfg, sum, 0);
  s = write_update(s, "the cache hit rate is high", cfg, sum, 1);
  s = write_update(s, "dinner at Bella Notte", cfg, sum, 2);
  s = write_update(s, "weather was sunny", cfg, sum, 3);
  ASSERT_EQ(s.entries.size(), 4u);
  EXPECT_EQ(read_context(s, "dinner budget", cfg), "dinner budget is $309\n\ndinner at Bella Notte");
  EXPECT_EQ(read_context(s, "zzz", cfg), "weather was sunny\n\ndinner at Bella Notte");
}

TEST(Policies, WorkspaceWritesFiles) {
  const auto cfg = config_for(PolicyKind::workspace);
  TruncatingSummarizer sum;
  const std::string h =
      "Thought: save it\nAction: write_file\nAction Input: {\"path\": \"notes/budget.md\", \"content\": \"$309\"}\n"
      "Action: write_file\nAction Input: {\"path\": \"budget.md\", \"content\": \"now $222\", \"append\": true}\n";
  const auto s = write_update(initial_state(cfg), h, cfg, sum);
  ASSERT_EQ(s.files.size(), 1u);
  EXPECT_EQ(s.files.at("notes/budget.md"), "$309\nnow $222");
  EXPECT_EQ(read_context(s, "", cfg), "## notes/budget.md\n$309\nnow $222");
}

TEST_F(QuietLog, ParseFileWritesDropsBadInput) {
  const std::string h =
      "Action: write_file\nAction Input: {\"path\": \"../etc/passwd\", \"content\": \"x\"}\n"
      "Action: write_file\nAction Input: {\"path\": \"notes/a.md\"}\n"
      "Action: write_file\nAction Input: {\"path\": \"./notes/b.md\", \"content\": \"{ok}\"}\n";
  const auto w = parse_file_writes(h);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].path, "notes/b.md");
  EXPECT_EQ(w[0].content, "{ok}");
  EXPECT_FALSE(w[0].append);
}

TEST(Policies, KindMismatchIsConfigError) {
  TruncatingSummarizer sum;
  EXPECT_THROW(write_update(initial_state(config_for(PolicyKind::workspace)), "h",
                            config_for(PolicyKind::careful_compress), sum),
               ConfigError);
}

TEST(Policies, SummarizerFailurePropagates) {
  class Failing final : public Summarizer {
   public:
    std::string name() const override { return "failing"; }
    std::string summarize(std::string_view, int, PromptKind) override { throw BackendError("down"); }
  };
  Failing f;
  const auto cfg = config_for(PolicyKind::careful_compress);
  EXPECT_THROW(write_update(initial_state(cfg), "h", cfg, f), BackendError);
}

TEST_F(QuietLog, OverBudgetOutputIsKeptAndWarned) {
  const auto before = log::warning_count();
  FixedSummarizer big("one two three four five six seven eight nine ten eleven twelve");
  EXPECT_EQ(text::word_count(checked_summarize(big, "x", 10, PromptKind::careful)), 12u);
  EXPECT_EQ(log::warning_count(), before + 1);
  EXPECT_EQ(checked_summarize(big, "x", 11, PromptKind::careful), big.summarize("", 0, PromptKind::careful));
  EXPECT_EQ(log::warning_count(), before + 1);
}

TEST(Summarizers, ExtractiveKeepsFactualSentences) {
  ExtractiveSummarizer s;
  const auto out = s.summarize("The weather was nice. Budget is $309. We met Alice Smith. Nothing else.", 50,
                               PromptKind::careful);
  EXPECT_EQ(out, "Budget is $309.\nWe met Alice Smith.");
  EXPECT_EQ(s.summarize("Budget is $309. Dinner cost $87.", 3, PromptKind::careful), "Budget is $309.");
}

TEST(Prompts, CompactionPromptsVerbatim) {
  const auto careful = render_compaction_prompt(PromptKind::careful, "DOC {braces}");
  EXPECT_NE(careful.find("Every specific budget figure"), std::string::npos);
  EXPECT_NE(careful.find("DOC {braces}"), std::string::npos);
  EXPECT_EQ(careful.find("{text}"), std::string::npos);
  const auto lossy = render_compaction_prompt(PromptKind::lossy, "DOC");
  EXPECT_NE(lossy.find("at most 300 words"), std::string::npos);
  EXPECT_NE(lossy.find("Be concise."), std::string::npos);
}

TEST(MemoryStateJson, RoundTripAndCheck) {
  MemoryState s;
  s.kind = MemoryKind::entries;
  s.entries = {{0, "a"}, {2, "b"}};
  s.sidecar = Sidecar{{"budget", 12.5}};
  EXPECT_EQ(MemoryState::from_json(s.to_json()), s);
  EXPECT_NO_THROW(s.check());
  s.blob = "stray";
  EXPECT_THROW(s.check(), ValidationError);
}
