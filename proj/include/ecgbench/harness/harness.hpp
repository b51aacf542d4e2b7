#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ecgbench/benchgen/benchgen.hpp"

namespace ecgbench {

struct Message {
  std::string role;  // system, user, assistant
  std::string content;
  std::string image_png_base64;  // optional inline image for user messages
};

struct ChatRequest {
  const std::vector<Message>* messages = nullptr;
  const BenchmarkCase* bench_case = nullptr;
  const Turn* turn = nullptr;
  std::size_t turn_index = 0;
  bool gt_rda = false;
};

/// Anything that answers a conversation: an HTTP endpoint or a scripted mock.
class ChatModel {
 public:
  virtual ~ChatModel() = default;
  /// Throws EndpointError when no reply could be obtained.
  virtual std::string reply(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// ---------------------------------------------------------------------------
// HTTP endpoint

struct ModelEndpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string auth_header = "Authorization";
  std::string auth_value;
  std::string model;
  double timeout_s = 120.0;
  int max_retries = 3;
  double temperature = 0.0;  // always sent as 0
  double min_interval_s = 0.0;  // shared spacing between requests
};

/// Fills base_url / auth / model from ECGBENCH_BASE_URL, ECGBENCH_API_KEY and
/// ECGBENCH_MODEL where the fields are empty.
void apply_endpoint_env(ModelEndpoint& endpoint);

/// OpenAI-style chat completion body.
std::string chat_request_body(const ModelEndpoint& endpoint, const std::vector<Message>& messages);
/// Content of the first assistant message in a chat completion response.
std::string parse_chat_response(const std::string& body);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

/// Spaces requests from many threads at least `interval` apart.
class RateLimiter {
 public:
  explicit RateLimiter(double interval_s) : interval_(interval_s) {}
  void acquire();

 private:
  double interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

class HttpChatModel : public ChatModel {
 public:
  explicit HttpChatModel(ModelEndpoint endpoint);
  std::string reply(const ChatRequest& request) override;
  std::string describe() const override;

 private:
  ModelEndpoint endpoint_;
  RateLimiter limiter_;
};

// ---------------------------------------------------------------------------
// Mocks: perfect, wrong, random:<seed>, script:<path>

class PerfectModel : public ChatModel {
 public:
  std::string reply(const ChatRequest& request) override;
  std::string describe() const override { return "mock:perfect"; }
};

class WrongModel : public ChatModel {
 public:
  std::string reply(const ChatRequest& request) override;
  std::string describe() const override { return "mock:wrong"; }
};

/// Uniform choice among the options (or yes/no), seeded per case and turn.
class RandomModel : public ChatModel {
 public:
  explicit RandomModel(std::uint64_t seed) : seed_(seed) {}
  std::string reply(const ChatRequest& request) override;
  std::string describe() const override;

 private:
  std::uint64_t seed_;
};

/// Scripted answers. JSON object:
///   {"default": "correct"|"wrong",
///    "initial": "correct"|"wrong", "gt_rda": "correct"|"wrong",
///    "rules": [{"case": id|"*", "diagnosis": id, "loop": n, "step": STEP,
///               "sub": n, "answer": "correct"|"wrong"|<literal reply>}]}
/// The first matching rule wins; omitted rule fields match anything. `sub`
/// counts turns of the same step inside a loop.
class ScriptedModel : public ChatModel {
 public:
  explicit ScriptedModel(const std::string& json_text);
  static ScriptedModel load(const std::filesystem::path& path);
  std::string reply(const ChatRequest& request) override;
  std::string describe() const override { return "mock:script"; }

 private:
  struct Rule {
    std::optional<std::string> case_id;
    std::optional<std::string> diagnosis;
    std::optional<int> loop;
    std::optional<Step> step;
    std::optional<int> sub;
    std::string answer;
  };
  std::string default_ = "correct";
  std::string initial_;
  std::string gt_rda_;
  std::vector<Rule> rules_;
};

/// A deliberately wrong reply for `turn`.
std::string wrong_answer(const Turn& turn);

/// "perfect", "wrong", "random:<seed>" or "script:<path>".
std::unique_ptr<ChatModel> make_mock(const std::string& spec);

// ---------------------------------------------------------------------------
// Verification

enum class VerifierKind { NormalizedChoice, ExternalJudge };

std::string_view verifier_kind_name(VerifierKind k);

struct Verdict {
  bool correct = false;
  bool ambiguous = false;  // reply named several options
};

/// Case-folded, punctuation-free, whitespace-collapsed text.
std::string normalize_reply(const std::string& text);

/// Offline matcher: option letter, option text, or both; yes/no tokens.
Verdict match_choice(const std::string& reply, const Turn& turn);

struct JudgeEndpoint {
  std::string base_url;
  std::string path = "/judge";
  std::string auth_header = "Authorization";
  std::string auth_value;
  double timeout_s = 60.0;
};

class Verifier {
 public:
  Verifier() = default;
  explicit Verifier(JudgeEndpoint judge);
  VerifierKind kind() const { return kind_; }
  /// Throws VerifierError when the judge cannot be reached or answers malformed.
  Verdict verify(const std::string& reply, const Turn& turn) const;

 private:
  VerifierKind kind_ = VerifierKind::NormalizedChoice;
  JudgeEndpoint judge_;
};

bool verify_answer(const std::string& reply, const Turn& turn, const Verifier& verifier);

// ---------------------------------------------------------------------------
// Sessions

struct TurnRecord {
  std::size_t turn_index = 0;
  Step step = Step::Initial;
  std::optional<int> loop;
  std::string prompt;
  std::string reply;
  bool correct = false;
  bool ambiguous = false;
  std::string verifier;
  int gt_loops_in_history = 0;  // loops replaced by ground truth before this turn
};

struct LoopScore {
  std::string finding_id;
  int grounding_n = 0;
  int grounding_correct = 0;
  double depth = 0.0;
};

struct SessionTranscript {
  std::string case_id;
  std::string diagnosis_id;
  std::string model;
  std::vector<TurnRecord> turns;
  std::vector<LoopScore> loops;
  bool initial_correct = false;
  bool completion_clean = false;
  bool gt_rda_correct = false;
  std::string gt_rda_prompt;
  std::string gt_rda_reply;
  bool failed = false;
  std::string error;
};

struct SessionOptions {
  const Templates* templates = nullptr;  // null uses the default templates
  std::string system_prompt;
  bool attach_image = false;  // inline the rendered record with the first question
};

std::string default_system_prompt();

/// Depth of one loop from its step outcomes; `grounding` holds the sub-task results.
double loop_depth(bool step1, bool step2, const std::vector<bool>& grounding, bool step4);

SessionTranscript run_session(const BenchmarkCase& c, ChatModel& model, const Verifier& verifier,
                              const SessionOptions& options = {});

std::string transcript_to_json(const SessionTranscript& t);
SessionTranscript transcript_from_json(const std::string& line);
std::vector<SessionTranscript> read_transcripts(const std::filesystem::path& path);
void append_transcripts(const std::vector<SessionTranscript>& ts, const std::filesystem::path& path);

struct EvaluationOptions {
  std::size_t jobs = 1;
  std::filesystem::path transcripts_path;  // empty keeps transcripts in memory only
  bool resume = true;
};

/// Runs every case (skipping those already in the transcript file when
/// resuming) and returns transcripts in case order.
std::vector<SessionTranscript> evaluate_cases(const std::vector<BenchmarkCase>& cases,
                                              ChatModel& model, const Verifier& verifier,
                                              const SessionOptions& session,
                                              const EvaluationOptions& options);

// ---------------------------------------------------------------------------
// Metrics

struct MetricsBlock {
  std::size_t sessions = 0;
  std::size_t loops = 0;
  double ida = 0.0;                      // %
  double completion = 0.0;               // %, loop turns only
  double completion_with_initial = 0.0;  // %, INITIAL counted as well
  double depth = 0.0;                    // 0..4, micro-average over loops
  double gt_rda = 0.0;                   // %
  std::size_t choice_turns = 0;
  double choice_accuracy = 0.0;  // % of multiple-choice turns answered correctly
  std::size_t yes_no_turns = 0;
  double yes_no_accuracy = 0.0;
  std::size_t ambiguous_replies = 0;
};

struct MetricsReport {
  MetricsBlock overall;
  std::map<std::string, MetricsBlock> per_diagnosis;
  std::size_t failed_sessions = 0;
};

/// Throws EmptyInput when no completed transcript is given.
MetricsReport compute_metrics(const std::vector<SessionTranscript>& transcripts);
std::string metrics_to_json(const MetricsReport& report);
std::string format_metrics_table(const MetricsReport& report);

}  // namespace ecgbench
