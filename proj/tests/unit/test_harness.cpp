#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/harness/harness.hpp"
#include "test_util.hpp"

using namespace ecgbench;
using ecgbench::testing::TempDir;

namespace {

BenchmarkCase scenario_case(const std::string& name, std::uint64_t seed = 1) {
  const auto a = analyze_scenario(make_scenario(name, seed), default_catalog(), default_diagrams());
  const CaseContext ctx{default_catalog(), default_diagrams(), default_templates()};
  return build_case(a, a.diagnosis(name.substr(0, name.find('/'))), ctx, seed);
}

const BenchmarkCase& clbbb_case() {
  static const BenchmarkCase c = scenario_case("CLBBB/YYYY");
  return c;
}

Turn options_turn() {
  Turn t;
  t.step = Step::CriterionSelection;
  t.options = {"Normal PR interval", "Prolonged PR interval", "Short PR interval", "Dominant S waves in V1 and V2"};
  t.gt_answer = "Prolonged PR interval";
  return t;
}

Turn yes_no_turn(const std::string& gt) {
  Turn t;
  t.step = Step::FindingIdentification;
  t.gt_answer = gt;
  return t;
}

const char* kWorkedExample = R"({"rules": [
  {"loop": 0, "step": "GROUND_MEASUREMENT", "answer": "wrong"},
  {"loop": 2, "step": "FINDING_IDENTIFICATION", "answer": "wrong"},
  {"loop": 3, "step": "GROUND_LEAD", "answer": "wrong"}
]})";

// Runs a server on an ephemeral port for the lifetime of the object.
struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
  ~LocalServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

std::string completion(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

ModelEndpoint endpoint_for(const LocalServer& s, int retries) {
  ModelEndpoint e;
  e.base_url = s.url();
  e.model = "test-model";
  e.auth_value = "Bearer k";
  e.max_retries = retries;
  e.timeout_s = 5;
  return e;
}

ChatRequest request_for(const std::vector<Message>& msgs, const Turn& t) { return ChatRequest{&msgs, nullptr, &t, 0, false}; }

}  // namespace

TEST(Verifier, NormalizedChoiceMatch) {
  const auto t = options_turn();
  EXPECT_TRUE(match_choice("B) Prolonged PR interval", t).correct);
  EXPECT_TRUE(match_choice("b", t).correct);
  EXPECT_TRUE(match_choice("Prolonged PR interval.", t).correct);
  EXPECT_TRUE(match_choice("(B)", t).correct);
  EXPECT_TRUE(match_choice("The answer is B.", t).correct);
  EXPECT_FALSE(match_choice("A", t).correct);
  EXPECT_FALSE(match_choice("Normal PR interval", t).correct);
  const auto both = match_choice("Either Prolonged PR interval or Normal PR interval", t);
  EXPECT_FALSE(both.correct);
  EXPECT_TRUE(both.ambiguous);
}

TEST(Verifier, YesNo) {
  EXPECT_TRUE(match_choice("Yes.", yes_no_turn("Yes")).correct);
  EXPECT_TRUE(match_choice("no, it is absent", yes_no_turn("No")).correct);
  EXPECT_FALSE(match_choice("Yes", yes_no_turn("No")).correct);
  const auto both = match_choice("It could be present or absent", yes_no_turn("Yes"));
  EXPECT_FALSE(both.correct);
  EXPECT_TRUE(both.ambiguous);
}

TEST(Verifier, Normalize) {
  EXPECT_EQ(normalize_reply("  Hello,   WORLD!! "), "hello world");
  EXPECT_EQ(normalize_reply("-0.5 to 1.5 mV"), "-0.5 to 1.5 mv");
}

TEST(Depth, LoopFormula) {
  EXPECT_DOUBLE_EQ(loop_depth(false, true, {true}, true), 0.0);
  EXPECT_DOUBLE_EQ(loop_depth(true, false, {true}, true), 1.0);
  EXPECT_DOUBLE_EQ(loop_depth(true, true, {true, false}, false), 2.5);
  EXPECT_DOUBLE_EQ(loop_depth(true, true, {true}, true), 4.0);
  EXPECT_DOUBLE_EQ(loop_depth(true, true, {false, false}, false), 2.0);
  EXPECT_DOUBLE_EQ(loop_depth(true, true, {}, true), 4.0);
  EXPECT_DOUBLE_EQ(loop_depth(true, true, {true, true, true}, false), 3.0);
}

TEST(Session, PerfectModel) {
  PerfectModel m;
  const auto t = run_session(clbbb_case(), m, Verifier{});
  ASSERT_FALSE(t.failed) << t.error;
  ASSERT_EQ(t.loops.size(), 4u);
  for (const auto& l : t.loops) EXPECT_DOUBLE_EQ(l.depth, 4.0);
  EXPECT_TRUE(t.initial_correct);
  EXPECT_TRUE(t.completion_clean);
  EXPECT_TRUE(t.gt_rda_correct);
  EXPECT_EQ(t.turns.size(), clbbb_case().turns.size());
}

TEST(Session, WorkedExampleDepths) {
  ScriptedModel m(kWorkedExample);
  const auto t = run_session(clbbb_case(), m, Verifier{});
  ASSERT_FALSE(t.failed) << t.error;
  ASSERT_EQ(t.loops.size(), 4u);
  EXPECT_DOUBLE_EQ(t.loops[0].depth, 2.5);
  EXPECT_DOUBLE_EQ(t.loops[1].depth, 4.0);
  EXPECT_DOUBLE_EQ(t.loops[2].depth, 1.0);
  EXPECT_DOUBLE_EQ(t.loops[3].depth, 2.0);
  EXPECT_FALSE(t.completion_clean);
  EXPECT_TRUE(t.initial_correct);
  EXPECT_TRUE(t.gt_rda_correct);
  const auto report = compute_metrics({t});
  EXPECT_DOUBLE_EQ(report.overall.depth, 2.375);
  EXPECT_DOUBLE_EQ(report.overall.completion, 0.0);
  EXPECT_DOUBLE_EQ(report.overall.ida, 100.0);
}

TEST(Session, FailedStepStopsLoopAndInjectsTruth) {
  ScriptedModel m(R"({"rules": [{"loop": 0, "step": "CRITERION_SELECTION", "answer": "wrong"}]})");
  const auto t = run_session(clbbb_case(), m, Verifier{});
  ASSERT_FALSE(t.failed);
  EXPECT_DOUBLE_EQ(t.loops[0].depth, 0.0);
  int loop0 = 0;
  for (const auto& r : t.turns) {
    if (r.loop == 0) ++loop0;
    if (r.loop == 1) EXPECT_EQ(r.gt_loops_in_history, 1);
  }
  EXPECT_EQ(loop0, 1);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(t.loops[i].depth, 4.0);
}

TEST(Session, HistoryCarriesGroundTruthAfterError) {
  struct Spy : ChatModel {
    std::vector<std::vector<Message>> seen;
    std::string reply(const ChatRequest& r) override {
      seen.push_back(*r.messages);
      if (r.turn->loop == 0 && r.turn->step == Step::FindingIdentification) return wrong_answer(*r.turn);
      return r.turn->gt_answer;
    }
    std::string describe() const override { return "spy"; }
  } spy;
  const auto& c = clbbb_case();
  run_session(c, spy, Verifier{});
  // the first loop-1 request sees loop 0 replayed with ground-truth answers for every turn
  std::size_t loop1_first = 0;
  for (std::size_t i = 0; i < c.turns.size(); ++i) {
    if (c.turns[i].loop == 1) {
      loop1_first = i;
      break;
    }
  }
  const auto& msgs = spy.seen[3];  // INITIAL, loop0 step1, loop0 step2, then loop 1
  ASSERT_EQ(msgs.back().content, c.turns[loop1_first].prompt);
  std::size_t answers = 0;
  for (const auto& m : msgs) {
    for (std::size_t i = 1; i < loop1_first; ++i) {
      if (m.role == "assistant" && m.content == c.turns[i].gt_answer) ++answers;
    }
  }
  EXPECT_GE(answers, loop1_first - 1);
  for (const auto& m : msgs) EXPECT_NE(m.content, wrong_answer(c.turns[2]));
}

TEST(Session, GtRdaPromptHoldsHistory) {
  PerfectModel m;
  const auto& c = clbbb_case();
  const auto t = run_session(c, m, Verifier{});
  EXPECT_NE(t.gt_rda_prompt.find(c.turns[1].prompt), std::string::npos);
  EXPECT_NE(t.gt_rda_prompt.find(c.turns.back().prompt), std::string::npos);
}

TEST(Mocks, WrongAndRandom) {
  WrongModel w;
  const auto tw = run_session(clbbb_case(), w, Verifier{});
  EXPECT_FALSE(tw.initial_correct);
  EXPECT_FALSE(tw.gt_rda_correct);
  for (const auto& l : tw.loops) EXPECT_DOUBLE_EQ(l.depth, 0.0);

  RandomModel r1(7), r2(7);
  EXPECT_EQ(transcript_to_json(run_session(clbbb_case(), r1, Verifier{})),
            transcript_to_json(run_session(clbbb_case(), r2, Verifier{})));
  EXPECT_THROW(make_mock("oracle"), ConfigError);
  EXPECT_EQ(make_mock("random:3")->describe(), RandomModel(3).describe());
}

TEST(Metrics, Extremes) {
  std::vector<BenchmarkCase> cases = {clbbb_case(), scenario_case("1AVB/YN"), scenario_case("1AVB/N")};
  PerfectModel p;
  const auto perfect = compute_metrics(evaluate_cases(cases, p, Verifier{}, {}, {}));
  EXPECT_DOUBLE_EQ(perfect.overall.ida, 100.0);
  EXPECT_DOUBLE_EQ(perfect.overall.completion, 100.0);
  EXPECT_DOUBLE_EQ(perfect.overall.gt_rda, 100.0);
  EXPECT_DOUBLE_EQ(perfect.overall.depth, 4.0);
  EXPECT_EQ(perfect.per_diagnosis.size(), 2u);

  WrongModel w;
  const auto wrong = compute_metrics(evaluate_cases(cases, w, Verifier{}, {}, {}));
  EXPECT_DOUBLE_EQ(wrong.overall.ida, 0.0);
  EXPECT_DOUBLE_EQ(wrong.overall.completion, 0.0);
  EXPECT_DOUBLE_EQ(wrong.overall.gt_rda, 0.0);
  EXPECT_DOUBLE_EQ(wrong.overall.depth, 0.0);

  EXPECT_THROW(compute_metrics({}), EmptyInput);
  SessionTranscript failed;
  failed.failed = true;
  EXPECT_THROW(compute_metrics({failed}), EmptyInput);
}

TEST(Metrics, FailedSessionsExcluded) {
  PerfectModel p;
  auto t = run_session(clbbb_case(), p, Verifier{});
  SessionTranscript failed;
  failed.case_id = "x";
  failed.diagnosis_id = "CLBBB";
  failed.failed = true;
  const auto r = compute_metrics({t, failed});
  EXPECT_EQ(r.failed_sessions, 1u);
  EXPECT_EQ(r.overall.sessions, 1u);
  EXPECT_DOUBLE_EQ(r.overall.depth, 4.0);
  EXPECT_NE(format_metrics_table(r).find("CLBBB"), std::string::npos);
  const auto j = nlohmann::json::parse(metrics_to_json(r));
  EXPECT_EQ(j["failed_sessions"], 1);
}

TEST(Transcripts, RoundTripAndResume) {
  TempDir dir("harness_resume");
  const auto path = dir / "transcripts.jsonl";
  std::vector<BenchmarkCase> cases = {clbbb_case(), scenario_case("1AVB/YN"), scenario_case("2AVB/YN")};

  PerfectModel p;
  const auto first = run_session(cases[0], p, Verifier{});
  EXPECT_EQ(transcript_to_json(transcript_from_json(transcript_to_json(first))), transcript_to_json(first));
  append_transcripts({first}, path);

  struct Counting : ChatModel {
    std::atomic<int> calls{0};
    std::set<std::string> cases;
    std::mutex mu;
    std::string reply(const ChatRequest& r) override {
      ++calls;
      std::lock_guard lock(mu);
      cases.insert(r.bench_case->case_id);
      return r.turn->gt_answer;
    }
    std::string describe() const override { return "mock:perfect"; }
  } counting;
  EvaluationOptions opt;
  opt.transcripts_path = path;
  opt.jobs = 2;
  const auto all = evaluate_cases(cases, counting, Verifier{}, {}, opt);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].case_id, cases[0].case_id);
  EXPECT_EQ(counting.cases.count(cases[0].case_id), 0u);
  EXPECT_EQ(counting.cases.size(), 2u);
  EXPECT_EQ(read_transcripts(path).size(), 3u);

  opt.resume = false;
  const auto fresh = evaluate_cases(cases, counting, Verifier{}, {}, opt);
  EXPECT_EQ(counting.cases.count(cases[0].case_id), 1u);
  EXPECT_EQ(fresh.size(), 3u);
}

TEST(Http, RequestBodyShape) {
  ModelEndpoint e;
  e.model = "m";
  const auto body = nlohmann::json::parse(
      chat_request_body(e, {{"system", "sys", ""}, {"user", "q", "QUJD"}, {"assistant", "a", ""}}));
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["temperature"], 0.0);
  ASSERT_EQ(body["messages"].size(), 3u);
  EXPECT_EQ(body["messages"][0]["content"], "sys");
  const auto& parts = body["messages"][1]["content"];
  ASSERT_TRUE(parts.is_array());
  bool has_image = false;
  for (const auto& p : parts) {
    if (p["type"] == "image_url") {
      has_image = p["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,QUJD", 0) == 0;
    }
  }
  EXPECT_TRUE(has_image);
  EXPECT_EQ(parse_chat_response(completion("hi")), "hi");
  EXPECT_THROW(parse_chat_response("{}"), EndpointError);
  EXPECT_EQ(base64_encode({'A', 'B', 'C'}), "QUJD");
  EXPECT_EQ(base64_encode({'A'}), "QQ==");
}

TEST(Http, SuccessAndRetry) {
  LocalServer s;
  std::atomic<int> hits{0};
  std::string auth;
  s.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 500;
      return;
    }
    auth = req.get_header_value("Authorization");
    res.set_content(completion("B"), "application/json");
  });
  s.start();
  HttpChatModel model(endpoint_for(s, 2));
  const std::vector<Message> msgs = {{"user", "q", ""}};
  const Turn t = options_turn();
  EXPECT_EQ(model.reply(request_for(msgs, t)), "B");
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(auth, "Bearer k");
}

TEST(Http, ExhaustedRetriesThrow) {
  LocalServer s;
  std::atomic<int> hits{0};
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  s.start();
  HttpChatModel model(endpoint_for(s, 1));
  const std::vector<Message> msgs = {{"user", "q", ""}};
  const Turn t = options_turn();
  EXPECT_THROW(model.reply(request_for(msgs, t)), EndpointError);
  EXPECT_EQ(hits.load(), 2);
}

TEST(Http, EndpointFailureMarksSessionFailed) {
  LocalServer s;
  s.server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  s.start();
  HttpChatModel model(endpoint_for(s, 0));
  const auto t = run_session(clbbb_case(), model, Verifier{});
  EXPECT_TRUE(t.failed);
  EXPECT_FALSE(t.error.empty());
}

TEST(Judge, ExternalVerifier) {
  LocalServer s;
  s.server.Post("/judge", [&](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    const bool ok = j["response"] == j["ground_truth"];
    res.set_content(nlohmann::json{{"consistent", ok}}.dump(), "application/json");
  });
  s.server.Post("/broken", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });
  s.start();
  JudgeEndpoint j;
  j.base_url = s.url();
  const Verifier v(j);
  EXPECT_EQ(v.kind(), VerifierKind::ExternalJudge);
  const auto t = yes_no_turn("Yes");
  EXPECT_TRUE(v.verify("Yes", t).correct);
  EXPECT_FALSE(v.verify("No", t).correct);
  j.path = "/broken";
  EXPECT_THROW(Verifier(j).verify("Yes", t), VerifierError);
  j.base_url = "http://127.0.0.1:1";
  j.timeout_s = 1;
  EXPECT_THROW(Verifier(j).verify("Yes", t), VerifierError);
}

TEST(RateLimit, SpacesRequests) {
  RateLimiter limiter(0.05);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) limiter.acquire();
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(140));
}
