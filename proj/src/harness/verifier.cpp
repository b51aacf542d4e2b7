#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/harness/harness.hpp"

namespace ecgbench {

namespace {

const std::set<std::string> kAffirmative = {"yes", "y", "true", "present", "affirmative", "correct"};
const std::set<std::string> kNegative = {"no", "n", "false", "absent", "negative", "not"};

std::vector<std::string> words(const std::string& normalized) {
  std::vector<std::string> out;
  std::istringstream in(normalized);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Whole-word occurrence of `needle` inside `hay`, both normalized.
bool contains_phrase(const std::string& hay, const std::string& needle) {
  if (needle.empty()) return false;
  const std::string h = " " + hay + " ";
  return h.find(" " + needle + " ") != std::string::npos;
}

Verdict match_yes_no(const std::string& reply, const std::string& gt) {
  const auto w = words(normalize_reply(reply));
  const bool gt_yes = normalize_reply(gt) == "yes";
  if (w.empty()) return {};
  if (kAffirmative.count(w.front())) return {gt_yes, false};
  if (kNegative.count(w.front())) return {!gt_yes, false};
  bool saw_yes = false, saw_no = false;
  for (const auto& x : w) {
    saw_yes = saw_yes || kAffirmative.count(x);
    saw_no = saw_no || kNegative.count(x);
  }
  if (saw_yes && saw_no) return {false, true};
  if (saw_yes) return {gt_yes, false};
  if (saw_no) return {!gt_yes, false};
  return {};
}

Verdict match_options(const std::string& reply, const Turn& turn) {
  const std::string r = normalize_reply(reply);
  if (r.empty()) return {};
  std::vector<std::string> texts, letters;
  std::size_t gt = turn.options.size();
  for (std::size_t i = 0; i < turn.options.size(); ++i) {
    texts.push_back(normalize_reply(turn.options[i]));
    letters.push_back(normalize_reply(option_letter(i)));
    if (turn.options[i] == turn.gt_answer) gt = i;
  }
  auto verdict = [&](std::size_t chosen) { return Verdict{chosen == gt, false}; };

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (r == letters[i] || r == texts[i] || r == letters[i] + " " + texts[i]) return verdict(i);
  }
  // "B) ...", "(B) ...", "B: ..."
  static const std::regex lead_letter(R"(^\s*\(?([A-Za-z])[\).:](\s|$))");
  std::smatch m;
  if (std::regex_search(reply, m, lead_letter)) {
    const std::string l = normalize_reply(m[1].str());
    for (std::size_t i = 0; i < letters.size(); ++i) {
      if (l == letters[i]) return verdict(i);
    }
  }

  std::vector<std::size_t> named;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (contains_phrase(r, texts[i]) || contains_phrase(r, "option " + letters[i]) ||
        contains_phrase(r, "answer " + letters[i]) || contains_phrase(r, "answer is " + letters[i])) {
      named.push_back(i);
    }
  }
  // Drop options whose text is only part of a longer named option.
  std::vector<std::size_t> maximal;
  for (std::size_t i : named) {
    const bool nested = std::any_of(named.begin(), named.end(), [&](std::size_t j) {
      return j != i && texts[j].size() > texts[i].size() && contains_phrase(texts[j], texts[i]) &&
             contains_phrase(r, texts[j]);
    });
    if (!nested) maximal.push_back(i);
  }
  if (maximal.size() == 1) return verdict(maximal.front());
  if (maximal.size() > 1) return {false, true};
  return {};
}

}  // namespace

std::string_view verifier_kind_name(VerifierKind k) {
  return k == VerifierKind::NormalizedChoice ? "normalized-choice-match" : "external-judge";
}

std::string normalize_reply(const std::string& text) {
  std::string out;
  bool space = false;
  for (unsigned char ch : text) {
    if (std::isalnum(ch) || ch == '.' || ch == '-') {
      if (space && !out.empty()) out += ' ';
      space = false;
      out += static_cast<char>(std::tolower(ch));
    } else {
      space = true;
    }
  }
  // Keep decimal points and signs inside numbers only.
  std::string clean;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const char ch = out[i];
    if (ch == '.' || ch == '-') {
      const bool digit_after = i + 1 < out.size() && std::isdigit(static_cast<unsigned char>(out[i + 1]));
      if (!digit_after) {
        if (!clean.empty() && clean.back() != ' ' && i + 1 < out.size() && out[i + 1] != ' ') clean += ' ';
        continue;
      }
    }
    clean += ch;
  }
  while (!clean.empty() && clean.back() == ' ') clean.pop_back();
  return clean;
}

Verdict match_choice(const std::string& reply, const Turn& turn) {
  if (turn.options.empty()) return match_yes_no(reply, turn.gt_answer);
  return match_options(reply, turn);
}

Verifier::Verifier(JudgeEndpoint judge) : kind_(VerifierKind::ExternalJudge), judge_(std::move(judge)) {}

Verdict Verifier::verify(const std::string& reply, const Turn& turn) const {
  if (kind_ == VerifierKind::NormalizedChoice) return match_choice(reply, turn);
  httplib::Client cli(judge_.base_url);
  const auto timeout = std::chrono::duration<double>(judge_.timeout_s);
  cli.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
  httplib::Headers headers;
  if (!judge_.auth_value.empty()) headers.emplace(judge_.auth_header, judge_.auth_value);
  nlohmann::json body = {{"question", turn.prompt}, {"ground_truth", turn.gt_answer}, {"response", reply}};
  auto res = cli.Post(judge_.path, headers, body.dump(), "application/json");
  if (!res) throw VerifierError("judge unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw VerifierError("judge returned HTTP " + std::to_string(res->status));
  try {
    const auto j = nlohmann::json::parse(res->body);
    return {j.at("consistent").get<bool>(), false};
  } catch (const nlohmann::json::exception& e) {
    throw VerifierError(std::string("malformed judge reply: ") + e.what());
  }
}

bool verify_answer(const std::string& reply, const Turn& turn, const Verifier& verifier) {
  return verifier.verify(reply, turn).correct;
}

}  // namespace ecgbench
