#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/findings/findings.hpp"

namespace ecgbench {

namespace {

const std::set<std::string> kBeatFields = {"p_dur", "qrs_dur", "t_dur", "pr",    "rr",
                                           "qt",    "rr_ratio", "beat_axis", "has_p", "has_t"};
const std::set<std::string> kLeadFields = {
    "r_amp",  "s_amp",  "q_amp", "q_dur", "r_dur",  "s_dur",     "p_amp",  "t_amp",  "st",
    "st_j",   "area",   "is_qR", "is_rS", "is_RSR", "is_QS",     "is_R",   "has_q",  "notched_r",
    "path_q"};
const std::set<std::string> kRecordFields = {"orphan_p_count", "atrial_rate", "ventricular_rate",
                                             "pr_range",       "axis",        "beat_count",
                                             "duration"};
const std::set<std::string> kBeatQuantifiers = {"majority", "any_beat", "all_beats", "count_beats",
                                                "median"};
const std::set<std::string> kLeadQuantifiers = {"count_leads", "any_lead", "all_leads"};
const std::set<std::string> kVariadic = {"max", "min", "abs"};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  ExprPtr parse() {
    auto e = parse_or();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("predicate '" + s_ + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    // keywords must not run into identifiers
    if (std::isalpha(static_cast<unsigned char>(tok.front())) && pos_ + tok.size() < s_.size()) {
      const char next = s_[pos_ + tok.size()];
      if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    }
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return s_.substr(start, pos_ - start);
  }

  static ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

  ExprPtr binary(std::string op, ExprPtr a, ExprPtr b) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.name = std::move(op);
    e.args = {std::move(a), std::move(b)};
    return node(std::move(e));
  }

  ExprPtr parse_or() {
    auto left = parse_and();
    while (accept("or")) left = binary("or", left, parse_and());
    return left;
  }

  ExprPtr parse_and() {
    auto left = parse_not();
    while (accept("and")) left = binary("and", left, parse_not());
    return left;
  }

  ExprPtr parse_not() {
    if (accept("not")) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.name = "not";
      e.args = {parse_not()};
      return node(std::move(e));
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    auto left = parse_sum();
    for (const char* op : {"<=", ">=", "==", "!=", "<", ">"}) {
      if (accept(op)) return binary(op, left, parse_sum());
    }
    return left;
  }

  ExprPtr parse_sum() {
    auto left = parse_product();
    while (true) {
      if (accept("+")) left = binary("+", left, parse_product());
      else if (accept("-")) left = binary("-", left, parse_product());
      else return left;
    }
  }

  ExprPtr parse_product() {
    auto left = parse_unary();
    while (true) {
      if (accept("*")) left = binary("*", left, parse_unary());
      else if (accept("/")) left = binary("/", left, parse_unary());
      else return left;
    }
  }

  ExprPtr parse_unary() {
    if (accept("-")) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.name = "-";
      e.args = {parse_unary()};
      return node(std::move(e));
    }
    return parse_primary();
  }

  Lead lead_token() {
    const std::string name = ident();
    auto l = parse_lead(name);
    if (!l) fail("unknown lead '" + name + "'");
    return *l;
  }

  std::vector<Lead> lead_set() {
    if (accept("{")) {
      std::vector<Lead> out{lead_token()};
      while (accept(",")) out.push_back(lead_token());
      expect("}");
      return out;
    }
    const std::string name = ident();
    auto g = lead_group(name);
    if (!g) fail("unknown lead group '" + name + "'");
    return *g;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept("(")) {
      auto e = parse_or();
      expect(")");
      return e;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc{}) fail("bad number");
      pos_ = static_cast<std::size_t>(p - s_.data());
      Expr e;
      e.kind = Expr::Kind::Number;
      e.number = v;
      return node(std::move(e));
    }
    const std::string name = ident();
    if (accept("(")) {
      Expr e;
      e.kind = Expr::Kind::Call;
      e.name = name;
      if (kLeadQuantifiers.count(name)) {
        e.lead_set = lead_set();
        expect(",");
        e.args.push_back(parse_or());
      } else if (kBeatQuantifiers.count(name)) {
        e.args.push_back(parse_or());
      } else if (kVariadic.count(name)) {
        e.args.push_back(parse_or());
        while (accept(",")) e.args.push_back(parse_or());
        if (name == "abs" && e.args.size() != 1) fail("abs takes one argument");
      } else {
        fail("unknown function '" + name + "'");
      }
      expect(")");
      return node(std::move(e));
    }
    if (!is_known_field(name)) fail("unknown field '" + name + "'");
    Expr e;
    e.kind = Expr::Kind::Field;
    e.name = name;
    if (accept("[")) {
      if (!is_lead_field(name)) fail("field '" + name + "' takes no lead subscript");
      e.lead = lead_token();
      expect("]");
    }
    return node(std::move(e));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

bool truthy(double v) { return v != 0.0; }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Value beat_field(const BeatMeasurements& m, std::size_t beat, const std::string& f) {
  const auto& b = m.per_beat[beat];
  if (f == "p_dur") return b.p_dur_ms;
  if (f == "qrs_dur") return b.qrs_dur_ms;
  if (f == "t_dur") return b.t_dur_ms;
  if (f == "pr") return b.pr_ms;
  if (f == "rr") return b.rr_ms;
  if (f == "qt") return b.qt_ms;
  if (f == "rr_ratio") return b.rr_ratio;
  if (f == "beat_axis") return b.axis_deg;
  if (f == "has_p") return b.p_dur_ms ? 1.0 : 0.0;
  if (f == "has_t") return b.t_dur_ms ? 1.0 : 0.0;
  return std::nullopt;
}

Value lead_field(const BeatMeasurements& m, std::size_t beat, Lead lead, const std::string& f) {
  const auto& l = m.per_beat[beat].leads[index_of(lead)];
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  if (f == "r_amp") return l.r_amp_mv;
  if (f == "s_amp") return l.s_amp_mv;
  if (f == "q_amp") return l.q_amp_mv;
  if (f == "q_dur") return l.q_dur_ms;
  if (f == "r_dur") return l.r_dur_ms;
  if (f == "s_dur") return l.s_dur_ms;
  if (f == "p_amp") return l.p_amp_mv;
  if (f == "t_amp") return l.t_amp_mv;
  if (f == "st") return l.st_mv;
  if (f == "st_j") return l.st_j_mv;
  if (f == "area") return l.qrs_area_mv_s;
  if (f == "is_qR") return flag(l.morphology == Morphology::qR);
  if (f == "is_rS") return flag(l.morphology == Morphology::rS);
  if (f == "is_RSR") return flag(l.morphology == Morphology::RSR);
  if (f == "is_QS") return flag(l.morphology == Morphology::QS);
  if (f == "is_R") return flag(l.morphology == Morphology::RMonophasic);
  if (f == "has_q") return flag(l.q_dur_ms > 0.0);
  if (f == "notched_r") return flag(l.notched_r);
  if (f == "path_q") return flag(l.pathological_q);
  return std::nullopt;
}

Value record_field(const BeatMeasurements& m, const std::string& f) {
  if (f == "orphan_p_count") return static_cast<double>(m.orphan_p_count);
  if (f == "atrial_rate") return m.atrial_rate_bpm;
  if (f == "ventricular_rate") return m.ventricular_rate_bpm;
  if (f == "pr_range") return m.pr_range_ms;
  if (f == "axis") return m.axis_deg;
  if (f == "beat_count") return static_cast<double>(m.per_beat.size());
  if (f == "duration") return m.duration_s;
  return std::nullopt;
}

Value field_value(const Expr& e, const EvalContext& ctx) {
  const auto& m = *ctx.m;
  if (kRecordFields.count(e.name)) return record_field(m, e.name);
  const bool per_lead = kLeadFields.count(e.name) > 0;
  std::optional<Lead> lead = e.lead ? e.lead : ctx.lead;
  if (per_lead && !lead) return std::nullopt;
  auto at = [&](std::size_t b) {
    return per_lead ? lead_field(m, b, *lead, e.name) : beat_field(m, b, e.name);
  };
  if (ctx.beat) return at(*ctx.beat);
  std::vector<double> v;
  for (std::size_t b = 0; b < m.per_beat.size(); ++b) {
    if (auto x = at(b)) v.push_back(*x);
  }
  if (v.empty()) return std::nullopt;
  return median_of(std::move(v));
}

}  // namespace

bool is_known_field(const std::string& name) {
  return kBeatFields.count(name) || kLeadFields.count(name) || kRecordFields.count(name);
}

bool is_lead_field(const std::string& name) { return kLeadFields.count(name) > 0; }

ExprPtr parse_predicate(const std::string& text) { return Parser(text).parse(); }

std::vector<std::string> referenced_fields(const ExprPtr& e) {
  std::vector<std::string> out;
  if (!e) return out;
  if (e->kind == Expr::Kind::Field) out.push_back(e->name);
  for (const auto& a : e->args) {
    auto sub = referenced_fields(a);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

Value evaluate(const ExprPtr& ep, const EvalContext& ctx) {
  const Expr& e = *ep;
  switch (e.kind) {
    case Expr::Kind::Number:
      return e.number;
    case Expr::Kind::Field:
      return field_value(e, ctx);
    case Expr::Kind::Unary: {
      const Value v = evaluate(e.args[0], ctx);
      if (!v) return std::nullopt;
      return e.name == "not" ? (truthy(*v) ? 0.0 : 1.0) : -*v;
    }
    case Expr::Kind::Binary: {
      if (e.name == "and" || e.name == "or") {
        const bool is_and = e.name == "and";
        const Value a = evaluate(e.args[0], ctx);
        if (a && truthy(*a) != is_and) return is_and ? 0.0 : 1.0;
        const Value b = evaluate(e.args[1], ctx);
        if (b && truthy(*b) != is_and) return is_and ? 0.0 : 1.0;
        if (!a || !b) return std::nullopt;
        return is_and ? 1.0 : 0.0;
      }
      const Value a = evaluate(e.args[0], ctx);
      const Value b = evaluate(e.args[1], ctx);
      if (!a || !b) return std::nullopt;
      const double x = *a, y = *b;
      constexpr double eps = 1e-9;
      if (e.name == "+") return x + y;
      if (e.name == "-") return x - y;
      if (e.name == "*") return x * y;
      if (e.name == "/") return y == 0.0 ? Value{} : Value{x / y};
      if (e.name == "<") return x < y - eps ? 1.0 : 0.0;
      if (e.name == "<=") return x <= y + eps ? 1.0 : 0.0;
      if (e.name == ">") return x > y + eps ? 1.0 : 0.0;
      if (e.name == ">=") return x >= y - eps ? 1.0 : 0.0;
      if (e.name == "==") return std::abs(x - y) <= eps ? 1.0 : 0.0;
      if (e.name == "!=") return std::abs(x - y) > eps ? 1.0 : 0.0;
      return std::nullopt;
    }
    case Expr::Kind::Call: {
      if (kBeatQuantifiers.count(e.name)) {
        std::vector<double> vals;
        for (std::size_t b = 0; b < ctx.m->per_beat.size(); ++b) {
          EvalContext sub = ctx;
          sub.beat = b;
          if (auto v = evaluate(e.args[0], sub)) vals.push_back(*v);
        }
        if (e.name == "median") {
          if (vals.empty()) return std::nullopt;
          return median_of(vals);
        }
        const auto hits = static_cast<double>(std::count_if(vals.begin(), vals.end(), truthy));
        if (e.name == "count_beats") return hits;
        if (vals.empty()) return std::nullopt;
        if (e.name == "majority") return hits > vals.size() / 2.0 ? 1.0 : 0.0;
        if (e.name == "any_beat") return hits > 0 ? 1.0 : 0.0;
        return hits == static_cast<double>(vals.size()) ? 1.0 : 0.0;  // all_beats
      }
      if (kLeadQuantifiers.count(e.name)) {
        int hits = 0, defined = 0;
        for (Lead l : e.lead_set) {
          EvalContext sub = ctx;
          sub.lead = l;
          const Value v = evaluate(e.args[0], sub);
          if (v) ++defined;
          if (v && truthy(*v)) ++hits;
        }
        if (e.name == "count_leads") return static_cast<double>(hits);
        if (defined == 0) return std::nullopt;
        if (e.name == "any_lead") return hits > 0 ? 1.0 : 0.0;
        return hits == static_cast<int>(e.lead_set.size()) ? 1.0 : 0.0;  // all_leads
      }
      std::vector<double> vals;
      for (const auto& a : e.args) {
        const Value v = evaluate(a, ctx);
        if (!v) return std::nullopt;
        vals.push_back(*v);
      }
      if (e.name == "abs") return std::abs(vals[0]);
      if (e.name == "max") return *std::max_element(vals.begin(), vals.end());
      if (e.name == "min") return *std::min_element(vals.begin(), vals.end());
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace ecgbench
