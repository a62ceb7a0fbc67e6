#include "tempsamp/structured_output.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "tempsamp/error.hpp"

namespace tempsamp {

std::string_view to_string(Schema schema) {
  return schema == Schema::kAnswerOnly ? "answer_only" : "think_answer";
}

std::string_view to_string(Task task) {
  return task == Task::kGrounding ? "grounding" : "highlight";
}

Schema parse_schema(std::string_view name) {
  if (name == "answer_only") return Schema::kAnswerOnly;
  if (name == "think_answer") return Schema::kThinkAnswer;
  throw Error(ErrorCode::kInvalidArgument, "unknown schema '" + std::string(name) + "'");
}

Task parse_task(std::string_view name) {
  if (name == "grounding") return Task::kGrounding;
  if (name == "highlight") return Task::kHighlight;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

// Expects `tag` in lowercase.
bool iequals_at(std::string_view text, std::size_t pos, std::string_view tag) {
  if (pos > text.size() || text.size() - pos < tag.size()) return false;
  for (std::size_t k = 0; k < tag.size(); ++k) {
    if (lower(text[pos + k]) != tag[k]) return false;
  }
  return true;
}

std::size_t ifind(std::string_view text, std::string_view tag, std::size_t from) {
  for (std::size_t pos = from; pos + tag.size() <= text.size(); ++pos) {
    if (iequals_at(text, pos, tag)) return pos;
  }
  return std::string_view::npos;
}

// Recursive-descent cursor over the payload region.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool at_end() {
    skip_ws();
    return pos_ == text_.size();
  }

  // real := '-'? digit+ ('.' digit+)?
  std::optional<std::string_view> real_token() {
    skip_ws();
    const std::size_t begin = pos_;
    std::size_t p = pos_;
    if (p < text_.size() && text_[p] == '-') ++p;
    const std::size_t int_begin = p;
    while (p < text_.size() && is_digit(text_[p])) ++p;
    if (p == int_begin) return std::nullopt;
    if (p < text_.size() && text_[p] == '.') {
      const std::size_t frac_begin = ++p;
      while (p < text_.size() && is_digit(text_[p])) ++p;
      if (p == frac_begin) return std::nullopt;
    }
    pos_ = p;
    return text_.substr(begin, p - begin);
  }

  // int := digit+
  std::optional<std::string_view> int_token() {
    skip_ws();
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ == begin) return std::nullopt;
    return text_.substr(begin, pos_ - begin);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<double> to_double(std::string_view token) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> to_int(std::string_view token) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

// Grammar check plus numeric conversion. Returns false on a grammar mismatch;
// `payload` stays empty when the grammar holds but values are invalid.
bool parse_grounding(std::string_view body, std::optional<Payload>& payload) {
  Cursor cur(body);
  if (!cur.eat('[')) return false;
  auto a = cur.real_token();
  if (!a || !cur.eat(',')) return false;
  auto b = cur.real_token();
  if (!b || !cur.eat(']') || !cur.at_end()) return false;

  auto start = to_double(*a);
  auto end = to_double(*b);
  if (start && end) {
    try {
      payload = TimeInterval::make(*start, *end);
    } catch (const Error&) {
      payload.reset();
    }
  }
  return true;
}

bool parse_highlight(std::string_view body, std::optional<Payload>& payload) {
  Cursor cur(body);
  if (!cur.eat('[')) return false;
  std::vector<std::pair<std::string_view, std::string_view>> tokens;
  if (!cur.peek(']')) {
    do {
      if (!cur.eat('(')) return false;
      auto idx = cur.int_token();
      if (!idx || !cur.eat(',')) return false;
      auto score = cur.real_token();
      if (!score || !cur.eat(')')) return false;
      tokens.emplace_back(*idx, *score);
    } while (cur.eat(','));
  }
  if (!cur.eat(']') || !cur.at_end()) return false;

  std::vector<ClipScore> clips;
  clips.reserve(tokens.size());
  for (auto [idx_tok, score_tok] : tokens) {
    auto idx = to_int(idx_tok);
    auto score = to_double(score_tok);
    if (!idx || !score) return true;
    clips.push_back({*idx, *score});
  }
  try {
    payload = HighlightAnswer::make(std::move(clips));
  } catch (const Error&) {
    payload.reset();
  }
  return true;
}

}  // namespace

ParsedOutput parse_output(std::string_view raw_text, Schema schema, Task task) {
  ParsedOutput out;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < raw_text.size() && is_space(raw_text[pos])) ++pos;
  };

  skip_ws();
  std::optional<std::string> think;
  if (schema == Schema::kThinkAnswer) {
    if (!iequals_at(raw_text, pos, kThinkOpen)) return out;
    pos += kThinkOpen.size();
    const std::size_t close = ifind(raw_text, kThinkClose, pos);
    if (close == std::string_view::npos) return out;
    think = std::string(raw_text.substr(pos, close - pos));
    pos = close + kThinkClose.size();
    skip_ws();
  }

  if (!iequals_at(raw_text, pos, kAnswerOpen)) return out;
  pos += kAnswerOpen.size();
  const std::size_t close = ifind(raw_text, kAnswerClose, pos);
  if (close == std::string_view::npos) return out;
  const std::string_view body = raw_text.substr(pos, close - pos);
  pos = close + kAnswerClose.size();
  skip_ws();
  if (pos != raw_text.size()) return out;

  std::optional<Payload> payload;
  const bool ok = task == Task::kGrounding ? parse_grounding(body, payload)
                                           : parse_highlight(body, payload);
  if (!ok) return out;

  out.well_formed = true;
  out.think_text = std::move(think);
  out.answer = std::move(payload);
  return out;
}

std::string emit_payload(const Payload& payload) {
  if (const auto* interval = std::get_if<TimeInterval>(&payload)) {
    return fmt::format("[{:.3f}, {:.3f}]", interval->start(), interval->end());
  }
  const auto& answer = std::get<HighlightAnswer>(payload);
  std::string out = "[";
  bool first = true;
  for (const auto& c : answer.clips()) {
    if (!first) out += ", ";
    first = false;
    out += fmt::format("({}, {:.3f})", c.clip, c.score);
  }
  out += "]";
  return out;
}

std::string emit_output(const Payload& payload, const std::optional<std::string>& think_text,
                        Schema schema) {
  std::string out;
  if (schema == Schema::kAnswerOnly) {
    if (think_text) {
      throw Error(ErrorCode::kSchemaMismatch, "think text supplied under the answer-only schema");
    }
  } else {
    const std::string think = think_text.value_or("");
    if (ifind(think, kThinkClose, 0) != std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument, "think text contains a closing think tag");
    }
    out += "<Think>" + think + "</Think>";
  }
  out += "<Answer>" + emit_payload(payload) + "</Answer>";
  return out;
}

}  // namespace tempsamp
