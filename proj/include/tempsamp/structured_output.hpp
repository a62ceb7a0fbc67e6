#pragma once

// Wire format for model outputs:
//
//   ThinkAnswer:  ws <Think> any-text </Think> ws <Answer> payload </Answer> ws
//   AnswerOnly:   ws <Answer> payload </Answer> ws
//
//   grounding payload:  [ real , real ]
//   highlight payload:  [ (int, real), (int, real), ... ]   (may be empty)
//
// Tags match case-insensitively; the emitter writes capitalized tags and three
// fractional digits. Whitespace is allowed between payload tokens.

#include <optional>
#include <string>
#include <string_view>

#include "tempsamp/temporal.hpp"

namespace tempsamp {

enum class Schema { kAnswerOnly, kThinkAnswer };
enum class Task { kGrounding, kHighlight };

std::string_view to_string(Schema schema);
std::string_view to_string(Task task);
Schema parse_schema(std::string_view name);
Task parse_task(std::string_view name);

struct ParsedOutput {
  std::optional<std::string> think_text;
  /// Absent when the text is malformed or the numbers fail payload validation
  /// (reversed interval, negative time, score outside [0, 1], duplicate clip).
  std::optional<Payload> answer;
  bool well_formed = false;
};

/// Total: never throws, whatever the bytes.
ParsedOutput parse_output(std::string_view raw_text, Schema schema, Task task);

/// Canonical rendering. Throws kSchemaMismatch for think text under AnswerOnly and
/// kInvalidArgument when the think text contains a closing think tag.
std::string emit_output(const Payload& payload, const std::optional<std::string>& think_text,
                        Schema schema);

/// Payload rendered without tags, e.g. "[1.000, 2.500]".
std::string emit_payload(const Payload& payload);

}  // namespace tempsamp
