#include "edis/answer.hpp"

#include <cctype>

namespace edis {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// "[+-]digits.0*" -> "[-]digits" with leading zeros dropped.
std::string canonical_integer(const std::string& s) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) negative = s[i++] == '-';
  const std::size_t int_begin = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  const std::size_t int_end = i;
  if (int_end == int_begin || i >= s.size() || s[i] != '.') return s;
  ++i;
  while (i < s.size() && s[i] == '0') ++i;
  if (i != s.size()) return s;

  std::size_t first = int_begin;
  while (first + 1 < int_end && s[first] == '0') ++first;
  std::string digits = s.substr(first, int_end - first);
  if (digits == "0") negative = false;
  return negative ? "-" + digits : digits;
}

}  // namespace

std::string normalize_answer(std::string_view answer) {
  std::string s = collapse_whitespace(answer);
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return canonical_integer(s);
}

std::optional<std::string> extract_answer(std::string_view raw_text,
                                          const AnswerNormalizer& extra) {
  constexpr std::string_view kOpen = "\\boxed{";
  std::optional<std::string_view> last;
  std::size_t from = 0;
  while (true) {
    const std::size_t start = raw_text.find(kOpen, from);
    if (start == std::string_view::npos) break;
    const std::size_t body = start + kOpen.size();
    int depth = 1;
    std::size_t i = body;
    for (; i < raw_text.size() && depth > 0; ++i) {
      if (raw_text[i] == '{') ++depth;
      if (raw_text[i] == '}') --depth;
    }
    if (depth == 0) last = raw_text.substr(body, i - 1 - body);
    from = body;
  }
  if (!last) return std::nullopt;
  std::string normalized = normalize_answer(*last);
  if (extra) normalized = extra(std::move(normalized));
  if (normalized.empty()) return std::nullopt;
  return normalized;
}

}  // namespace edis
