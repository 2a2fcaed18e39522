#include "waypoint_ar/trajectory_text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

struct Token {
  enum class Kind { kOpen, kClose, kComma, kNumber } kind;
  double value = 0.0;
};

bool IsBlank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsNumberChar(char c) { return IsDigit(c) || c == '.' || c == '-' || c == '+'; }

// [+-]?digits(.digits)?
bool IsPlainDecimal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  const std::size_t int_start = i;
  while (i < s.size() && IsDigit(s[i])) ++i;
  if (i == int_start) return false;
  if (i == s.size()) return true;
  if (s[i] != '.') return false;
  const std::size_t frac_start = ++i;
  while (i < s.size() && IsDigit(s[i])) ++i;
  return i > frac_start && i == s.size();
}

std::string Printable(std::string_view s) {
  std::string out;
  for (unsigned char c : s.substr(0, 24)) {
    if (c >= 0x20 && c < 0x7F) {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\x%02X", c);
      out += buf;
    }
  }
  return out;
}

std::variant<std::vector<Token>, ParseFailure> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (IsBlank(c)) {
      ++i;
    } else if (c == '[') {
      tokens.push_back({Token::Kind::kOpen});
      ++i;
    } else if (c == ']') {
      tokens.push_back({Token::Kind::kClose});
      ++i;
    } else if (c == ',') {
      tokens.push_back({Token::Kind::kComma});
      ++i;
    } else if (IsNumberChar(c)) {
      std::size_t j = i;
      while (j < text.size() && IsNumberChar(text[j])) ++j;
      const std::string word(text.substr(i, j - i));
      if (!IsPlainDecimal(word)) {
        return ParseFailure{ParseFailureKind::kInvalidCharacter,
                            "not a number: '" + Printable(word) + "'"};
      }
      const double v = std::strtod(word.c_str(), nullptr);
      if (!std::isfinite(v)) {
        return ParseFailure{ParseFailureKind::kInvalidCharacter,
                            "number out of range at offset " + std::to_string(i)};
      }
      tokens.push_back({Token::Kind::kNumber, v});
      i = j;
    } else {
      return ParseFailure{ParseFailureKind::kInvalidCharacter,
                          "unexpected character '" + Printable(text.substr(i, 1)) +
                              "' at offset " + std::to_string(i)};
    }
  }
  return tokens;
}

ParseFailure Malformed(std::string detail) {
  return {ParseFailureKind::kMalformedWaypoint, std::move(detail)};
}

ParseFailure Truncated() {
  return {ParseFailureKind::kIncompleteTrajectory,
          "text ends before the trajectory is closed"};
}

}  // namespace

std::string serialize_trajectory_text(const Trajectory& traj) {
  std::string out = "[";
  char buf[96];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s[%.2f, %.2f]", i == 0 ? "" : ", ", traj[i].x,
                  traj[i].y);
    out += buf;
  }
  out += "]";
  return out;
}

std::string_view ToString(ParseFailureKind kind) noexcept {
  switch (kind) {
    case ParseFailureKind::kIncompleteTrajectory:
      return "incomplete_trajectory";
    case ParseFailureKind::kMalformedWaypoint:
      return "malformed_waypoint";
    case ParseFailureKind::kInvalidCharacter:
      return "invalid_character";
  }
  return "unknown";
}

ParseResult parse_trajectory_text(std::string_view text, std::size_t expected_horizon,
                                  double dt) {
  if (expected_horizon == 0) throw DomainError("expected horizon must be >= 1");
  auto lexed = Tokenize(text);
  if (auto* failure = std::get_if<ParseFailure>(&lexed)) return *failure;
  const auto& tokens = std::get<std::vector<Token>>(lexed);

  using K = Token::Kind;
  std::size_t pos = 0;
  auto at_end = [&] { return pos >= tokens.size(); };
  auto peek = [&] { return tokens[pos].kind; };

  if (at_end()) {
    return ParseFailure{ParseFailureKind::kIncompleteTrajectory, "empty output"};
  }
  if (peek() != K::kOpen) return Malformed("missing opening bracket");
  ++pos;

  std::vector<Waypoint> waypoints;
  if (at_end()) return Truncated();
  if (peek() == K::kClose) {
    ++pos;
  } else {
    while (true) {
      if (at_end()) return Truncated();
      if (peek() != K::kOpen) {
        return Malformed("expected '[' to open waypoint " +
                         std::to_string(waypoints.size() + 1));
      }
      ++pos;
      std::vector<double> coords;
      while (true) {
        if (at_end()) return Truncated();
        if (peek() != K::kNumber) {
          return Malformed("expected a coordinate in waypoint " +
                           std::to_string(waypoints.size() + 1));
        }
        coords.push_back(tokens[pos++].value);
        if (at_end()) return Truncated();
        if (peek() == K::kComma) {
          ++pos;
          continue;
        }
        if (peek() == K::kClose) {
          ++pos;
          break;
        }
        return Malformed("expected ',' or ']' in waypoint " +
                         std::to_string(waypoints.size() + 1));
      }
      if (coords.size() != 2) {
        return Malformed("waypoint " + std::to_string(waypoints.size() + 1) + " has " +
                         std::to_string(coords.size()) + " coordinates");
      }
      waypoints.push_back({coords[0], coords[1]});
      if (at_end()) return Truncated();
      if (peek() == K::kComma) {
        ++pos;
        continue;
      }
      if (peek() == K::kClose) {
        ++pos;
        break;
      }
      return Malformed("expected ',' or ']' after waypoint " +
                       std::to_string(waypoints.size()));
    }
  }
  if (!at_end()) return Malformed("trailing text after the trajectory");
  if (waypoints.size() != expected_horizon) {
    return ParseFailure{ParseFailureKind::kIncompleteTrajectory,
                        "expected " + std::to_string(expected_horizon) +
                            " waypoints, got " + std::to_string(waypoints.size())};
  }
  return Trajectory(std::move(waypoints), dt);
}

double ParseAuditSummary::failure_rate() const noexcept {
  return total == 0 ? 0.0
                    : static_cast<double>(failures()) / static_cast<double>(total);
}

double ParseAuditSummary::rate(ParseFailureKind kind) const noexcept {
  return total == 0 ? 0.0
                    : static_cast<double>(counts[static_cast<std::size_t>(kind)]) /
                          static_cast<double>(total);
}

ParseAuditSummary parse_audit(std::span<const std::string> corpus,
                              std::size_t expected_horizon) {
  ParseAuditSummary summary;
  summary.total = corpus.size();
  for (const std::string& text : corpus) {
    const ParseResult r = parse_trajectory_text(text, expected_horizon);
    if (const auto* f = std::get_if<ParseFailure>(&r)) {
      ++summary.counts[static_cast<std::size_t>(f->kind)];
    } else {
      ++summary.valid;
    }
  }
  return summary;
}

std::string FormatAuditSummary(const ParseAuditSummary& s) {
  std::ostringstream out;
  out.precision(6);
  out << "total = " << s.total << '\n'
      << "valid = " << s.valid << '\n'
      << "failures = " << s.failures() << '\n'
      << "failure_rate = " << s.failure_rate() << '\n';
  for (std::size_t k = 0; k < kNumParseFailureKinds; ++k) {
    const auto kind = static_cast<ParseFailureKind>(k);
    out << ToString(kind) << ".count = " << s.counts[k] << '\n'
        << ToString(kind) << ".rate = " << s.rate(kind) << '\n';
  }
  return out.str();
}

LabeledCorpus MakeCorruptedCorpus(std::size_t n, const CorruptionRates& rates,
                                  std::size_t horizon, std::uint64_t seed) {
  if (horizon < 2) throw DomainError("corrupted corpus needs horizon >= 2");
  if (rates.incomplete < 0 || rates.malformed < 0 || rates.invalid_character < 0 ||
      rates.incomplete + rates.malformed + rates.invalid_character > 1.0) {
    throw DomainError("corruption rates must be >= 0 and sum to at most 1");
  }
  const auto count = [n](double r) {
    return static_cast<std::size_t>(std::llround(r * static_cast<double>(n)));
  };
  std::vector<std::optional<ParseFailureKind>> labels;
  labels.insert(labels.end(), count(rates.incomplete), ParseFailureKind::kIncompleteTrajectory);
  labels.insert(labels.end(), count(rates.malformed), ParseFailureKind::kMalformedWaypoint);
  labels.insert(labels.end(), count(rates.invalid_character), ParseFailureKind::kInvalidCharacter);
  if (labels.size() > n) throw DomainError("corruption counts exceed corpus size");
  labels.resize(n);

  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  static constexpr std::array<const char*, 5> kJunk = {"abc", "NaN", "n/a", "left",
                                                       "1.2e3"};

  LabeledCorpus corpus;
  corpus.labels = labels;
  corpus.texts.reserve(n);
  char buf[64];
  for (const auto& label : labels) {
    std::vector<std::string> pairs(horizon);
    std::vector<std::array<double, 2>> xy(horizon);
    for (auto& p : xy) p = {coord(rng), coord(rng)};
    auto fmt = [&buf](double v) {
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      return std::string(buf);
    };
    for (std::size_t i = 0; i < horizon; ++i) {
      pairs[i] = "[" + fmt(xy[i][0]) + ", " + fmt(xy[i][1]) + "]";
    }
    std::size_t keep = horizon;
    if (label == ParseFailureKind::kIncompleteTrajectory) {
      keep = std::uniform_int_distribution<std::size_t>(1, horizon - 1)(rng);
    } else if (label == ParseFailureKind::kMalformedWaypoint) {
      const std::size_t at = std::uniform_int_distribution<std::size_t>(0, horizon - 1)(rng);
      pairs[at] = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                      ? "[" + fmt(xy[at][0]) + "]"
                      : "[" + fmt(xy[at][0]) + ", " + fmt(xy[at][1]) + ", " +
                            fmt(coord(rng)) + "]";
    } else if (label == ParseFailureKind::kInvalidCharacter) {
      const std::size_t at = std::uniform_int_distribution<std::size_t>(0, horizon - 1)(rng);
      const char* junk = kJunk[std::uniform_int_distribution<std::size_t>(0, kJunk.size() - 1)(rng)];
      pairs[at] = "[" + fmt(xy[at][0]) + ", " + junk + "]";
    }
    std::string text = "[";
    for (std::size_t i = 0; i < keep; ++i) text += (i ? ", " : "") + pairs[i];
    text += "]";
    corpus.texts.push_back(std::move(text));
  }
  return corpus;
}

}  // namespace wpar
