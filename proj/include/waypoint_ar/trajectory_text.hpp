#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "waypoint_ar/geometry.hpp"

namespace wpar {

// "[[x1, y1], [x2, y2], ...]" with two decimals per coordinate.
std::string serialize_trajectory_text(const Trajectory& traj);

enum class ParseFailureKind {
  kIncompleteTrajectory,  // wrong waypoint count, or text ends mid-structure
  kMalformedWaypoint,     // waypoint arity != 2, or broken bracket/comma layout
  kInvalidCharacter,      // anything that is not a bracket, comma, blank or
                          // a plain decimal number
};

inline constexpr std::size_t kNumParseFailureKinds = 3;

std::string_view ToString(ParseFailureKind kind) noexcept;

struct ParseFailure {
  ParseFailureKind kind;
  std::string detail;
};

using ParseResult = std::variant<Trajectory, ParseFailure>;

// Strict grammar. Checks run in order lexical -> structure/arity -> count,
// so each bad string gets exactly one kind. Never throws for any input text;
// throws DomainError only if expected_horizon == 0.
ParseResult parse_trajectory_text(std::string_view text, std::size_t expected_horizon,
                                  double dt = kStepSeconds);

struct ParseAuditSummary {
  std::size_t total = 0;
  std::size_t valid = 0;
  std::array<std::size_t, kNumParseFailureKinds> counts{};

  std::size_t failures() const noexcept { return total - valid; }
  double failure_rate() const noexcept;
  double rate(ParseFailureKind kind) const noexcept;
};

ParseAuditSummary parse_audit(std::span<const std::string> corpus,
                              std::size_t expected_horizon);

std::string FormatAuditSummary(const ParseAuditSummary& summary);

struct CorruptionRates {
  double incomplete = 0.0;
  double malformed = 0.0;
  double invalid_character = 0.0;
};

struct LabeledCorpus {
  std::vector<std::string> texts;
  // Failure each text was built to exhibit; nullopt for untouched strings.
  std::vector<std::optional<ParseFailureKind>> labels;
};

// Serialized random trajectories with exactly round(n * rate) strings of
// each corruption kind, shuffled. Throws DomainError if rates exceed 1.
LabeledCorpus MakeCorruptedCorpus(std::size_t n, const CorruptionRates& rates,
                                  std::size_t horizon, std::uint64_t seed);

}  // namespace wpar
