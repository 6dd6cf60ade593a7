#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace rationeval {

// The twelve rationale quality attributes. The declaration order is the
// canonical order used for feature indices, serialization and report axes.
enum class Attribute : int {
  kFaithfulness = 0,
  kHallucination,
  kRepetition,
  kInformativeness,
  kPlausibility,
  kSelfConsistency,
  kSourceConsistency,
  kGrammar,
  kArithmeticAccuracy,
  kConciseness,
  kCompleteness,
  kCorrectness,
};

inline constexpr std::size_t kAttributeCount = 12;

const std::array<Attribute, kAttributeCount>& all_attributes();

// Canonical display name, e.g. "Self-Consistency", "Arithmetic Accuracy".
std::string_view attribute_name(Attribute a);

// One-line definition used in prompts and docs.
std::string_view attribute_definition(Attribute a);

// Accepts canonical names plus the "Coverage/Completeness" alias.
// Case-sensitive; returns nullopt for anything unknown.
std::optional<Attribute> parse_attribute(std::string_view name);

inline int attribute_index(Attribute a) { return static_cast<int>(a); }

}  // namespace rationeval
