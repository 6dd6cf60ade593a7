#include "rationeval/attributes.hpp"

namespace rationeval {

namespace {

constexpr std::array<Attribute, kAttributeCount> kAll = {
    Attribute::kFaithfulness,      Attribute::kHallucination,
    Attribute::kRepetition,        Attribute::kInformativeness,
    Attribute::kPlausibility,      Attribute::kSelfConsistency,
    Attribute::kSourceConsistency, Attribute::kGrammar,
    Attribute::kArithmeticAccuracy, Attribute::kConciseness,
    Attribute::kCompleteness,      Attribute::kCorrectness,
};

constexpr std::array<std::string_view, kAttributeCount> kNames = {
    "Faithfulness",
    "Hallucination",
    "Repetition",
    "Informativeness",
    "Plausibility",
    "Self-Consistency",
    "Source Consistency",
    "Grammar",
    "Arithmetic Accuracy",
    "Conciseness",
    "Completeness",
    "Correctness",
};

constexpr std::array<std::string_view, kAttributeCount> kDefinitions = {
    "Is the rationale supported by the model's actual computation or the provided evidence?",
    "Does the rationale introduce information not present in the source/context?",
    "Does the rationale unnecessarily repeat points or phrases?",
    "Does the rationale add meaningful, relevant details?",
    "Does the rationale \"sound right\" or seem believable, regardless of truth?",
    "Does the rationale avoid contradictions within itself, with all reasoning steps logically aligned?",
    "Does the rationale avoid contradicting the given context or information in the problem statement?",
    "Is the rationale well-written, clear, and free of grammatical mistakes?",
    "Are any calculations in the rationale correct?",
    "Is the rationale as short as possible, without losing information? Especially if length is a concern.",
    "Does the rationale explain all necessary steps/evidence?",
    "Are all steps and answers in the rationale objectively correct?",
};

}  // namespace

const std::array<Attribute, kAttributeCount>& all_attributes() { return kAll; }

std::string_view attribute_name(Attribute a) { return kNames[static_cast<std::size_t>(a)]; }

std::string_view attribute_definition(Attribute a) {
  return kDefinitions[static_cast<std::size_t>(a)];
}

std::optional<Attribute> parse_attribute(std::string_view name) {
  for (std::size_t i = 0; i < kAttributeCount; ++i) {
    if (kNames[i] == name) return kAll[i];
  }
  // Prompt templates title this attribute "Coverage/Completeness".
  if (name == "Coverage/Completeness") return Attribute::kCompleteness;
  return std::nullopt;
}

}  // namespace rationeval
