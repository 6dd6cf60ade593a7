#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "rationeval/core.hpp"
#include "rationeval/errors.hpp"
#include "rationeval/rng.hpp"

using namespace rationeval;

namespace {

ScoreCard constant_card(double v) {
  ScoreCard c;
  for (Attribute a : all_attributes()) c.set(a, v);
  return c;
}

ScoreCard random_card(Rng& rng) {
  ScoreCard c;
  for (Attribute a : all_attributes()) c.set(a, rng.uniform());
  return c;
}

}  // namespace

TEST_CASE("attribute enumeration is the canonical twelve") {
  REQUIRE(all_attributes().size() == 12);
  CHECK(attribute_name(Attribute::kFaithfulness) == "Faithfulness");
  CHECK(attribute_name(Attribute::kSelfConsistency) == "Self-Consistency");
  CHECK(attribute_name(Attribute::kSourceConsistency) == "Source Consistency");
  CHECK(attribute_name(Attribute::kArithmeticAccuracy) == "Arithmetic Accuracy");
  CHECK(attribute_name(Attribute::kCorrectness) == "Correctness");
  // Index i of the canonical list round-trips through attribute_index.
  for (size_t i = 0; i < kAttributeCount; ++i) {
    CHECK(attribute_index(all_attributes()[i]) == static_cast<int>(i));
  }
  // Every attribute carries a definition for prompt rendering.
  for (Attribute a : all_attributes()) {
    CHECK_FALSE(attribute_definition(a).empty());
  }
}

TEST_CASE("parse_attribute accepts canonical names and the coverage alias") {
  for (Attribute a : all_attributes()) {
    auto parsed = parse_attribute(attribute_name(a));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == a);
  }
  auto alias = parse_attribute("Coverage/Completeness");
  REQUIRE(alias.has_value());
  CHECK(*alias == Attribute::kCompleteness);
  CHECK_FALSE(parse_attribute("Coherence").has_value());
  CHECK_FALSE(parse_attribute("faithfulness").has_value());
}

TEST_CASE("canonical order is shared by serialization, features and reports") {
  ScoreCard card;
  for (size_t i = 0; i < kAttributeCount; ++i) {
    card.set(all_attributes()[i], static_cast<double>(i) / 16.0);
  }
  ojson j = card_to_json(card);
  size_t i = 0;
  for (const auto& [key, value] : j.items()) {
    CHECK(key == attribute_name(all_attributes()[i]));
    CHECK(value.get<double>() == doctest::Approx(static_cast<double>(i) / 16.0));
    ++i;
  }
  CHECK(i == kAttributeCount);

  // Feature vectors index by the same order.
  ScoreCard zero = constant_card(0.0);
  FeatureVector d = score_difference(card, zero);
  for (size_t k = 0; k < kAttributeCount; ++k) {
    CHECK(d[k] == doctest::Approx(static_cast<double>(k) / 16.0));
  }
}

TEST_CASE("normalize_scale maps raw scores onto [0,1]") {
  CHECK(normalize_scale(7.0, 10.0) == doctest::Approx(0.7));
  CHECK(normalize_scale(0.0, 10.0) == 0.0);
  CHECK(normalize_scale(1.0, 1.0) == 1.0);
  CHECK(normalize_scale(10.0, 10.0) == 1.0);

  CHECK_THROWS_AS(normalize_scale(-0.1, 1.0), DataError);
  CHECK_THROWS_AS(normalize_scale(10.5, 10.0), DataError);
  CHECK_THROWS_AS(normalize_scale(0.5, 0.0), DataError);
  CHECK_THROWS_AS(normalize_scale(0.5, -1.0), DataError);
}

TEST_CASE("normalize_scale is monotone and hits the endpoints") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    double max = trial % 2 == 0 ? 1.0 : 10.0;
    double x = rng.uniform(0.0, max);
    double y = rng.uniform(0.0, max);
    if (x > y) std::swap(x, y);
    CHECK(normalize_scale(x, max) <= normalize_scale(y, max));
  }
  CHECK(normalize_scale(0.0, 1.0) == 0.0);
  CHECK(normalize_scale(1.0, 1.0) == 1.0);
}

TEST_CASE("score cards reject out-of-range values") {
  ScoreCard c;
  CHECK_THROWS_AS(c.set(Attribute::kGrammar, 1.2), DataError);
  CHECK_THROWS_AS(c.set(Attribute::kGrammar, -0.01), DataError);
  c.set(Attribute::kGrammar, 1.0);
  CHECK(c.at(Attribute::kGrammar) == 1.0);
  CHECK_FALSE(c.complete());
  CHECK(c.missing().size() == kAttributeCount - 1);
  CHECK_THROWS_AS(c.at(Attribute::kCorrectness), DataError);
}

TEST_CASE("aggregate_cards averages per attribute") {
  ScoreCard a = constant_card(0.5);
  a.set(Attribute::kCorrectness, 0.9);
  ScoreCard b = constant_card(0.5);
  b.set(Attribute::kCorrectness, 0.8);
  ScoreCard c = constant_card(0.5);
  c.set(Attribute::kCorrectness, 1.0);

  std::vector<ScoreCard> panel = {a, b, c};
  ScoreCard mean = aggregate_cards(panel);
  CHECK(mean.at(Attribute::kCorrectness) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(mean.at(Attribute::kGrammar) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mean.complete());
}

TEST_CASE("aggregate of a single verdict is the identity") {
  Rng rng(3);
  JudgeVerdict v;
  v.judge_id = "j";
  v.card = random_card(rng);
  std::vector<JudgeVerdict> panel = {v};
  ScoreCard out = aggregate_panel(panel);
  for (Attribute a : all_attributes()) {
    CHECK(out.at(a) == doctest::Approx(v.card.at(a)).epsilon(1e-15));
  }
}

TEST_CASE("aggregate of n copies equals the card") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreCard card = random_card(rng);
    size_t n = 1 + static_cast<size_t>(rng.below(6));
    std::vector<ScoreCard> copies(n, card);
    ScoreCard out = aggregate_cards(copies);
    for (Attribute a : all_attributes()) {
      CHECK(std::abs(out.at(a) - card.at(a)) < 1e-12);
    }
  }
}

TEST_CASE("aggregate rejects empty or incomplete panels") {
  std::vector<ScoreCard> empty;
  CHECK_THROWS_AS(aggregate_cards(empty), DataError);

  ScoreCard partial;
  partial.set(Attribute::kGrammar, 0.5);
  std::vector<ScoreCard> panel = {constant_card(0.5), partial};
  try {
    aggregate_cards(panel);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    // Error names the missing attributes.
    CHECK(std::string(e.what()).find("Faithfulness") != std::string::npos);
  }
}

TEST_CASE("score_difference subtracts in canonical order") {
  ScoreCard a = constant_card(0.5);
  a.set(Attribute::kCorrectness, 0.9);
  ScoreCard b = constant_card(0.5);
  b.set(Attribute::kCorrectness, 0.7);
  FeatureVector d = score_difference(a, b);
  CHECK(d[attribute_index(Attribute::kCorrectness)] == doctest::Approx(0.2));
  CHECK(d[attribute_index(Attribute::kGrammar)] == 0.0);
}

TEST_CASE("score_difference of a card with itself is zero") {
  Rng rng(5);
  ScoreCard a = random_card(rng);
  FeatureVector d = score_difference(a, a);
  for (double x : d) CHECK(x == 0.0);
}

TEST_CASE("score_difference is exactly antisymmetric") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    ScoreCard a = random_card(rng);
    ScoreCard b = random_card(rng);
    FeatureVector ab = score_difference(a, b);
    FeatureVector ba = score_difference(b, a);
    for (size_t i = 0; i < kAttributeCount; ++i) {
      CHECK(ab[i] == -ba[i]);
    }
  }
}

TEST_CASE("score_difference requires complete cards") {
  ScoreCard partial;
  partial.set(Attribute::kGrammar, 0.5);
  CHECK_THROWS_AS(score_difference(partial, constant_card(0.5)), DataError);
  CHECK_THROWS_AS(score_difference(constant_card(0.5), partial), DataError);
}

TEST_CASE("card JSON round-trips and rejects bad input") {
  Rng rng(23);
  ScoreCard card = random_card(rng);
  ojson j = card_to_json(card);
  ScoreCard back = card_from_json(j);
  CHECK(back == card);

  ojson missing = j;
  missing.erase("Correctness");
  CHECK_THROWS_AS(card_from_json(missing), DataError);

  ojson unknown = j;
  unknown["Fluency"] = 0.5;
  CHECK_THROWS_AS(card_from_json(unknown), DataError);

  ojson bad_type = j;
  bad_type["Grammar"] = "high";
  CHECK_THROWS_AS(card_from_json(bad_type), DataError);

  // The coverage alias is accepted on input.
  ojson aliased = j;
  double completeness = aliased["Completeness"].get<double>();
  aliased.erase("Completeness");
  aliased["Coverage/Completeness"] = completeness;
  CHECK(card_from_json(aliased) == card);
}

TEST_CASE("verdict strings follow the release schema") {
  CHECK(verdict_to_string(Verdict::kAWins) == "model_a");
  CHECK(verdict_from_string("tie (bothbad)") == Verdict::kTieBothBad);
  CHECK_THROWS_AS(verdict_from_string("model_c"), DataError);
  for (Verdict v : {Verdict::kAWins, Verdict::kBWins, Verdict::kTie, Verdict::kTieBothBad}) {
    CHECK(verdict_from_string(verdict_to_string(v)) == v);
  }
  CHECK(verdict_label(Verdict::kAWins) == 1.0);
  CHECK(verdict_label(Verdict::kBWins) == 0.0);
  CHECK(verdict_label(Verdict::kTie) == 0.5);
  CHECK(verdict_label(Verdict::kTieBothBad) == 0.5);
}
