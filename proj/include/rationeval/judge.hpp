#pragma once

#include <chrono>
#include <string>

#include "rationeval/types.hpp"

namespace rationeval::judge {

struct JudgeConfig {
  std::string judge_id;
  std::string endpoint_url;  // OpenAI-style base URL, e.g. https://host/v1
  std::string model_name;
  double native_scale_max = 1.0;  // 1.0 or 10.0
  double temperature = 0.0;
  int max_retries = 2;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds initial_backoff{250};
};

struct PromptTemplate {
  std::string template_id;
  std::string body;  // contains {question} and {rationale} exactly once each
  double scale_max = 1.0;
};

// Built-in attribute scoring templates. The 0-1 template is the default;
// the 0-10 variant targets judges that calibrate better on integer scales.
const PromptTemplate& scale_one_template();
const PromptTemplate& scale_ten_template();

// Template for the judge's declared scale.
const PromptTemplate& template_for_scale(double native_scale_max);

// Byte-exact substitution of the two placeholders; inserted text is never
// re-scanned. Throws DataError if a placeholder cannot be resolved.
std::string render_prompt(const PromptTemplate& tmpl, const std::string& question,
                          const std::string& rationale);

// Parses a judge response: locates the `scores` and `explanations`
// assignments (brace-delimited, double-quoted keys), strips surrounding
// code fences, aliases "Coverage/Completeness", range-checks against the
// judge's native scale and normalizes. All failures are DataError.
JudgeVerdict parse_verdict(const std::string& raw, const JudgeConfig& config);

}  // namespace rationeval::judge
