#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfx/csv.hpp"
#include "cfx/explainer.hpp"
#include "cfx/serialization.hpp"

namespace cfx {

inline constexpr std::string_view kExplanationSchema = "cfx-explanation/1";

enum class RequestKind { Counterfactual, Robustness, PrimeImplicants };
std::string_view to_string(RequestKind kind);

// Everything that determines an explanation. The CLI and the service both build one of these and
// hand it to run_request, which is why their output bytes agree.
struct ExplanationRequest {
  RequestKind kind = RequestKind::Counterfactual;
  std::string model_id;                 // content hash of the model artifact
  Instance instance;
  std::optional<WeightScheme> scheme;   // unset when explicit weights are given
  std::vector<double> weights;          // explicit, one per indicator
  std::optional<std::string> dataset_id;
  std::optional<int> target;
  std::vector<Condition> conditions;
  std::size_t k = 1;
  std::vector<std::string> keep;
  Polarity polarity = Polarity::Auto;
  std::uint64_t seed = 0;
  std::optional<double> time_limit;
  std::size_t validity_samples = 100;
};

// Request bodies of the service, also the "request" echo of an explanation file.
Json request_to_json(const ExplanationRequest& request, const FeatureList& features);
ExplanationRequest request_from_json(const Json& body, RequestKind kind, std::string model_id,
                                     const FeatureList& features);

Polarity parse_polarity(std::string_view name);
std::string_view to_string(Polarity polarity);

// One feature of a returned region. Changed features carry the region as a condition (le, lt,
// ge, gt, in_interval or eq); unchanged ones only their name.
struct RegionEntry {
  std::string feature;
  bool changed = false;
  Condition region;

  bool operator==(const RegionEntry&) const = default;
};

struct RegionResult {
  std::int64_t objective_scaled = 0;
  std::vector<RegionEntry> conditions;
  std::vector<std::pair<std::string, int>> assignment;  // indicator label, value

  bool operator==(const RegionResult&) const = default;
};

struct SolverReport {
  std::string status = "optimal";
  std::uint64_t nodes = 0;
  std::uint64_t canonical_probes = 0;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  int polarity = 0;

  bool operator==(const SolverReport&) const = default;
};

struct PrimeImplicantReport {
  std::vector<std::string> implicant;
  std::vector<std::string> changed;
  std::string verification;
  std::optional<Json> counterexample;
  std::vector<std::pair<std::string, int>> assignment;

  bool operator==(const PrimeImplicantReport&) const = default;
};

struct ValidityReport {
  std::size_t samples = 0;  // per region
  std::uint64_t seed = 0;
  std::size_t failures = 0;

  bool operator==(const ValidityReport&) const = default;
};

struct ExplanationFile {
  Json request;
  RequestKind kind = RequestKind::Counterfactual;
  int predicted_class = 0;
  std::optional<int> target_class;
  std::int64_t scale = 1;
  std::optional<RegionResult> result;
  std::vector<RegionResult> alternatives;  // further regions of a diverse request, objective order
  std::optional<std::int64_t> robustness;
  std::optional<PrimeImplicantReport> prime_implicant;
  SolverReport solver;
  std::vector<std::pair<std::string, double>> weights;
  std::optional<ValidityReport> validity;

  bool operator==(const ExplanationFile&) const = default;
};

Json explanation_to_json(const ExplanationFile& file);
ExplanationFile explanation_from_json(const Json& doc);
// Pretty-printed JSON with a trailing newline; the exact bytes written by the CLI and served.
std::string render_explanation(const ExplanationFile& file);

RegionResult region_result(const IndicatorRegistry& registry, const CounterfactualSet& set);

// Runs the request against a validated model. `dataset` is needed by the mad and std schemes.
ExplanationFile run_request(const ExplanationRequest& request, const Model& model, const Dataset* dataset);

// Lowercase hex SHA-256 of the bytes; model and dataset ids.
std::string content_hash(std::string_view bytes);

}  // namespace cfx
