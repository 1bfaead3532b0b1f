#include "cfx/explanation.hpp"

#include <openssl/evp.h>

#include <random>

#include "cfx/error.hpp"

namespace cfx {

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::Counterfactual: return "counterfactual";
    case RequestKind::Robustness: return "robustness";
    case RequestKind::PrimeImplicants: return "prime_implicants";
  }
  return "counterfactual";
}

namespace {

[[noreturn]] void bad_request(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

RequestKind parse_kind(std::string_view name) {
  if (name == "counterfactual") return RequestKind::Counterfactual;
  if (name == "robustness") return RequestKind::Robustness;
  if (name == "prime_implicants") return RequestKind::PrimeImplicants;
  bad_request("unknown explanation kind '" + std::string(name) + "'");
}

template <typename T>
T unsigned_field(const Json& j, const char* key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    bad_request(std::string("\"") + key + "\" must be a nonnegative integer");
  }
  return static_cast<T>(j.get<std::uint64_t>());
}

Json optional_json(const auto& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Polarity parse_polarity(std::string_view name) {
  if (name == "auto") return Polarity::Auto;
  if (name == "zero" || name == "0") return Polarity::Zero;
  if (name == "one" || name == "1") return Polarity::One;
  throw Error(ErrorCode::InvalidCondition, "polarity must be auto, zero or one");
}

std::string_view to_string(Polarity polarity) {
  switch (polarity) {
    case Polarity::Auto: return "auto";
    case Polarity::Zero: return "zero";
    case Polarity::One: return "one";
  }
  return "auto";
}

Json request_to_json(const ExplanationRequest& r, const FeatureList& features) {
  Json out = Json::object();
  out["kind"] = to_string(r.kind);
  out["model"] = r.model_id;
  out["instance"] = instance_to_json(r.instance, features);
  if (r.kind == RequestKind::Counterfactual) {
    if (r.scheme) {
      out["scheme"] = to_string(*r.scheme);
    } else {
      out["weights"] = r.weights;
    }
    out["dataset"] = optional_json(r.dataset_id);
    out["target"] = optional_json(r.target);
    Json cs = Json::array();
    for (const auto& c : r.conditions) cs.push_back(condition_to_json(c));
    out["conditions"] = std::move(cs);
    out["k"] = r.k;
  }
  if (r.kind == RequestKind::PrimeImplicants) out["keep"] = r.keep;
  out["polarity"] = to_string(r.polarity);
  out["seed"] = r.seed;
  out["time_limit"] = optional_json(r.time_limit);
  if (r.kind != RequestKind::PrimeImplicants) out["validity_samples"] = r.validity_samples;
  return out;
}

ExplanationRequest request_from_json(const Json& body, RequestKind kind, std::string model_id,
                                     const FeatureList& features) {
  if (!body.is_object()) bad_request("request body must be a JSON object");
  ExplanationRequest r;
  r.kind = kind;
  r.model_id = std::move(model_id);
  r.scheme = WeightScheme::Uniform;
  bool has_instance = false;
  for (auto it = body.begin(); it != body.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "kind") {
      if (!v.is_string() || parse_kind(v.get<std::string>()) != kind) bad_request("\"kind\" does not match the endpoint");
    } else if (key == "model") {
      if (!v.is_string() || v.get<std::string>() != r.model_id) bad_request("\"model\" does not match the endpoint");
    } else if (key == "instance") {
      r.instance = parse_instance(v, features);
      has_instance = true;
    } else if (key == "polarity") {
      if (!v.is_string()) bad_request("\"polarity\" must be a string");
      r.polarity = parse_polarity(v.get<std::string>());
    } else if (key == "seed") {
      r.seed = unsigned_field<std::uint64_t>(v, "seed");
    } else if (key == "time_limit") {
      if (v.is_null()) continue;
      if (!v.is_number() || !(v.get<double>() > 0.0)) bad_request("\"time_limit\" must be a positive number");
      r.time_limit = v.get<double>();
    } else if (key == "validity_samples" && kind != RequestKind::PrimeImplicants) {
      r.validity_samples = unsigned_field<std::size_t>(v, "validity_samples");
    } else if (kind == RequestKind::Counterfactual && key == "scheme") {
      if (!v.is_string()) bad_request("\"scheme\" must be a string");
      if (body.contains("weights")) bad_request("give either \"scheme\" or \"weights\", not both");
      r.scheme = parse_weight_scheme(v.get<std::string>());
    } else if (kind == RequestKind::Counterfactual && key == "weights") {
      if (!v.is_array()) bad_request("\"weights\" must be an array of numbers");
      for (const auto& w : v) {
        if (!w.is_number() || !(w.get<double>() >= 0.0)) bad_request("weights must be nonnegative numbers");
        r.weights.push_back(w.get<double>());
      }
      r.scheme.reset();
    } else if (kind == RequestKind::Counterfactual && key == "dataset") {
      if (v.is_null()) continue;
      if (!v.is_string()) bad_request("\"dataset\" must be a dataset id");
      r.dataset_id = v.get<std::string>();
    } else if (kind == RequestKind::Counterfactual && key == "target") {
      if (v.is_null()) continue;
      if (!v.is_number_integer()) bad_request("\"target\" must be 0 or 1");
      r.target = v.get<int>();
    } else if (kind == RequestKind::Counterfactual && key == "conditions") {
      if (!v.is_array()) bad_request("\"conditions\" must be an array");
      for (const auto& c : v) r.conditions.push_back(parse_condition(c));
    } else if (kind == RequestKind::Counterfactual && key == "k") {
      r.k = unsigned_field<std::size_t>(v, "k");
      if (r.k == 0) bad_request("\"k\" must be at least 1");
    } else if (kind == RequestKind::PrimeImplicants && key == "keep") {
      if (!v.is_array()) bad_request("\"keep\" must be an array of feature names");
      for (const auto& name : v) {
        if (!name.is_string()) bad_request("\"keep\" must be an array of feature names");
        r.keep.push_back(name.get<std::string>());
      }
    } else {
      bad_request("unexpected field \"" + key + "\"");
    }
  }
  if (!has_instance) bad_request("request needs an \"instance\"");
  return r;
}

namespace {

Json region_entry_to_json(const RegionEntry& e) {
  if (e.changed) return condition_to_json(e.region);
  Json out = Json::object();
  out["feature"] = e.feature;
  out["op"] = "unchanged";
  return out;
}

RegionEntry region_entry_from_json(const Json& j) {
  RegionEntry e;
  if (j.is_object() && j.value("op", "") == "unchanged") {
    e.feature = j.at("feature").get<std::string>();
    e.region = Condition::keep(e.feature);
    return e;
  }
  e.region = parse_condition(j);
  e.feature = e.region.feature;
  e.changed = true;
  return e;
}

Json assignment_to_json(const std::vector<std::pair<std::string, int>>& a) {
  Json out = Json::array();
  for (const auto& [label, value] : a) {
    Json e = Json::object();
    e["indicator"] = label;
    e["value"] = value;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::pair<std::string, int>> assignment_from_json(const Json& j) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& e : j) out.emplace_back(e.at("indicator").get<std::string>(), e.at("value").get<int>());
  return out;
}

void put_region(Json& out, const RegionResult& r, std::int64_t scale) {
  out["objective"] = static_cast<double>(r.objective_scaled) / static_cast<double>(scale);
  out["objective_scaled"] = r.objective_scaled;
  out["scale"] = scale;
  Json cs = Json::array();
  for (const auto& e : r.conditions) cs.push_back(region_entry_to_json(e));
  out["conditions"] = std::move(cs);
  out["assignment"] = assignment_to_json(r.assignment);
}

RegionResult get_region(const Json& j) {
  RegionResult r;
  r.objective_scaled = j.at("objective_scaled").get<std::int64_t>();
  for (const auto& c : j.at("conditions")) r.conditions.push_back(region_entry_from_json(c));
  r.assignment = assignment_from_json(j.at("assignment"));
  return r;
}

std::vector<std::string> strings_from(const Json& j) { return j.get<std::vector<std::string>>(); }

}  // namespace

Json explanation_to_json(const ExplanationFile& f) {
  Json out = Json::object();
  out["schema"] = kExplanationSchema;
  out["kind"] = to_string(f.kind);
  out["request"] = f.request;
  out["predicted_class"] = f.predicted_class;
  if (f.target_class) out["target_class"] = *f.target_class;
  if (f.result) put_region(out, *f.result, f.scale);
  if (!f.alternatives.empty()) {
    Json alts = Json::array();
    for (const auto& a : f.alternatives) {
      Json j = Json::object();
      put_region(j, a, f.scale);
      alts.push_back(std::move(j));
    }
    out["alternatives"] = std::move(alts);
  }
  if (f.robustness) out["robustness"] = *f.robustness;
  if (f.prime_implicant) {
    const auto& pi = *f.prime_implicant;
    Json j = Json::object();
    j["implicant"] = pi.implicant;
    j["changed"] = pi.changed;
    j["verification"] = pi.verification;
    j["counterexample"] = pi.counterexample ? *pi.counterexample : Json(nullptr);
    j["assignment"] = assignment_to_json(pi.assignment);
    out["prime_implicant"] = std::move(j);
  }
  Json s = Json::object();
  s["status"] = f.solver.status;
  s["nodes"] = f.solver.nodes;
  s["canonical_probes"] = f.solver.canonical_probes;
  s["variables"] = f.solver.variables;
  s["constraints"] = f.solver.constraints;
  s["polarity"] = f.solver.polarity;
  out["solver"] = std::move(s);
  if (!f.weights.empty()) {
    Json ws = Json::array();
    for (const auto& [label, w] : f.weights) {
      Json e = Json::object();
      e["indicator"] = label;
      e["weight"] = w;
      ws.push_back(std::move(e));
    }
    out["weights"] = std::move(ws);
  }
  if (f.validity) {
    Json v = Json::object();
    v["samples"] = f.validity->samples;
    v["seed"] = f.validity->seed;
    v["failures"] = f.validity->failures;
    out["validity"] = std::move(v);
  }
  return out;
}

ExplanationFile explanation_from_json(const Json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kExplanationSchema) bad_request("unsupported explanation schema");
    ExplanationFile f;
    f.kind = parse_kind(doc.at("kind").get<std::string>());
    f.request = doc.at("request");
    f.predicted_class = doc.at("predicted_class").get<int>();
    if (doc.contains("target_class")) f.target_class = doc["target_class"].get<int>();
    if (doc.contains("conditions")) {
      f.scale = doc.at("scale").get<std::int64_t>();
      f.result = get_region(doc);
    }
    if (doc.contains("alternatives")) {
      for (const auto& a : doc["alternatives"]) f.alternatives.push_back(get_region(a));
    }
    if (doc.contains("robustness")) f.robustness = doc["robustness"].get<std::int64_t>();
    if (doc.contains("prime_implicant")) {
      const Json& j = doc["prime_implicant"];
      PrimeImplicantReport pi;
      pi.implicant = strings_from(j.at("implicant"));
      pi.changed = strings_from(j.at("changed"));
      pi.verification = j.at("verification").get<std::string>();
      if (!j.at("counterexample").is_null()) pi.counterexample = j["counterexample"];
      pi.assignment = assignment_from_json(j.at("assignment"));
      f.prime_implicant = std::move(pi);
    }
    const Json& s = doc.at("solver");
    f.solver.status = s.at("status").get<std::string>();
    f.solver.nodes = s.at("nodes").get<std::uint64_t>();
    f.solver.canonical_probes = s.at("canonical_probes").get<std::uint64_t>();
    f.solver.variables = s.at("variables").get<std::size_t>();
    f.solver.constraints = s.at("constraints").get<std::size_t>();
    f.solver.polarity = s.at("polarity").get<int>();
    if (doc.contains("weights")) {
      for (const auto& e : doc["weights"]) {
        f.weights.emplace_back(e.at("indicator").get<std::string>(), e.at("weight").get<double>());
      }
    }
    if (doc.contains("validity")) {
      const Json& v = doc["validity"];
      f.validity = ValidityReport{v.at("samples").get<std::size_t>(), v.at("seed").get<std::uint64_t>(),
                                  v.at("failures").get<std::size_t>()};
    }
    return f;
  } catch (const Json::exception& e) {
    bad_request(std::string("malformed explanation file: ") + e.what());
  }
}

std::string render_explanation(const ExplanationFile& file) { return explanation_to_json(file).dump(2) + "\n"; }

namespace {

std::vector<std::pair<std::string, int>> labelled(const IndicatorRegistry& registry, std::span<const std::uint8_t> a) {
  std::vector<std::pair<std::string, int>> out;
  for (VarId id = 0; id < registry.size(); ++id) out.emplace_back(registry.label(id), a[id]);
  return out;
}

SolverReport report_of(const SolveStats& stats, const ProblemShape& shape) {
  return {"optimal", stats.nodes, stats.canonical_probes, shape.variables, shape.constraints, shape.polarity};
}

std::size_t count_failures(const Model& model, const IndicatorRegistry& registry, const CounterfactualSet& set,
                           std::size_t samples, std::mt19937_64& rng) {
  std::size_t failures = 0;
  for (const auto& x : sample_region(registry, set, samples, rng)) {
    if (evaluate(model, x) != set.target_class) ++failures;
  }
  return failures;
}

}  // namespace

RegionResult region_result(const IndicatorRegistry& registry, const CounterfactualSet& set) {
  const FeatureList& features = registry.features();
  RegionResult r;
  r.objective_scaled = set.objective_scaled;
  for (const auto& fc : set.conditions) {
    RegionEntry e;
    e.feature = features[fc.feature].name;
    e.changed = fc.changed;
    if (!fc.changed) {
      e.region = Condition::keep(e.feature);
    } else if (features[fc.feature].kind == FeatureKind::Categorical) {
      e.region = Condition::equals(e.feature, features[fc.feature].categories[fc.category]);
    } else {
      Condition c{e.feature, Condition::Kind::Interval, fc.interval, {}};
      // The wire form is canonical, so go through it once.
      e.region = parse_condition(condition_to_json(c));
    }
    r.conditions.push_back(std::move(e));
  }
  r.assignment = labelled(registry, set.indicators);
  return r;
}

ExplanationFile run_request(const ExplanationRequest& request, const Model& model, const Dataset* dataset) {
  const FeatureList& features = features_of(model);
  validate_instance(features, request.instance);
  ExplainOptions options;
  options.polarity = request.polarity;
  if (request.time_limit) options.solver = SolverConfig::with_time_limit(*request.time_limit);

  ExplanationFile file;
  file.request = request_to_json(request, features);
  file.kind = request.kind;
  file.predicted_class = evaluate(model, request.instance);
  const IndicatorRegistry registry = build_registry(model);
  std::mt19937_64 rng(request.seed);

  auto record_weights = [&](const WeightVector& w) {
    for (VarId id = 0; id < registry.size(); ++id) file.weights.emplace_back(registry.label(id), w.values[id]);
  };

  switch (request.kind) {
    case RequestKind::Counterfactual: {
      WeightVector weights;
      if (request.scheme) {
        weights = compute_weights(*request.scheme, registry, dataset);
      } else {
        if (request.weights.size() != registry.size()) {
          throw Error(ErrorCode::MissingWeight, "expected " + std::to_string(registry.size()) + " weights, got " +
                                                    std::to_string(request.weights.size()));
        }
        weights.values = request.weights;
      }
      record_weights(weights);
      std::vector<CounterfactualSet> sets;
      if (request.k == 1) {
        sets.push_back(counterfactual(model, request.instance, weights, request.target, request.conditions, options));
      } else {
        sets = diverse_counterfactual(model, request.instance, weights, request.conditions, request.k, request.target,
                                      options);
      }
      const CounterfactualSet& best = sets.front();
      file.target_class = best.target_class;
      file.scale = best.scale;
      file.result = region_result(registry, best);
      SolveStats total;
      ValidityReport validity{request.validity_samples, request.seed, 0};
      for (std::size_t i = 0; i < sets.size(); ++i) {
        if (i > 0) file.alternatives.push_back(region_result(registry, sets[i]));
        total.nodes += sets[i].stats.nodes;
        total.canonical_probes += sets[i].stats.canonical_probes;
        validity.failures += count_failures(model, registry, sets[i], request.validity_samples, rng);
      }
      file.solver = report_of(total, best.shape);
      file.validity = validity;
      break;
    }
    case RequestKind::Robustness: {
      RobustnessResult r = robustness(model, request.instance, options);
      record_weights(uniform_weights(registry));
      file.target_class = r.witness.target_class;
      file.scale = r.witness.scale;
      file.result = region_result(registry, r.witness);
      file.robustness = r.value;
      file.solver = report_of(r.witness.stats, r.witness.shape);
      file.validity = ValidityReport{request.validity_samples, request.seed,
                                     count_failures(model, registry, r.witness, request.validity_samples, rng)};
      break;
    }
    case RequestKind::PrimeImplicants: {
      PrimeImplicantResult pi = prime_implicants(model, request.instance, request.keep, options);
      PrimeImplicantReport report;
      for (auto f : pi.implicant) report.implicant.push_back(features[f].name);
      for (auto f : pi.changed) report.changed.push_back(features[f].name);
      report.verification = std::string(to_string(pi.verification));
      if (pi.counterexample) report.counterexample = instance_to_json(*pi.counterexample, features);
      report.assignment = labelled(registry, pi.indicators);
      file.prime_implicant = std::move(report);
      file.solver = report_of(pi.stats, pi.shape);
      break;
    }
  }
  return file;
}

std::string content_hash(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace cfx
