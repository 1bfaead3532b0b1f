#include "cfx/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <random>

#include "cfx/error.hpp"
#include "cfx/explanation.hpp"
#include "cfx/generators.hpp"
#include "cfx/oracle.hpp"
#include "cfx/service.hpp"

namespace cfx {

namespace {

struct Args {
  std::string model;
  std::string instance;
  std::string dataset;
  std::string out;
  std::string scheme = "uniform";
  std::string weights;  // JSON array file, overrides --scheme
  std::string polarity = "auto";
  std::string export_lp;
  std::vector<std::string> fixes;
  std::vector<std::string> keep;
  std::uint64_t seed = 0;
  double time_limit = 0.0;
  int target = -1;
  std::size_t k = 1;
  std::size_t validity_samples = 100;
  std::size_t trials = 100;
  std::string host = "127.0.0.1";
  int port = -1;
  std::string model_dir;
};

struct Loaded {
  std::string model_id;
  Model model;
};

Loaded load_model(const std::string& path) {
  const std::string bytes = read_file(path);
  return {content_hash(bytes), parse_model_text(bytes)};
}

Json load_json(const std::string& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

// Feature named by --keep: an exact name, else a 1-based position.
std::string keep_name(const std::string& arg, const FeatureList& features) {
  if (find_feature(features, arg)) return arg;
  std::size_t pos = 0;
  std::size_t used = 0;
  try {
    pos = std::stoul(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == arg.size() && pos >= 1 && pos <= features.size()) return features[pos - 1].name;
  throw Error(ErrorCode::UnknownFeature, "unknown feature '" + arg + "'");
}

void emit(const Args& a, std::ostream& out, const std::string& text) {
  if (a.out.empty()) {
    out << text;
  } else {
    write_file_atomic(a.out, text);
  }
}

struct DatasetInput {
  std::optional<std::string> id;
  std::optional<Dataset> data;
};

DatasetInput load_dataset(const Args& a, const FeatureList& features, std::ostream& err) {
  DatasetInput d;
  if (a.dataset.empty()) return d;
  const std::string bytes = read_file(a.dataset);
  std::vector<std::string> warnings;
  d.data = parse_dataset_csv(bytes, features, &warnings);
  for (const auto& w : warnings) err << "cfx: warning: " << w << "\n";
  d.id = content_hash(bytes);
  return d;
}

WeightVector weights_for(const Args& a, const IndicatorRegistry& registry, const Dataset* data) {
  if (!a.weights.empty()) {
    const Json doc = load_json(a.weights);
    WeightVector w;
    try {
      w.values = doc.get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw Error(ErrorCode::ParseError, "--weights expects a JSON array of numbers");
    }
    if (w.values.size() != registry.size()) {
      throw Error(ErrorCode::MissingWeight, "expected " + std::to_string(registry.size()) + " weights");
    }
    return w;
  }
  return compute_weights(parse_weight_scheme(a.scheme), registry, data);
}

std::vector<Condition> conditions_of(const Args& a, const FeatureList& features) {
  std::vector<Condition> out;
  for (const auto& f : a.fixes) out.push_back(parse_fix(f, features));
  return out;
}

int explain_command(const Args& a, RequestKind kind, std::ostream& out, std::ostream& err) {
  const Loaded m = load_model(a.model);
  const FeatureList& features = features_of(m.model);
  ExplanationRequest r;
  r.kind = kind;
  r.model_id = m.model_id;
  r.instance = parse_instance(load_json(a.instance), features);
  r.polarity = parse_polarity(a.polarity);
  r.seed = a.seed;
  if (a.time_limit > 0.0) r.time_limit = a.time_limit;
  r.validity_samples = a.validity_samples;
  DatasetInput d;
  if (kind == RequestKind::Counterfactual) {
    d = load_dataset(a, features, err);
    r.dataset_id = d.id;
    if (!a.weights.empty()) {
      r.weights = weights_for(a, build_registry(m.model), nullptr).values;
    } else {
      r.scheme = parse_weight_scheme(a.scheme);
    }
    if (a.target >= 0) r.target = a.target;
    r.conditions = conditions_of(a, features);
    r.k = a.k;
  }
  if (kind == RequestKind::PrimeImplicants) {
    for (const auto& k : a.keep) r.keep.push_back(keep_name(k, features));
  }
  const ExplanationFile file = run_request(r, m.model, d.data ? &*d.data : nullptr);
  emit(a, out, render_explanation(file));
  return kExitOk;
}

int weights_command(const Args& a, std::ostream& out, std::ostream& err) {
  const Loaded m = load_model(a.model);
  const DatasetInput d = load_dataset(a, features_of(m.model), err);
  const IndicatorRegistry registry = build_registry(m.model);
  const WeightVector w = weights_for(a, registry, d.data ? &*d.data : nullptr);
  Json doc = Json::object();
  doc["model"] = m.model_id;
  doc["scheme"] = a.weights.empty() ? a.scheme : "explicit";
  doc["dataset"] = d.id ? Json(*d.id) : Json(nullptr);
  Json ws = Json::array();
  for (VarId id = 0; id < registry.size(); ++id) ws.push_back(Json{{"indicator", registry.label(id)}, {"weight", w.values[id]}});
  doc["weights"] = std::move(ws);
  emit(a, out, doc.dump(2) + "\n");
  return kExitOk;
}

std::size_t total_terms(const std::vector<DecisionPolynomial>& dps) {
  std::size_t n = 0;
  for (const auto& dp : dps) n += dp.size();
  return n;
}

int stats_command(const Args& a, std::ostream& out, std::ostream& err) {
  const Loaded m = load_model(a.model);
  const FeatureList& features = features_of(m.model);
  const Instance x = parse_instance(load_json(a.instance), features);
  const DatasetInput d = load_dataset(a, features, err);
  const ModelPolynomials dps = model_polynomials(m.model);
  const IndicatorRegistry& registry = *dps.registry;
  const WeightVector w = weights_for(a, registry, d.data ? &*d.data : nullptr);
  const int target = resolve_target(m.model, x, a.target >= 0 ? std::optional<int>(a.target) : std::nullopt);
  const auto conditions = conditions_of(a, features);
  EncodedProblem enc = encode_counterfactual(m.model, x, w, target, parse_polarity(a.polarity));
  enc.problem = apply_conditions(std::move(enc.problem), *enc.registry, conditions, &x);
  const EncodingStats s = encoding_stats(enc.problem);

  Json doc = Json::object();
  doc["model"] = m.model_id;
  doc["type"] = model_type_name(m.model);
  doc["features"] = features.size();
  doc["indicators"] = registry.size();
  doc["space_size"] = registry.space_size();
  doc["polynomials"] = Json{{"zero_terms", total_terms(dps.zero)}, {"one_terms", total_terms(dps.one)}};
  doc["predicted_class"] = evaluate(m.model, x);
  doc["target_class"] = target;
  doc["polarity"] = enc.polarity;
  Json e = Json::object();
  e["variables"] = s.variables;
  e["constraints"] = s.constraints;
  e["generation"] = s.generation;
  e["consistency"] = s.consistency;
  e["fixed"] = s.fixed;
  e["by_family"] = s.by_family;
  doc["encoding"] = std::move(e);
  if (!a.export_lp.empty()) {
    std::ostringstream lp;
    write_lp(lp, enc.problem, *enc.registry);
    write_file_atomic(a.export_lp, lp.str());
    doc["lp"] = a.export_lp;
  }
  emit(a, out, doc.dump(2) + "\n");
  return kExitOk;
}

struct CheckOutcome {
  Json report;
  bool match = true;
};

// Solver against exhaustive enumeration on one query.
CheckOutcome check_query(const Model& model, const Instance& x, const WeightVector& w, std::optional<int> target,
                         std::span<const Condition> conditions, std::size_t samples, std::mt19937_64& rng) {
  const int t = resolve_target(model, x, target);
  const auto oracle = oracle::brute_counterfactual(model, x, w, t, conditions);
  CheckOutcome c;
  c.report = Json::object();
  c.report["target_class"] = t;
  c.report["oracle"] = oracle.feasible ? Json(oracle.objective_scaled) : Json("infeasible");
  try {
    const CounterfactualSet set = counterfactual(model, x, w, t, conditions);
    c.report["solver"] = set.objective_scaled;
    const IndicatorRegistry registry = build_registry(model);
    std::size_t failures = 0;
    for (const auto& p : sample_region(registry, set, samples, rng)) failures += evaluate(model, p) != t;
    c.report["sample_failures"] = failures;
    const bool in_argmin =
        std::find(oracle.argmin.begin(), oracle.argmin.end(), set.indicators) != oracle.argmin.end();
    c.match = oracle.feasible && oracle.objective_scaled == set.objective_scaled && in_argmin && failures == 0;
  } catch (const Error& e) {
    if (!is_infeasible(e.code())) throw;
    c.report["solver"] = "infeasible";
    c.match = !oracle.feasible;
  }
  c.report["match"] = c.match;
  return c;
}

Model random_model(std::size_t trial, std::mt19937_64& rng) {
  switch (trial % 3) {
    case 0: {
      auto features = gen::mixed_features(3, 1, 3, rng);
      auto pool = gen::threshold_pool(features, 3, rng);
      return validate_model(DecisionTreeModel{features, gen::random_tree(features, pool, {4, 0.8}, rng)});
    }
    case 1: {
      auto features = gen::continuous_features(3);
      auto pool = gen::threshold_pool(features, 3, rng);
      RandomForestModel rf{features, {}};
      const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
      for (std::size_t i = 0; i < m; ++i) rf.trees.push_back(gen::random_tree(features, pool, {3, 0.7}, rng));
      return validate_model(std::move(rf));
    }
    default:
      return validate_model(gen::random_naive_bayes(std::uniform_int_distribution<std::size_t>(2, 7)(rng), 3, rng));
  }
}

int oracle_command(const Args& a, std::ostream& out, std::ostream& err) {
  Json doc = Json::object();
  std::mt19937_64 rng(a.seed);
  std::size_t mismatches = 0;
  if (!a.model.empty()) {
    const Loaded m = load_model(a.model);
    const FeatureList& features = features_of(m.model);
    const Instance x = parse_instance(load_json(a.instance), features);
    const DatasetInput d = load_dataset(a, features, err);
    const WeightVector w = weights_for(a, build_registry(m.model), d.data ? &*d.data : nullptr);
    const auto conditions = conditions_of(a, features);
    CheckOutcome c = check_query(m.model, x, w, a.target >= 0 ? std::optional<int>(a.target) : std::nullopt,
                                 conditions, a.validity_samples, rng);
    mismatches += !c.match;
    doc["model"] = m.model_id;
    doc["check"] = std::move(c.report);
  } else {
    Json failures = Json::array();
    std::size_t infeasible = 0;
    for (std::size_t i = 0; i < a.trials; ++i) {
      const Model model = random_model(i, rng);
      const Instance x = gen::random_instance(features_of(model), rng);
      const IndicatorRegistry registry = build_registry(model);
      WeightVector w = uniform_weights(registry);
      std::uniform_int_distribution<int> quarter(1, 12);
      if (i % 2 == 1) {
        for (auto& v : w.values) v = quarter(rng) / 4.0;
      }
      CheckOutcome c = check_query(model, x, w, std::nullopt, {}, a.validity_samples, rng);
      infeasible += c.report["oracle"] == "infeasible";
      if (!c.match) {
        ++mismatches;
        c.report["trial"] = i;
        c.report["model"] = model_to_json(model);
        c.report["instance"] = instance_to_json(x, features_of(model));
        failures.push_back(std::move(c.report));
      }
    }
    doc["trials"] = a.trials;
    doc["seed"] = a.seed;
    doc["infeasible"] = infeasible;
    doc["failures"] = std::move(failures);
  }
  doc["mismatches"] = mismatches;
  emit(a, out, doc.dump(2) + "\n");
  return mismatches == 0 ? kExitOk : kExitOracleMismatch;
}

int serve_command(const Args& a) {
  ServiceConfig config = ServiceConfig::from_environment();
  config.host = a.host;
  if (a.port >= 0) config.port = a.port;
  if (!a.model_dir.empty()) config.model_dir = a.model_dir;
  return run_http_service(config);
}

int exit_code_for(ErrorCode code) {
  if (is_infeasible(code)) return kExitInfeasible;
  if (is_cap_exceeded(code)) return kExitCapExceeded;
  return kExitUsage;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Counterfactual explanations and prime implicants for tree ensembles and naive Bayes", "cfx"};
  app.require_subcommand(1);

  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--model", a.model, "Model artifact (JSON)")->required();
    sub->add_option("--out", a.out, "Write the result here instead of stdout");
  };
  auto query_opts = [&](CLI::App* sub) {
    model_opts(sub);
    sub->add_option("--instance", a.instance, "Factual instance (JSON object)")->required();
    sub->add_option("--seed", a.seed, "Seed of the region sampling");
    sub->add_option("--time-limit", a.time_limit, "Solver time limit in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--polarity", a.polarity, "Decision polynomials to encode: auto, zero, one");
  };
  auto weight_opts = [&](CLI::App* sub) {
    sub->add_option("--dataset", a.dataset, "CSV file for the mad and std schemes");
    sub->add_option("--scheme", a.scheme, "Weight scheme: uniform, mad, std");
    sub->add_option("--weights", a.weights, "JSON array with one weight per indicator");
  };
  auto cf_opts = [&](CLI::App* sub) {
    query_opts(sub);
    weight_opts(sub);
    sub->add_option("--target", a.target, "Target class (default: the other class)")->check(CLI::Range(0, 1));
    sub->add_option("--fix", a.fixes, "Condition: name=value, name:lo..hi, name<=v, name>v, ...");
    sub->add_option("--validity-samples", a.validity_samples, "Points sampled per region to confirm it");
  };

  auto* explain = app.add_subcommand("explain", "Minimum-cost counterfactual region");
  cf_opts(explain);
  auto* diverse = app.add_subcommand("diverse", "Up to k counterfactual regions under conditions");
  cf_opts(diverse);
  diverse->add_option("--k", a.k, "Number of regions")->check(CLI::PositiveNumber);
  auto* robust = app.add_subcommand("robustness", "Fewest threshold crossings that flip the class");
  query_opts(robust);
  robust->add_option("--validity-samples", a.validity_samples, "Points sampled to confirm the witness");
  auto* pi = app.add_subcommand("pi", "Prime implicant by maximizing the changed features");
  query_opts(pi);
  pi->add_option("--keep", a.keep, "Feature held at its factual value (name or 1-based position)");
  auto* weights = app.add_subcommand("weights", "Print the indicator weights of a scheme");
  model_opts(weights);
  weight_opts(weights);
  auto* stats = app.add_subcommand("stats", "Encoding sizes for a counterfactual query");
  query_opts(stats);
  weight_opts(stats);
  stats->add_option("--target", a.target, "Target class")->check(CLI::Range(0, 1));
  stats->add_option("--fix", a.fixes, "Condition applied before counting");
  stats->add_option("--export-lp", a.export_lp, "Write the problem in LP text form");
  auto* check = app.add_subcommand("oracle-check", "Compare the solver with exhaustive enumeration");
  check->add_option("--model", a.model, "Check this model (otherwise a random suite runs)");
  check->add_option("--instance", a.instance, "Factual instance for --model");
  check->add_option("--out", a.out, "Write the report here instead of stdout");
  check->add_option("--seed", a.seed, "Seed of the random suite and the sampling");
  check->add_option("--trials", a.trials, "Random trials");
  check->add_option("--target", a.target, "Target class")->check(CLI::Range(0, 1));
  check->add_option("--fix", a.fixes, "Condition for --model");
  check->add_option("--validity-samples", a.validity_samples, "Points sampled per region");
  weight_opts(check);
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", a.host, "Listen address");
  serve->add_option("--port", a.port, "Port (default CFX_PORT, else 8080)")->check(CLI::Range(0, 65535));
  serve->add_option("--model-dir", a.model_dir, "Model store (default CFX_MODEL_DIR, else ./cfx-models)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (check->parsed() && !a.model.empty() && a.instance.empty()) {
      throw Error(ErrorCode::InvalidInstance, "--model needs --instance");
    }
    if (explain->parsed()) return explain_command(a, RequestKind::Counterfactual, out, err);
    if (diverse->parsed()) return explain_command(a, RequestKind::Counterfactual, out, err);
    if (robust->parsed()) return explain_command(a, RequestKind::Robustness, out, err);
    if (pi->parsed()) return explain_command(a, RequestKind::PrimeImplicants, out, err);
    if (weights->parsed()) return weights_command(a, out, err);
    if (stats->parsed()) return stats_command(a, out, err);
    if (check->parsed()) return oracle_command(a, out, err);
    if (serve->parsed()) return serve_command(a);
  } catch (const Error& e) {
    err << "cfx: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "cfx: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cfx
