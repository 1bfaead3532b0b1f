#include "cfx/serialization.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cfx/error.hpp"

namespace cfx {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) parse_error(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_error(where + ": missing \"" + key + "\"");
  return *it;
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) parse_error(where + ": expected a string");
  return j.get<std::string>();
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) parse_error(where + ": expected a number");
  return j.get<double>();
}

FeatureList parse_features(const Json& doc) {
  const Json& arr = member(doc, "features", "model");
  if (!arr.is_array()) parse_error("model: \"features\" must be an array");
  FeatureList out;
  for (const auto& f : arr) {
    Feature feature;
    feature.name = as_string(member(f, "name", "feature"), "feature name");
    const std::string kind = as_string(member(f, "kind", "feature " + feature.name), "feature kind");
    if (kind == "continuous") {
      feature.kind = FeatureKind::Continuous;
    } else if (kind == "categorical") {
      feature.kind = FeatureKind::Categorical;
      const Json& cats = member(f, "categories", "feature " + feature.name);
      if (!cats.is_array()) parse_error("feature " + feature.name + ": \"categories\" must be an array");
      for (const auto& c : cats) feature.categories.push_back(as_string(c, "category"));
    } else {
      parse_error("feature " + feature.name + ": unknown kind '" + kind + "'");
    }
    out.push_back(std::move(feature));
  }
  return out;
}

std::size_t feature_index(const FeatureList& features, const std::string& name) {
  auto f = find_feature(features, name);
  if (!f) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + name + "'");
  return *f;
}

std::size_t parse_node(const Json& node, const FeatureList& features, DecisionTree& tree) {
  const std::size_t id = tree.nodes.size();
  tree.nodes.emplace_back();
  if (!node.is_object()) parse_error("tree node: expected an object");
  if (node.contains("class")) {
    const Json& c = node["class"];
    if (!c.is_number_integer() || (c.get<int>() != 0 && c.get<int>() != 1)) {
      parse_error("tree leaf: \"class\" must be 0 or 1");
    }
    tree.nodes[id].label = c.get<int>();
    return id;
  }
  const std::size_t f = feature_index(features, as_string(member(node, "feature", "tree node"), "tree node feature"));
  Predicate p;
  if (features[f].kind == FeatureKind::Continuous) {
    p = Predicate::at_most(f, as_number(member(node, "threshold", "tree node on " + features[f].name), "threshold"));
  } else {
    const std::string cat = as_string(member(node, "category", "tree node on " + features[f].name), "category");
    auto c = find_category(features[f], cat);
    if (!c) throw Error(ErrorCode::InvalidModel, "unknown category '" + cat + "' of '" + features[f].name + "'");
    p = Predicate::equals(f, *c);
  }
  const std::size_t t = parse_node(member(node, "true", "tree node"), features, tree);
  const std::size_t e = parse_node(member(node, "false", "tree node"), features, tree);
  TreeNode& n = tree.nodes[id];
  n.is_leaf = false;
  n.predicate = p;
  n.true_child = t;
  n.false_child = e;
  return id;
}

DecisionTree parse_tree(const Json& root, const FeatureList& features) {
  DecisionTree tree;
  parse_node(root, features, tree);
  return tree;
}

Json node_to_json(const DecisionTree& tree, std::size_t id, const FeatureList& features) {
  const TreeNode& n = tree.nodes.at(id);
  Json out = Json::object();
  if (n.is_leaf) {
    out["class"] = n.label;
    return out;
  }
  const Feature& f = features.at(n.predicate.feature);
  out["feature"] = f.name;
  if (n.predicate.test == Predicate::Test::Threshold) {
    out["threshold"] = n.predicate.threshold;
  } else {
    out["category"] = f.categories.at(n.predicate.category);
  }
  out["true"] = node_to_json(tree, n.true_child, features);
  out["false"] = node_to_json(tree, n.false_child, features);
  return out;
}

std::array<double, 2> parse_pair(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) parse_error(where + ": expected [p0, p1]");
  return {as_number(j[0], where), as_number(j[1], where)};
}

NaiveBayesModel parse_naive_bayes(const Json& doc, FeatureList features) {
  NaiveBayesModel nb;
  const Json& body = member(doc, "nb", "naive_bayes model");
  nb.prior = parse_pair(member(body, "prior", "nb"), "nb prior");
  const Json& cpt = member(body, "cpt", "nb");
  if (!cpt.is_object()) parse_error("nb: \"cpt\" must be an object");
  for (auto it = cpt.begin(); it != cpt.end(); ++it) feature_index(features, it.key());
  nb.cpt.resize(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind != FeatureKind::Categorical) {
      throw Error(ErrorCode::InvalidModel, "naive Bayes feature '" + features[f].name + "' must be categorical");
    }
    const Json& table = member(cpt, features[f].name.c_str(), "nb cpt");
    nb.cpt[f].resize(features[f].categories.size());
    for (auto it = table.begin(); it != table.end(); ++it) {
      if (!find_category(features[f], it.key())) {
        throw Error(ErrorCode::InvalidModel, "unknown category '" + it.key() + "' of '" + features[f].name + "'");
      }
    }
    for (std::size_t c = 0; c < features[f].categories.size(); ++c) {
      const auto& cat = features[f].categories[c];
      nb.cpt[f][c] = parse_pair(member(table, cat.c_str(), "nb cpt " + features[f].name), "nb cpt " + features[f].name);
    }
  }
  nb.features = std::move(features);
  return nb;
}

}  // namespace

Model parse_model(const Json& doc, const ValidationOptions& options) {
  try {
    const std::string schema = as_string(member(doc, "schema", "model"), "schema");
    if (schema != kModelSchema) parse_error("unsupported schema '" + schema + "'");
    const std::string type = as_string(member(doc, "type", "model"), "type");
    FeatureList features = parse_features(doc);
    Model model;
    if (type == "decision_tree") {
      DecisionTree tree = parse_tree(member(doc, "tree", "decision_tree model"), features);
      model = DecisionTreeModel{std::move(features), std::move(tree)};
    } else if (type == "random_forest") {
      const Json& trees = member(doc, "trees", "random_forest model");
      if (!trees.is_array()) parse_error("random_forest: \"trees\" must be an array");
      RandomForestModel rf;
      for (const auto& t : trees) rf.trees.push_back(parse_tree(t, features));
      rf.features = std::move(features);
      model = std::move(rf);
    } else if (type == "naive_bayes") {
      model = parse_naive_bayes(doc, std::move(features));
    } else {
      parse_error("unknown model type '" + type + "'");
    }
    return validate_model(std::move(model), options);
  } catch (const Json::exception& e) {
    parse_error(std::string("model: ") + e.what());
  }
}

Model parse_model_text(std::string_view text, const ValidationOptions& options) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    parse_error(std::string("model is not valid JSON: ") + e.what());
  }
  return parse_model(doc, options);
}

Json model_to_json(const Model& model) {
  Json out = Json::object();
  out["schema"] = kModelSchema;
  out["type"] = model_type_name(model);
  const FeatureList& features = features_of(model);
  Json fs = Json::array();
  for (const auto& f : features) {
    Json j = Json::object();
    j["name"] = f.name;
    j["kind"] = f.kind == FeatureKind::Continuous ? "continuous" : "categorical";
    if (f.kind == FeatureKind::Categorical) j["categories"] = f.categories;
    fs.push_back(std::move(j));
  }
  out["features"] = std::move(fs);
  if (const auto* dt = std::get_if<DecisionTreeModel>(&model)) {
    out["tree"] = node_to_json(dt->tree, DecisionTree::root, features);
  } else if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
    Json trees = Json::array();
    for (const auto& t : rf->trees) trees.push_back(node_to_json(t, DecisionTree::root, features));
    out["trees"] = std::move(trees);
  } else {
    const auto& nb = std::get<NaiveBayesModel>(model);
    Json body = Json::object();
    body["prior"] = {nb.prior[0], nb.prior[1]};
    Json cpt = Json::object();
    for (std::size_t f = 0; f < features.size(); ++f) {
      Json table = Json::object();
      for (std::size_t c = 0; c < features[f].categories.size(); ++c) {
        table[features[f].categories[c]] = {nb.cpt[f][c][0], nb.cpt[f][c][1]};
      }
      cpt[features[f].name] = std::move(table);
    }
    body["cpt"] = std::move(cpt);
    out["nb"] = std::move(body);
  }
  return out;
}

Instance parse_instance(const Json& doc, const FeatureList& features) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInstance, "instance must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!find_feature(features, it.key())) {
      throw Error(ErrorCode::InvalidInstance, "instance has unknown feature '" + it.key() + "'");
    }
  }
  Instance x;
  for (const auto& f : features) {
    auto it = doc.find(f.name);
    if (it == doc.end()) throw Error(ErrorCode::InvalidInstance, "instance lacks feature '" + f.name + "'");
    if (f.kind == FeatureKind::Continuous) {
      if (!it->is_number()) throw Error(ErrorCode::InvalidInstance, "feature '" + f.name + "' needs a number");
      x.values.push_back(Value::of(it->get<double>()));
    } else {
      if (!it->is_string()) throw Error(ErrorCode::InvalidInstance, "feature '" + f.name + "' needs a category name");
      auto c = find_category(f, it->get<std::string>());
      if (!c) {
        throw Error(ErrorCode::InvalidInstance,
                    "'" + it->get<std::string>() + "' is not a category of '" + f.name + "'");
      }
      x.values.push_back(Value::of_category(*c));
    }
  }
  validate_instance(features, x);
  return x;
}

Json instance_to_json(const Instance& instance, const FeatureList& features) {
  Json out = Json::object();
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f].kind == FeatureKind::Continuous) {
      out[features[f].name] = instance.values[f].number;
    } else {
      out[features[f].name] = features[f].categories.at(instance.values[f].category);
    }
  }
  return out;
}

namespace {

[[noreturn]] void bad_condition(const std::string& what) { throw Error(ErrorCode::InvalidCondition, what); }

double condition_number(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number()) bad_condition(std::string("condition needs a numeric \"") + key + "\"");
  return it->get<double>();
}

bool condition_flag(const Json& doc, const char* key, bool fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_boolean()) bad_condition(std::string("\"") + key + "\" must be a boolean");
  return it->get<bool>();
}

}  // namespace

Condition parse_condition(const Json& doc) {
  if (!doc.is_object()) bad_condition("condition must be an object");
  auto fit = doc.find("feature");
  auto oit = doc.find("op");
  if (fit == doc.end() || !fit->is_string()) bad_condition("condition needs a \"feature\" name");
  if (oit == doc.end() || !oit->is_string()) bad_condition("condition needs an \"op\"");
  const std::string feature = fit->get<std::string>();
  const std::string op = oit->get<std::string>();
  if (op == "le") return Condition::at_most(feature, condition_number(doc, "value"));
  if (op == "lt") return Condition::less_than(feature, condition_number(doc, "value"));
  if (op == "ge") return Condition::at_least(feature, condition_number(doc, "value"));
  if (op == "gt") return Condition::greater_than(feature, condition_number(doc, "value"));
  if (op == "in_interval") {
    Condition c = Condition::between(feature, condition_number(doc, "lo"), condition_number(doc, "hi"));
    c.interval.lo_closed = condition_flag(doc, "lo_closed", true);
    c.interval.hi_closed = condition_flag(doc, "hi_closed", true);
    return c;
  }
  if (op == "eq" || op == "ne") {
    auto vit = doc.find("value");
    if (vit == doc.end()) bad_condition("condition needs a \"value\"");
    std::string value;
    if (vit->is_string()) {
      value = vit->get<std::string>();
    } else if (vit->is_number()) {
      value = format_number(vit->get<double>());
    } else {
      bad_condition("\"value\" must be a string or a number");
    }
    return op == "eq" ? Condition::equals(feature, value) : Condition::not_equals(feature, value);
  }
  if (op == "keep") return Condition::keep(feature);
  bad_condition("unknown condition op '" + op + "'");
}

Json condition_to_json(const Condition& c) {
  Json out = Json::object();
  out["feature"] = c.feature;
  switch (c.kind) {
    case Condition::Kind::Keep: out["op"] = "keep"; break;
    case Condition::Kind::Equals: out["op"] = "eq"; out["value"] = c.category; break;
    case Condition::Kind::NotEquals: out["op"] = "ne"; out["value"] = c.category; break;
    case Condition::Kind::Interval: {
      const Interval& iv = c.interval;
      if (std::isinf(iv.lo) && std::isfinite(iv.hi)) {
        out["op"] = iv.hi_closed ? "le" : "lt";
        out["value"] = iv.hi;
      } else if (std::isinf(iv.hi) && std::isfinite(iv.lo)) {
        out["op"] = iv.lo_closed ? "ge" : "gt";
        out["value"] = iv.lo;
      } else {
        out["op"] = "in_interval";
        out["lo"] = iv.lo;
        out["hi"] = iv.hi;
        out["lo_closed"] = iv.lo_closed;
        out["hi_closed"] = iv.hi_closed;
      }
      break;
    }
  }
  return out;
}

namespace {

double fix_number(std::string_view text, std::string_view whole) {
  std::string s(text);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  bad_condition("'" + std::string(whole) + "': '" + s + "' is not a number");
}

}  // namespace

Condition parse_fix(std::string_view text, const FeatureList& features) {
  const auto pos = text.find_first_of("!<>=:");
  if (pos == std::string_view::npos || pos == 0) {
    bad_condition("'" + std::string(text) + "': expected name=value, name:lo..hi or a comparison");
  }
  const std::string name(text.substr(0, pos));
  auto f = find_feature(features, name);
  if (!f) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + name + "'");
  const bool categorical = features[*f].kind == FeatureKind::Categorical;
  auto rest = [&](std::size_t n) { return text.substr(pos + n); };
  const char c = text[pos];
  const char next = pos + 1 < text.size() ? text[pos + 1] : '\0';
  if (c == '!' && next == '=') return Condition::not_equals(name, std::string(rest(2)));
  if (c == '<' && next == '=') return Condition::at_most(name, fix_number(rest(2), text));
  if (c == '>' && next == '=') return Condition::at_least(name, fix_number(rest(2), text));
  if (c == '<') return Condition::less_than(name, fix_number(rest(1), text));
  if (c == '>') return Condition::greater_than(name, fix_number(rest(1), text));
  if (c == '=') {
    if (categorical) return Condition::equals(name, std::string(rest(1)));
    return Condition::between(name, fix_number(rest(1), text), fix_number(rest(1), text));
  }
  if (c == ':') {
    const auto body = rest(1);
    const auto dots = body.find("..");
    if (dots == std::string_view::npos) bad_condition("'" + std::string(text) + "': expected name:lo..hi");
    return Condition::between(name, fix_number(body.substr(0, dots), text), fix_number(body.substr(dots + 2), text));
  }
  bad_condition("'" + std::string(text) + "': unrecognized operator");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move file into '" + path.string() + "'");
  }
}

}  // namespace cfx
