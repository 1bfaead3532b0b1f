#include "cfx/service.hpp"

#include <httplib.h>

#include <cstdio>
#include <cstdlib>

#include "cfx/explanation.hpp"
#include "cfx/serialization.hpp"

namespace cfx {

ServiceConfig ServiceConfig::from_environment() {
  ServiceConfig c;
  if (const char* dir = std::getenv("CFX_MODEL_DIR"); dir && *dir) c.model_dir = dir;
  if (const char* port = std::getenv("CFX_PORT"); port && *port) {
    try {
      c.port = std::stoi(port);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, std::string("CFX_PORT is not a port number: ") + port);
    }
  }
  return c;
}

int http_status(ErrorCode code) {
  if (is_infeasible(code)) return 422;
  if (is_cap_exceeded(code)) return 413;
  if (code == ErrorCode::IoError) return 500;
  return 400;
}

namespace {

ServiceResponse json_response(int status, const Json& body) { return {status, body.dump(2) + "\n"}; }

ServiceResponse error_response(int status, std::string_view code, const std::string& message) {
  Json err = Json::object();
  err["code"] = code;
  err["message"] = message;
  Json body = Json::object();
  body["error"] = std::move(err);
  return json_response(status, body);
}

Json model_summary(const StoredModel& m) {
  Json j = Json::object();
  j["id"] = m.id;
  j["type"] = m.type;
  j["dataset"] = m.dataset ? Json(*m.dataset) : Json(nullptr);
  j["created_at"] = m.created_at;
  return j;
}

Json parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string::npos ? path.size() : j;
    if (end > i) parts.push_back(path.substr(i, end - i));
    i = end + 1;
  }
  return parts;
}

}  // namespace

ServiceResponse Service::handle(const ServiceRequest& req) {
  const auto parts = split_path(req.path);
  auto not_found = [&] { return error_response(404, "NotFound", "no such resource: " + req.path); };
  auto wrong_method = [&] { return error_response(405, "MethodNotAllowed", req.method + " " + req.path); };
  if (parts.size() < 2 || parts[0] != "v1") return not_found();
  try {
    const std::string& root = parts[1];
    if (root == "health" && parts.size() == 2) {
      if (req.method != "GET") return wrong_method();
      return json_response(200, Json{{"status", "ok"}});
    }
    if (root == "datasets" && parts.size() == 2) {
      if (req.method != "POST") return wrong_method();
      const std::string id = store_.put_dataset(req.body);
      Json out = Json::object();
      out["id"] = id;
      out["records"] = parse_csv_records(req.body).size();
      return json_response(200, out);
    }
    if (root != "models") return not_found();
    if (parts.size() == 2) {
      if (req.method == "GET") {
        Json list = Json::array();
        for (const auto& m : store_.list()) list.push_back(model_summary(m));
        return json_response(200, Json{{"models", list}});
      }
      if (req.method != "POST") return wrong_method();
      std::optional<std::string> dataset;
      if (auto it = req.query.find("dataset"); it != req.query.end()) {
        if (!store_.dataset_bytes(it->second)) return error_response(404, "NotFound", "unknown dataset " + it->second);
        dataset = it->second;
      }
      return json_response(200, model_summary(store_.put_model(req.body, dataset)));
    }
    const auto entry = store_.find(parts[2]);
    if (!entry) return error_response(404, "NotFound", "unknown model " + parts[2]);
    if (parts.size() == 3) {
      if (req.method != "GET") return wrong_method();
      Json out = model_summary(*entry);
      out["model"] = Json::parse(store_.artifact_bytes(*entry));
      return json_response(200, out);
    }
    if (parts.size() != 4) return not_found();
    if (req.method != "POST") return wrong_method();
    const std::string& action = parts[3];
    const Model model = store_.load(*entry);
    const FeatureList& features = features_of(model);
    const Json body = parse_body(req.body);
    if (action == "predict") {
      if (!body.is_object() || !body.contains("instance") || body.size() != 1) {
        throw Error(ErrorCode::ParseError, "predict expects {\"instance\": {...}}");
      }
      const Instance x = parse_instance(body["instance"], features);
      Json out = Json::object();
      out["model"] = entry->id;
      out["class"] = evaluate(model, x);
      return json_response(200, out);
    }
    RequestKind kind;
    if (action == "counterfactual") {
      kind = RequestKind::Counterfactual;
    } else if (action == "robustness") {
      kind = RequestKind::Robustness;
    } else if (action == "prime-implicants") {
      kind = RequestKind::PrimeImplicants;
    } else {
      return not_found();
    }
    ExplanationRequest er = request_from_json(body, kind, entry->id, features);
    if (kind == RequestKind::Counterfactual && er.scheme && *er.scheme != WeightScheme::Uniform && !er.dataset_id) {
      er.dataset_id = entry->dataset;
    }
    std::optional<Dataset> data;
    if (er.dataset_id) {
      auto bytes = store_.dataset_bytes(*er.dataset_id);
      if (!bytes) return error_response(404, "NotFound", "unknown dataset " + *er.dataset_id);
      data = parse_dataset_csv(*bytes, features);
    }
    return {200, render_explanation(run_request(er, model, data ? &*data : nullptr))};
  } catch (const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceRequest sr{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) sr.query.emplace(k, v);
    ServiceResponse out = impl_->service.handle(sr);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const std::string any = R"(/.*)";
  impl_->server.Get(any, handler);
  impl_->server.Post(any, handler);
  impl_->server.Put(any, handler);
  impl_->server.Delete(any, handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

int run_http_service(const ServiceConfig& config) {
  Service service(config.model_dir);
  HttpServer server(service);
  const int port = server.bind(config.host, config.port);
  std::fprintf(stderr, "cfx: serving %s on http://%s:%d\n", config.model_dir.c_str(), config.host.c_str(), port);
  server.listen();
  return 0;
}

}  // namespace cfx
