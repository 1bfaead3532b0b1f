#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "cfx/error.hpp"
#include "cfx/store.hpp"

namespace cfx {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_dir = "cfx-models";

  // CFX_MODEL_DIR and CFX_PORT replace the defaults.
  static ServiceConfig from_environment();
};

struct ServiceRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// HTTP status of a library error: 422 infeasible, 413 cap exceeded, 500 I/O, 400 otherwise.
int http_status(ErrorCode code);

// Transport-free request handling, shared by the HTTP server and the tests.
class Service {
 public:
  explicit Service(std::filesystem::path model_dir) : store_(std::move(model_dir)) {}

  ServiceResponse handle(const ServiceRequest& request);
  ModelStore& store() { return store_; }

 private:
  ModelStore store_;
};

// HTTP transport around a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking service main loop.
int run_http_service(const ServiceConfig& config);

}  // namespace cfx
