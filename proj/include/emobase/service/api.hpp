#pragma once

#include "emobase/eval/report.hpp"
#include "emobase/protocol/profile.hpp"
#include "emobase/service/store.hpp"
#include "emobase/signal/signal.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace emobase::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path root = "emobase-store";
  std::string cors_origin = "*";
  protocol::ProtocolConfig protocol;
  signal::PreprocessOptions preprocess;
};

// EMOBASE_HOST, EMOBASE_PORT, EMOBASE_STORE and EMOBASE_CORS_ORIGIN override
// the given values.
ServiceConfig config_from_env(ServiceConfig base);

// HTTP status for a domain error code.
int status_for(std::string_view code);

struct TrainOutput {
  learn::Model model;
  eval::EvalReport report;
};

// Random forests report their out-of-bag error, the others 10-fold CV. The
// returned model is trained on the whole dataset.
TrainOutput execute_run(const features::Dataset& dataset, const RunParams& params);

class Service {
 public:
  explicit Service(ServiceConfig config);  // opens the store
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Throws ConfigError when the port cannot be bound. Returns the port.
  int bind();
  void listen();  // blocks until stop()
  // bind() plus listen() on a background thread.
  int start();
  void stop();
  int port() const;
  Store& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace emobase::service
