#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "provex/explorer.hpp"

namespace httplib {
class Server;
}

namespace provex {

struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

nlohmann::ordered_json value_to_json(const Value& v);
/// Strings are parsed by the attribute kind; numbers are accepted for int and decimal.
Value value_from_json(const nlohmann::json& j, Kind kind);
nlohmann::ordered_json relation_to_json(const Relation& rel);
nlohmann::ordered_json plan_to_json(const Explorer& ex, const Catalog& base);

struct ServiceOptions {
  std::chrono::seconds idle_timeout{30 * 60};
};

/// Exploration state behind the HTTP API. Each call returns the status and JSON
/// body the endpoint sends; errors carry {code, message, detail}.
class ExploreService {
 public:
  explicit ExploreService(ServiceOptions options = {});

  /// Registers an already loaded database under `id`.
  void add_dataset(const std::string& id, Database db);

  Response create_dataset(const std::string& catalog, const std::map<std::string, std::string>& csv_by_relation);
  Response create_dataset(const nlohmann::json& body);
  Response create_session(const nlohmann::json& body);
  Response select_rows(const std::string& session, const nlohmann::json& body);
  Response get_provenance(const std::string& session, const std::string& occurrence);
  Response list_occurrences(const std::string& session);
  Response get_plan(const std::string& session);

  std::size_t session_count();

 private:
  struct Session {
    std::mutex mutex;
    std::string dataset;
    std::shared_ptr<const Database> db;
    std::unique_ptr<Explorer> explorer;
    std::optional<Relation> selection;
    std::chrono::steady_clock::time_point last_used;
  };

  std::shared_ptr<Session> find_session(const std::string& id);
  void evict_idle();
  std::string fresh_id(const char* prefix);

  ServiceOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Database>> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_;
};

/// HTTP front end for an ExploreService.
class HttpFrontend {
 public:
  explicit HttpFrontend(ExploreService& service);
  ~HttpFrontend();

  /// Binds to "host:port"; port 0 picks a free one. Returns the bound port.
  int bind(const std::string& listen);
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  ExploreService& service_;
  std::unique_ptr<httplib::Server> server_;
};

/// "--listen" value, else PROVEX_LISTEN, else 127.0.0.1:8080.
std::string resolve_listen(const std::string& flag);

}  // namespace provex
