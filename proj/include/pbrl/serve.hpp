#pragma once

// HTTP service backing the label UI. Stateless handlers over the query queue
// and a read-only trainer status snapshot:
//   GET  /api/queries/next        -> oldest pending query (render payload) | 204
//   POST /api/queries/{id}/label  -> {"choice": "prefer0"|"prefer1"|"skip"}
//   GET  /api/status              -> {feedback_used, max_feedback, pending_count, global_step}
// A static UI bundle is mounted at / when the directory exists.

#include <filesystem>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "pbrl/env.hpp"
#include "pbrl/errors.hpp"
#include "pbrl/oracle.hpp"
#include "pbrl/trainer.hpp"

namespace pbrl {

class LabelService {
public:
  LabelService(QueryQueue& queue, TrainerStatus& status, GridWorldConfig grid)
      : queue_(queue), status_(status), grid_(grid) {
    server_.Get("/api/queries/next", [this](const httplib::Request&, httplib::Response& res) {
      auto rec = queue_.next_pending();
      if (!rec.has_value()) {
        res.status = 204;
        return;
      }
      nlohmann::json body{{"id", rec->id},
                          {"tau0", to_render_json(rec->tau0, grid_)},
                          {"tau1", to_render_json(rec->tau1, grid_)},
                          {"budget", status_json()}};
      res.set_content(body.dump(), "application/json");
    });

    server_.Post(R"(/api/queries/(\d+)/label)", [this](const httplib::Request& req,
                                                       httplib::Response& res) {
      std::int64_t id = 0;
      try {
        id = std::stoll(req.matches[1].str());
      } catch (...) {
        fail(res, 400, "bad query id");
        return;
      }
      nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.contains("choice") || !body["choice"].is_string()) {
        fail(res, 400, "body must be {\"choice\": \"prefer0\"|\"prefer1\"|\"skip\"}");
        return;
      }
      const auto choice = choice_from_string(body["choice"].get<std::string>());
      if (!choice.has_value()) {
        fail(res, 400, "unknown choice value");
        return;
      }
      try {
        queue_.submit(id, *choice);
      } catch (const UnknownIdError& e) {
        fail(res, 404, e.what());
        return;
      } catch (const IdempotencyError& e) {
        fail(res, 409, e.what());
        return;
      } catch (const BudgetExhaustedError& e) {
        fail(res, 409, e.what());
        return;
      }
      res.set_content(nlohmann::json{{"ok", true}}.dump(), "application/json");
    });

    server_.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(status_json().dump(), "application/json");
    });
  }

  // Serve the built label-UI bundle, when present.
  bool mount_ui(const std::string& dir) {
    if (!std::filesystem::is_directory(dir)) return false;
    return server_.set_mount_point("/", dir);
  }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  // Binds to an OS-assigned port; used by tests.
  int bind_to_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  httplib::Server& raw() { return server_; }

private:
  nlohmann::json status_json() const {
    return nlohmann::json{{"feedback_used", queue_.labels_accepted()},
                          {"max_feedback", queue_.max_feedback()},
                          {"pending_count", queue_.pending_count()},
                          {"global_step", status_.global_step.load()}};
  }

  static void fail(httplib::Response& res, int code, const std::string& msg) {
    res.status = code;
    res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
  }

  QueryQueue& queue_;
  TrainerStatus& status_;
  GridWorldConfig grid_;
  httplib::Server server_;
};

}  // namespace pbrl
