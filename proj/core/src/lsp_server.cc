#include "scopecomplete/lsp_server.h"

#include <atomic>
#include <cctype>

#include "json.hpp"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

// Thrown by handlers; becomes a JSON-RPC error response.
struct RpcError {
  int code;
  std::string message;
};

json make_error(const json& id, int code, const std::string& message) {
  return {{"jsonrpc", "2.0"},
          {"id", id},
          {"error", {{"code", code}, {"message", message}}}};
}

json make_result(const json& id, json result) {
  return {{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
}

json make_notification(const std::string& method, json params) {
  return {{"jsonrpc", "2.0"}, {"method", method}, {"params", std::move(params)}};
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw RpcError{rpc_error::kInvalidParams, std::string("missing ") + key};
  }
  return obj.at(key);
}

template <typename T>
T get(const json& obj, const char* key) {
  try {
    return field(obj, key).get<T>();
  } catch (const json::exception&) {
    throw RpcError{rpc_error::kInvalidParams, std::string("bad ") + key};
  }
}

Position position_from(const json& j) {
  return Position{get<int>(j, "line"), get<int>(j, "character")};
}

json position_json(Position p) {
  return {{"line", p.line}, {"character", p.column}};
}

std::string request_id_param(const json& params) {
  const json& id = field(params, "requestId");
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  throw RpcError{rpc_error::kInvalidParams, "bad requestId"};
}

std::string trim_ascii(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.pop_back();
  }
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

}  // namespace

std::optional<std::string> read_frame(std::istream& in) {
  std::optional<std::size_t> length;
  std::string line;
  bool any_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!any_header) continue;
      break;
    }
    any_header = true;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw ProtocolError("malformed header line: " + line);
    }
    std::string name = line.substr(0, colon);
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == "content-length") {
      const std::string value = trim_ascii(line.substr(colon + 1));
      try {
        std::size_t used = 0;
        const unsigned long long n = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        length = static_cast<std::size_t>(n);
      } catch (const std::exception&) {
        throw ProtocolError("bad Content-Length: " + value);
      }
    }
  }
  if (!any_header) return std::nullopt;
  if (!length) throw ProtocolError("missing Content-Length header");
  std::string body(*length, '\0');
  in.read(body.data(), static_cast<std::streamsize>(*length));
  if (static_cast<std::size_t>(in.gcount()) != *length) {
    throw ProtocolError("truncated message body");
  }
  return body;
}

void write_frame(std::ostream& out, std::string_view body) {
  out << "Content-Length: " << body.size() << "\r\n\r\n" << body;
  out.flush();
}

struct LanguageServer::Worker {
  std::thread thread;
  std::shared_ptr<std::atomic<bool>> finished =
      std::make_shared<std::atomic<bool>>(false);
};

LanguageServer::LanguageServer(ServerConfig config,
                               std::shared_ptr<ModelBackend> backend,
                               std::shared_ptr<TelemetrySink> telemetry,
                               std::ostream& out)
    : out_(out) {
  engine_ = std::make_unique<CompletionEngine>(
      std::move(config), std::move(backend), std::move(telemetry),
      [this](const FetchingMultilineNotice& n) {
        send(make_notification(
                 "completion/fetchingMultiline",
                 {{"requestId", n.request_id},
                  {"uri", n.uri},
                  {"state", n.started ? "started" : "finished"}})
                 .dump());
      });
}

LanguageServer::~LanguageServer() {
  engine_->shutdown();
  join_workers();
}

void LanguageServer::send(const std::string& body) {
  std::lock_guard lock(out_mu_);
  // Best effort once the client is gone.
  if (out_) write_frame(out_, body);
}

void LanguageServer::reap_workers(bool all) {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (all || it->finished->load()) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void LanguageServer::join_workers() { reap_workers(true); }

int LanguageServer::run(std::istream& in) {
  while (!exit_requested_) {
    std::optional<std::string> body;
    try {
      body = read_frame(in);
    } catch (const ProtocolError& e) {
      send(make_notification("window/logMessage",
                             {{"type", 1}, {"message", e.what()}})
               .dump());
      break;
    }
    if (!body) break;
    handle(*body);
  }
  engine_->shutdown();
  join_workers();
  return shutdown_requested_ ? 0 : 1;
}

void LanguageServer::handle(std::string_view body) {
  reap_workers(false);
  json msg;
  try {
    msg = json::parse(body);
  } catch (const json::parse_error& e) {
    send(make_error(nullptr, rpc_error::kParseError, e.what()).dump());
    return;
  }
  if (!msg.is_object() || !msg.contains("method") ||
      !msg["method"].is_string()) {
    const json id = msg.is_object() && msg.contains("id") ? msg["id"] : json();
    send(make_error(id, rpc_error::kInvalidRequest, "not a request").dump());
    return;
  }
  const std::string method = msg["method"];
  const bool is_request = msg.contains("id");
  const json id = is_request ? msg["id"] : json();
  const json params = msg.value("params", json::object());

  auto reply_error = [&](int code, const std::string& message) {
    if (is_request) {
      send(make_error(id, code, message).dump());
    } else {
      send(make_notification("window/logMessage",
                             {{"type", 1}, {"message", method + ": " + message}})
               .dump());
    }
  };

  try {
    if (method == "exit") {
      exit_requested_ = true;
      return;
    }
    if (method == "initialize") {
      initialized_ = true;
      send(make_result(
               id,
               {{"capabilities",
                 {{"textDocumentSync", {{"openClose", true}, {"change", 2}}},
                  {"inlineCompletionProvider", true}}},
                {"serverInfo", {{"name", "scopecomplete"}, {"version", "0.1.0"}}}})
               .dump());
      return;
    }
    if (!initialized_) {
      if (is_request) {
        send(make_error(id, rpc_error::kServerNotInitialized, "not initialized")
                 .dump());
      }
      return;
    }
    if (method == "initialized") return;
    if (method == "shutdown") {
      shutdown_requested_ = true;
      engine_->shutdown();
      join_workers();
      send(make_result(id, nullptr).dump());
      return;
    }
    if (method == "textDocument/didOpen") {
      const json& doc = field(params, "textDocument");
      engine_->open_document(get<std::string>(doc, "uri"),
                             get<std::string>(doc, "languageId"),
                             get<std::int64_t>(doc, "version"),
                             get<std::string>(doc, "text"));
      return;
    }
    if (method == "textDocument/didChange") {
      const json& doc = field(params, "textDocument");
      std::vector<TextEdit> edits;
      for (const json& change : field(params, "contentChanges")) {
        if (change.contains("range")) {
          const json& range = change["range"];
          edits.push_back(TextEdit{position_from(field(range, "start")),
                                   position_from(field(range, "end")),
                                   get<std::string>(change, "text"), false});
        } else {
          edits.push_back(TextEdit::replace_all(get<std::string>(change, "text")));
        }
      }
      engine_->apply_document_edit(get<std::string>(doc, "uri"),
                                   get<std::int64_t>(doc, "version"), edits);
      return;
    }
    if (method == "textDocument/didClose") {
      engine_->close_document(
          get<std::string>(field(params, "textDocument"), "uri"));
      return;
    }
    if (method == "completion/cursorMoved") {
      engine_->cursor_moved(get<std::string>(field(params, "textDocument"), "uri"),
                            position_from(field(params, "position")));
      return;
    }
    if (method == "completion/displayed") {
      engine_->suggestion_displayed(request_id_param(params));
      return;
    }
    if (method == "completion/rejected") {
      engine_->reject_suggestion(request_id_param(params));
      return;
    }
    if (method == "completion/accepted") {
      const Position end = engine_->accept_suggestion(request_id_param(params));
      if (is_request) {
        send(make_result(id, {{"position", position_json(end)}}).dump());
      }
      return;
    }
    if (method == "textDocument/inlineCompletions") {
      if (!is_request) return;
      const json& doc = field(params, "textDocument");
      CompletionRequest req;
      req.uri = get<std::string>(doc, "uri");
      req.version = get<std::int64_t>(doc, "version");
      req.cursor = position_from(field(params, "position"));
      if (params.contains("requestId")) req.request_id = request_id_param(params);
      const json context = params.value("context", json::object());
      // LSP trigger kind 1: invoked by the user.
      req.origin.explicit_shortcut = context.value("triggerKind", 2) == 1;
      if (context.contains("notebookCell")) {
        req.origin.notebook_cell = NotebookCellInfo{
            context["notebookCell"].value("cursorAtCellEnd", false)};
      }
      auto job = engine_->start_completion(std::move(req));
      workers_.emplace_back();
      Worker& w = workers_.back();
      w.thread = std::thread([this, job, id, finished = w.finished] {
        const CompletionResponse& r = job->run();
        json items = json::array();
        if (r.suggestion) {
          const Suggestion& s = *r.suggestion;
          items.push_back(
              {{"insertText", s.text},
               {"range",
                {{"start", position_json(s.insert_at)},
                 {"end", position_json(s.insert_at)}}},
               {"kind", to_string(s.kind)},
               {"requestId", r.request_id},
               {"fromCache", r.served_from_cache}});
        }
        json result = {{"items", items},
                       {"requestId", r.request_id},
                       {"outcome", to_string(r.outcome)},
                       {"decision", to_string(r.decision.kind())},
                       {"latencyMs", r.generation_latency_ms}};
        if (!r.diagnostic.empty()) result["diagnostic"] = r.diagnostic;
        send(make_result(id, std::move(result)).dump());
        finished->store(true);
      });
      return;
    }
    if (is_request) {
      send(make_error(id, rpc_error::kMethodNotFound, "unknown method " + method)
               .dump());
    }
  } catch (const RpcError& e) {
    reply_error(e.code, e.message);
  } catch (const SuggestionInvalidatedError& e) {
    reply_error(rpc_error::kSuggestionInvalidated, e.what());
  } catch (const UnknownRequestError& e) {
    reply_error(rpc_error::kUnknownRequest, e.what());
  } catch (const ProtocolError& e) {
    reply_error(rpc_error::kProtocol, e.what());
  } catch (const json::exception& e) {
    reply_error(rpc_error::kInvalidParams, e.what());
  } catch (const std::exception& e) {
    reply_error(rpc_error::kInternalError, e.what());
  }
}

}  // namespace scopecomplete
