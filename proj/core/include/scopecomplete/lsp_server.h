#ifndef SCOPECOMPLETE_LSP_SERVER_H_
#define SCOPECOMPLETE_LSP_SERVER_H_

#include <istream>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>

#include "scopecomplete/config.h"
#include "scopecomplete/engine.h"

namespace scopecomplete {

// Reads one "Content-Length: N\r\n\r\n<body>" frame. Returns nullopt at end
// of input; throws ProtocolError on a malformed header.
std::optional<std::string> read_frame(std::istream& in);
void write_frame(std::ostream& out, std::string_view body);

namespace rpc_error {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
inline constexpr int kServerNotInitialized = -32002;
inline constexpr int kProtocol = -32010;
inline constexpr int kSuggestionInvalidated = -32011;
inline constexpr int kUnknownRequest = -32012;
}  // namespace rpc_error

// JSON-RPC 2.0 front end of a CompletionEngine. The reading thread owns
// document sync and follow-ups; each inline completion runs on its own
// worker thread and writes its response when done.
//
// Methods: initialize, initialized, shutdown, exit,
// textDocument/didOpen|didChange|didClose, textDocument/inlineCompletions,
// completion/displayed|accepted|rejected, completion/cursorMoved.
// Server notifications: completion/fetchingMultiline, window/logMessage.
// Positions use code-point columns.
class LanguageServer {
 public:
  LanguageServer(ServerConfig config, std::shared_ptr<ModelBackend> backend,
                 std::shared_ptr<TelemetrySink> telemetry, std::ostream& out);
  ~LanguageServer();

  // Processes frames until `exit` or end of input. Returns the process exit
  // status: 0 after an orderly shutdown, 1 otherwise.
  int run(std::istream& in);

  // Handles one message body; responses go to the output stream.
  void handle(std::string_view body);
  // Waits for all running completions.
  void join_workers();
  bool exit_requested() const { return exit_requested_; }

  CompletionEngine& engine() { return *engine_; }

 private:
  struct Worker;

  void send(const std::string& body);
  void reap_workers(bool all);

  std::ostream& out_;
  std::mutex out_mu_;
  std::unique_ptr<CompletionEngine> engine_;
  std::list<Worker> workers_;
  bool initialized_ = false;
  bool shutdown_requested_ = false;
  bool exit_requested_ = false;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_LSP_SERVER_H_
