#ifndef SCOPECOMPLETE_HTTP_BACKEND_H_
#define SCOPECOMPLETE_HTTP_BACKEND_H_

#include <map>
#include <memory>
#include <string>

#include "scopecomplete/backend.h"

namespace scopecomplete {

// Client for a FIM endpoint. Request body:
//   {"prefix", "suffix", "language_family", "multi_line", "max_tokens",
//    "stop", "stop_at_newline", "temperature", "stream": true}
// Response: newline-delimited JSON objects {"text": "..."}; an object with
// {"error": "..."} fails the stream.
struct HttpBackendConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string path = "/v1/fim";
  double connect_timeout_ms = 1000;
  double read_timeout_ms = 5000;
  std::map<std::string, std::string> headers;
  // Guard against servers that ignore max_tokens.
  std::size_t multi_line_char_cap = 2000;
  std::size_t single_line_char_cap = 400;
};

class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config,
                       std::shared_ptr<Clock> clock = steady_clock());

  std::unique_ptr<GenerationStream> generate(
      const FimPrompt& prompt, const GenerationParams& params,
      const GenerateOptions& options) override;
  std::shared_ptr<Clock> clock() const override { return clock_; }

 private:
  HttpBackendConfig config_;
  std::shared_ptr<Clock> clock_;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_HTTP_BACKEND_H_
