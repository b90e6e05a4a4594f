#ifndef SCOPECOMPLETE_CONFIG_H_
#define SCOPECOMPLETE_CONFIG_H_

#include <stdexcept>
#include <string>

#include "scopecomplete/backend.h"
#include "scopecomplete/http_backend.h"
#include "scopecomplete/mock_backend.h"
#include "scopecomplete/postprocess.h"
#include "scopecomplete/trigger.h"

namespace scopecomplete {

// Invalid configuration. what() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BackendConfig {
  enum class Kind { kMock, kHttp };
  Kind kind = Kind::kMock;
  // Mock backend; an empty path means an empty corpus.
  std::string corpus_path;
  MockConfig mock;
  HttpBackendConfig http;
};

struct ServerConfig {
  int version = 1;
  BackendConfig backend;
  PromptWindows windows;
  TriggerConfig trigger;
  PostprocessConfig postprocess;
  double single_line_timeout_ms = 1000;
  double multi_line_timeout_ms = 2800;
  std::size_t cache_capacity = 512;
  double cache_ttl_ms = 300000;
  // Empty: telemetry is kept in memory only.
  std::string telemetry_path;
  std::string user_id;
  // A cursor move without an edit also invalidates pending suggestions.
  bool invalidate_on_cursor_move = true;
};

// Parses a JSON config document. Every key is optional; unknown keys and
// wrong types throw ConfigError.
ServerConfig parse_config(const std::string& json_text);
ServerConfig load_config(const std::string& path);
std::string dump_config(const ServerConfig& config);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_CONFIG_H_
