#include "scopecomplete/config.h"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "config_section.h"

namespace scopecomplete {

using detail::json;
using detail::Section;


ServerConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ServerConfig c;
  Section root(doc, "");
  root.get("version", c.version);
  if (c.version != 1) throw ConfigError("version: unsupported config version");

  root.section("backend", [&](Section& s) {
    std::string kind = "mock";
    s.get("kind", kind);
    if (kind == "mock") {
      c.backend.kind = BackendConfig::Kind::kMock;
    } else if (kind == "http") {
      c.backend.kind = BackendConfig::Kind::kHttp;
    } else {
      throw ConfigError("backend.kind must be \"mock\" or \"http\"");
    }
    s.get("corpus", c.backend.corpus_path)
        .get("chunk_code_points", c.backend.mock.chunk_code_points)
        .positive("first_chunk_ms", c.backend.mock.first_chunk_ms)
        .positive("per_token_ms", c.backend.mock.per_token_ms)
        .get("fallback", c.backend.mock.fallback)
        .get("host", c.backend.http.host)
        .get("port", c.backend.http.port)
        .get("path", c.backend.http.path)
        .get("headers", c.backend.http.headers)
        .positive("connect_timeout_ms", c.backend.http.connect_timeout_ms)
        .positive("read_timeout_ms", c.backend.http.read_timeout_ms)
        .get("multi_line_char_cap", c.backend.http.multi_line_char_cap)
        .get("single_line_char_cap", c.backend.http.single_line_char_cap);
    if (c.backend.mock.chunk_code_points < 1) {
      throw ConfigError("backend.chunk_code_points must be >= 1");
    }
  });
  root.section("windows", [&](Section& s) {
    s.get("prefix_code_points", c.windows.prefix_code_points)
        .get("suffix_code_points", c.windows.suffix_code_points);
    if (c.windows.prefix_code_points < 0 || c.windows.suffix_code_points < 0) {
      throw ConfigError("windows must be >= 0");
    }
  });
  root.section("trigger", [&](Section& s) {
    std::string closers = c.trigger.closers.chars();
    s.get("closers", closers)
        .get("multi_line_enabled", c.trigger.multi_line_enabled)
        .get("allow_module_scope", c.trigger.allow_module_scope)
        .get("single_line_max_tokens", c.trigger.single_line_max_tokens)
        .get("multi_line_max_tokens", c.trigger.multi_line_max_tokens)
        .get("tab_width", c.trigger.scope.tab_width);
    try {
      c.trigger.closers = CloserSet(closers);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("trigger.closers: ") + e.what());
    }
    if (c.trigger.single_line_max_tokens < 1 ||
        c.trigger.multi_line_max_tokens < 1) {
      throw ConfigError("trigger max tokens must be >= 1");
    }
    if (c.trigger.scope.tab_width < 1) {
      throw ConfigError("trigger.tab_width must be >= 1");
    }
  });
  root.section("postprocess", [&](Section& s) {
    s.get("realign", c.postprocess.realign)
        .get("indent_unit", c.postprocess.indent_unit)
        .get("overlap_window_lines", c.postprocess.overlap_window_lines);
  });
  root.section("timeouts_ms", [&](Section& s) {
    s.positive("single_line", c.single_line_timeout_ms)
        .positive("multi_line", c.multi_line_timeout_ms);
  });
  root.section("cache", [&](Section& s) {
    s.get("capacity", c.cache_capacity).positive("ttl_ms", c.cache_ttl_ms);
  });
  root.section("telemetry", [&](Section& s) {
    s.get("path", c.telemetry_path).get("user_id", c.user_id);
  });
  root.get("invalidate_on_cursor_move", c.invalidate_on_cursor_move);
  root.finish();
  return c;
}

ServerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ServerConfig& c) {
  json doc = {
      {"version", c.version},
      {"backend",
       {{"kind", c.backend.kind == BackendConfig::Kind::kMock ? "mock" : "http"},
        {"corpus", c.backend.corpus_path},
        {"chunk_code_points", c.backend.mock.chunk_code_points},
        {"first_chunk_ms", c.backend.mock.first_chunk_ms},
        {"per_token_ms", c.backend.mock.per_token_ms},
        {"fallback", c.backend.mock.fallback},
        {"host", c.backend.http.host},
        {"port", c.backend.http.port},
        {"path", c.backend.http.path},
        {"headers", c.backend.http.headers},
        {"connect_timeout_ms", c.backend.http.connect_timeout_ms},
        {"read_timeout_ms", c.backend.http.read_timeout_ms},
        {"multi_line_char_cap", c.backend.http.multi_line_char_cap},
        {"single_line_char_cap", c.backend.http.single_line_char_cap}}},
      {"windows",
       {{"prefix_code_points", c.windows.prefix_code_points},
        {"suffix_code_points", c.windows.suffix_code_points}}},
      {"trigger",
       {{"closers", c.trigger.closers.chars()},
        {"multi_line_enabled", c.trigger.multi_line_enabled},
        {"allow_module_scope", c.trigger.allow_module_scope},
        {"single_line_max_tokens", c.trigger.single_line_max_tokens},
        {"multi_line_max_tokens", c.trigger.multi_line_max_tokens},
        {"tab_width", c.trigger.scope.tab_width}}},
      {"postprocess",
       {{"realign", c.postprocess.realign},
        {"indent_unit", c.postprocess.indent_unit},
        {"overlap_window_lines", c.postprocess.overlap_window_lines}}},
      {"timeouts_ms",
       {{"single_line", c.single_line_timeout_ms},
        {"multi_line", c.multi_line_timeout_ms}}},
      {"cache", {{"capacity", c.cache_capacity}, {"ttl_ms", c.cache_ttl_ms}}},
      {"telemetry", {{"path", c.telemetry_path}, {"user_id", c.user_id}}},
      {"invalidate_on_cursor_move", c.invalidate_on_cursor_move}};
  return doc.dump(2);
}

}  // namespace scopecomplete
