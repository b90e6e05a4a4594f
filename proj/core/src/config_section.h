#ifndef SCOPECOMPLETE_SRC_CONFIG_SECTION_H_
#define SCOPECOMPLETE_SRC_CONFIG_SECTION_H_

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "scopecomplete/config.h"

namespace scopecomplete::detail {

using json = nlohmann::json;
// Walks one JSON object, dispatching known keys and rejecting the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  template <typename T>
  Section& get(const std::string& key, T& out) {
    seen_.push_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return *this;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
    return *this;
  }

  Section& positive(const std::string& key, double& out) {
    get(key, out);
    if (out < 0) throw ConfigError(where(key) + " must be >= 0");
    return *this;
  }

  Section& section(const std::string& key,
                   const std::function<void(Section&)>& body) {
    seen_.push_back(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return *this;
    Section child(*it, where(key));
    body(child);
    child.finish();
    return *this;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ConfigError("unknown config key: " + where(key));
      }
    }
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace scopecomplete::detail

#endif  // SCOPECOMPLETE_SRC_CONFIG_SECTION_H_
