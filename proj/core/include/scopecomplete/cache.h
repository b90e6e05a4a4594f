#ifndef SCOPECOMPLETE_CACHE_H_
#define SCOPECOMPLETE_CACHE_H_

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "scopecomplete/backend.h"
#include "scopecomplete/clock.h"
#include "scopecomplete/generation_params.h"

namespace scopecomplete {

struct CacheKey {
  std::string prefix_fingerprint;
  std::string suffix_fingerprint;
  SuggestionKind kind = SuggestionKind::kSingleLine;
  std::string params_fingerprint;

  // Keyed on the prompt windows, not the whole file.
  static CacheKey from(const FimPrompt& prompt, SuggestionKind kind,
                       const GenerationParams& params);
  std::string str() const;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheEntry {
  // Backend output as consumed by the scope cut, before post-processing.
  std::string raw;
  double created_at_ms = 0;
  int hit_count = 0;
};

// LRU with a time-to-live. Thread-safe.
class SuggestionCache {
 public:
  SuggestionCache(std::size_t capacity, double ttl_ms,
                  std::shared_ptr<Clock> clock);

  // Counts a hit and refreshes recency. Expired entries are dropped.
  std::optional<CacheEntry> lookup(const CacheKey& key);
  void store(const CacheKey& key, std::string raw);
  void clear();
  std::size_t size() const;

 private:
  using Order = std::list<std::string>;
  struct Slot {
    CacheEntry entry;
    Order::iterator position;
  };

  std::size_t capacity_;
  double ttl_ms_;
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  Order order_;  // front = most recent
  std::unordered_map<std::string, Slot> slots_;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_CACHE_H_
