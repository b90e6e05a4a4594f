#include "scopecomplete/cache.h"

#include "scopecomplete/text.h"

namespace scopecomplete {

CacheKey CacheKey::from(const FimPrompt& prompt, SuggestionKind kind,
                        const GenerationParams& params) {
  CacheKey key;
  key.prefix_fingerprint = text::to_hex(text::fnv1a(prompt.prefix));
  key.suffix_fingerprint = text::to_hex(text::fnv1a(prompt.suffix));
  key.kind = kind;
  key.params_fingerprint = params.fingerprint();
  return key;
}

std::string CacheKey::str() const {
  std::string out = prefix_fingerprint;
  out += '/';
  out += suffix_fingerprint;
  out += '/';
  out += to_string(kind);
  out += '/';
  out += params_fingerprint;
  return out;
}

SuggestionCache::SuggestionCache(std::size_t capacity, double ttl_ms,
                                 std::shared_ptr<Clock> clock)
    : capacity_(capacity), ttl_ms_(ttl_ms), clock_(std::move(clock)) {}

std::optional<CacheEntry> SuggestionCache::lookup(const CacheKey& key) {
  std::lock_guard lock(mu_);
  const auto it = slots_.find(key.str());
  if (it == slots_.end()) return std::nullopt;
  if (clock_->now_ms() - it->second.entry.created_at_ms >= ttl_ms_) {
    order_.erase(it->second.position);
    slots_.erase(it);
    return std::nullopt;
  }
  ++it->second.entry.hit_count;
  order_.splice(order_.begin(), order_, it->second.position);
  return it->second.entry;
}

void SuggestionCache::store(const CacheKey& key, std::string raw) {
  if (capacity_ == 0) return;
  std::lock_guard lock(mu_);
  const std::string k = key.str();
  const auto it = slots_.find(k);
  if (it != slots_.end()) {
    it->second.entry = CacheEntry{std::move(raw), clock_->now_ms(), 0};
    order_.splice(order_.begin(), order_, it->second.position);
    return;
  }
  if (slots_.size() >= capacity_) {
    slots_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(k);
  slots_.emplace(k, Slot{CacheEntry{std::move(raw), clock_->now_ms(), 0},
                         order_.begin()});
}

void SuggestionCache::clear() {
  std::lock_guard lock(mu_);
  slots_.clear();
  order_.clear();
}

std::size_t SuggestionCache::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

}  // namespace scopecomplete
