#include "scopecomplete/mock_backend.h"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

class MockStream : public GenerationStream {
 public:
  MockStream(std::string text, MockConfig config, std::shared_ptr<Clock> clock,
             GenerateOptions options)
      : text_(std::move(text)),
        config_(config),
        clock_(std::move(clock)),
        options_(std::move(options)) {}

  std::optional<std::string> next() override {
    if (status_ != StreamStatus::kRunning) return std::nullopt;
    if (options_.cancel.cancelled()) return finish(StreamStatus::kCancelled);
    if (offset_ >= text_.size()) return finish(StreamStatus::kCompleted);
    const std::string_view rest = std::string_view(text_).substr(offset_);
    const std::string chunk(text::head_code_points(
        rest, static_cast<std::size_t>(std::max(config_.chunk_code_points, 1))));
    const double cost = offset_ == 0 ? config_.first_chunk_ms
                                     : config_.per_token_ms * token_count(chunk);
    if (options_.deadline_ms &&
        clock_->now_ms() + cost > *options_.deadline_ms) {
      clock_->sleep_ms(*options_.deadline_ms - clock_->now_ms());
      return finish(StreamStatus::kTimedOut);
    }
    clock_->sleep_ms(cost);
    if (options_.cancel.cancelled()) return finish(StreamStatus::kCancelled);
    offset_ += chunk.size();
    return chunk;
  }

  StreamStatus status() const override { return status_; }

 private:
  std::optional<std::string> finish(StreamStatus status) {
    status_ = status;
    return std::nullopt;
  }

  std::string text_;
  MockConfig config_;
  std::shared_ptr<Clock> clock_;
  GenerateOptions options_;
  std::size_t offset_ = 0;
  StreamStatus status_ = StreamStatus::kRunning;
};

std::string fallback_template(const FimPrompt& prompt) {
  const std::vector<std::string_view> lines = text::split_lines(prompt.prefix);
  const std::string_view last = lines.back();
  int base = 0;
  std::string_view anchor;
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (!text::is_blank(*it)) {
      anchor = text::trim_right(*it);
      base = text::indent_width(*it);
      break;
    }
  }
  const bool opens = !anchor.empty() &&
                     (anchor.back() == ':' || anchor.back() == '{') &&
                     text::trim_right(last) == anchor;
  const std::string statement =
      prompt.family == LanguageFamily::kIndentScoped ? "pass" : "return;";
  if (!opens) return text::is_blank(last) ? statement : std::string();
  return "\n" + std::string(base + 4, ' ') + statement;
}

}  // namespace

std::string MockCorpus::fingerprint(std::string_view prefix,
                                    int context_code_points) {
  return text::to_hex(text::fnv1a(text::tail_code_points(
      prefix, static_cast<std::size_t>(std::max(context_code_points, 0)))));
}

void MockCorpus::add(std::string_view prefix, std::string continuation,
                     int context_code_points) {
  add_fingerprint(fingerprint(prefix, context_code_points),
                  std::move(continuation), context_code_points);
}

void MockCorpus::add_fingerprint(std::string fp, std::string continuation,
                                 int context_code_points) {
  entries_[context_code_points][std::move(fp)] = std::move(continuation);
}

const std::string* MockCorpus::lookup(std::string_view prefix) const {
  for (const auto& [length, table] : entries_) {
    const auto it = table.find(fingerprint(prefix, length));
    if (it != table.end()) return &it->second;
  }
  return nullptr;
}

std::size_t MockCorpus::size() const {
  std::size_t n = 0;
  for (const auto& [length, table] : entries_) n += table.size();
  return n;
}

MockCorpus MockCorpus::load(std::istream& in) {
  MockCorpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    if (record.contains("version")) {
      if (record.at("version") != 1) {
        throw std::runtime_error("corpus line " + std::to_string(line_no) +
                                 ": unsupported version");
      }
      continue;
    }
    if (!record.contains("context_fingerprint") ||
        !record.contains("continuation")) {
      throw std::runtime_error(
          "corpus line " + std::to_string(line_no) +
          ": expected context_fingerprint and continuation");
    }
    corpus.add_fingerprint(
        record.at("context_fingerprint").get<std::string>(),
        record.at("continuation").get<std::string>(),
        record.value("context_code_points", kDefaultContext));
  }
  return corpus;
}

MockCorpus MockCorpus::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path);
  return load(in);
}

void MockCorpus::save(std::ostream& out) const {
  out << json{{"version", 1}}.dump() << "\n";
  for (const auto& [length, table] : entries_) {
    for (const auto& [fp, continuation] : table) {
      out << json{{"context_fingerprint", fp},
                  {"continuation", continuation},
                  {"context_code_points", length}}
                 .dump()
          << "\n";
    }
  }
}

std::string mock_corpus_lookup(const FimPrompt& prompt,
                               const MockCorpus& corpus, bool fallback) {
  if (const std::string* hit = corpus.lookup(prompt.prefix)) return *hit;
  return fallback ? fallback_template(prompt) : std::string();
}

MockBackend::MockBackend(std::shared_ptr<const MockCorpus> corpus,
                         MockConfig config, std::shared_ptr<Clock> clock)
    : config_(config), clock_(std::move(clock)) {
  const bool fallback = config.fallback;
  source_ = [corpus = std::move(corpus), fallback](const FimPrompt& prompt) {
    return mock_corpus_lookup(prompt, *corpus, fallback);
  };
}

MockBackend::MockBackend(ContinuationSource source, MockConfig config,
                         std::shared_ptr<Clock> clock)
    : source_(std::move(source)), config_(config), clock_(std::move(clock)) {}

std::unique_ptr<GenerationStream> MockBackend::generate(
    const FimPrompt& prompt, const GenerationParams& params,
    const GenerateOptions& options) {
  params.validate();
  ++calls_;
  std::string text = apply_generation_limits(
      source_(prompt), params);
  return std::make_unique<MockStream>(std::move(text), config_, clock_,
                                      options);
}

}  // namespace scopecomplete
