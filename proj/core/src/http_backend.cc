#include "scopecomplete/http_backend.h"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

// State shared between the consumer and the request thread.
struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> chunks;
  bool closed = false;
  bool failed = false;
  std::string diagnostic;

  void push(std::string chunk) {
    {
      std::lock_guard lock(mu);
      chunks.push_back(std::move(chunk));
    }
    cv.notify_all();
  }
  void close(bool fail, std::string why) {
    {
      std::lock_guard lock(mu);
      if (closed) return;
      closed = true;
      failed = fail;
      diagnostic = std::move(why);
    }
    cv.notify_all();
  }
};

class HttpStream : public GenerationStream {
 public:
  HttpStream(const HttpBackendConfig& config, std::shared_ptr<Clock> clock,
             const FimPrompt& prompt, const GenerationParams& params,
             GenerateOptions options)
      : clock_(std::move(clock)),
        options_(std::move(options)),
        limits_(params, prompt.multi_line ? config.multi_line_char_cap
                                          : config.single_line_char_cap),
        channel_(std::make_shared<Channel>()),
        client_(std::make_shared<httplib::Client>(config.host, config.port)) {
    using namespace std::chrono;
    client_->set_connection_timeout(
        duration_cast<microseconds>(duration<double, std::milli>(
            config.connect_timeout_ms)));
    client_->set_read_timeout(duration_cast<microseconds>(
        duration<double, std::milli>(config.read_timeout_ms)));

    const json body = {{"prefix", prompt.prefix},
                       {"suffix", prompt.suffix},
                       {"language_family", to_string(prompt.family)},
                       {"multi_line", prompt.multi_line},
                       {"max_tokens", params.max_tokens},
                       {"stop", params.stop},
                       {"stop_at_newline", params.stop_at_newline},
                       {"temperature", params.temperature},
                       {"stream", true}};
    httplib::Request req;
    req.method = "POST";
    req.path = config.path;
    for (const auto& [k, v] : config.headers) req.headers.emplace(k, v);
    req.headers.emplace("Content-Type", "application/json");
    req.body = body.dump();

    auto channel = channel_;
    auto client = client_;
    auto cancel = options_.cancel;
    worker_ = std::thread([req = std::move(req), channel, client,
                           cancel]() mutable {
      std::string pending;
      bool bad_line = false;
      req.content_receiver = [&](const char* data, std::size_t n, std::uint64_t,
                                 std::uint64_t) {
        if (cancel.cancelled()) return false;
        pending.append(data, n);
        std::size_t nl;
        while ((nl = pending.find('\n')) != std::string::npos) {
          const std::string line = pending.substr(0, nl);
          pending.erase(0, nl + 1);
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          const json obj = json::parse(line, nullptr, false);
          if (obj.is_discarded() || !obj.is_object()) {
            bad_line = true;
            channel->close(true, "malformed response line");
            return false;
          }
          if (obj.contains("error")) {
            bad_line = true;
            channel->close(true, "backend error: " + obj["error"].dump());
            return false;
          }
          if (obj.contains("text") && obj["text"].is_string()) {
            channel->push(obj["text"].get<std::string>());
          }
        }
        return true;
      };
      httplib::Response res;
      httplib::Error err = httplib::Error::Success;
      const bool ok = client->send(req, res, err);
      if (bad_line) return;
      if (cancel.cancelled()) {
        channel->close(false, "cancelled");
      } else if (!ok) {
        channel->close(true, "request failed: " + httplib::to_string(err));
      } else if (res.status < 200 || res.status >= 300) {
        channel->close(true, "HTTP status " + std::to_string(res.status));
      } else {
        if (!pending.empty()) {
          const json obj = json::parse(pending, nullptr, false);
          if (!obj.is_discarded() && obj.is_object() && obj.contains("text") &&
              obj["text"].is_string()) {
            channel->push(obj["text"].get<std::string>());
          }
        }
        channel->close(false, "");
      }
    });
  }

  ~HttpStream() override {
    options_.cancel.cancel();
    client_->stop();
    if (worker_.joinable()) worker_.join();
  }

  std::optional<std::string> next() override {
    while (status_ == StreamStatus::kRunning) {
      if (drained_) return end(StreamStatus::kCompleted, "");
      if (options_.cancel.cancelled()) return end(StreamStatus::kCancelled, "");
      if (options_.deadline_ms && clock_->now_ms() >= *options_.deadline_ms) {
        return end(StreamStatus::kTimedOut, "deadline exceeded");
      }
      std::unique_lock lock(channel_->mu);
      channel_->cv.wait_for(lock, std::chrono::milliseconds(5), [&] {
        return !channel_->chunks.empty() || channel_->closed;
      });
      std::string out;
      if (!channel_->chunks.empty()) {
        std::string raw = std::move(channel_->chunks.front());
        channel_->chunks.pop_front();
        lock.unlock();
        out = limits_.admit(raw);
        if (limits_.done()) {
          out += limits_.finish();
          drained_ = true;
        }
      } else if (channel_->closed) {
        const bool failed = channel_->failed;
        const std::string why = channel_->diagnostic;
        lock.unlock();
        if (failed) return end(StreamStatus::kFailed, why);
        out = limits_.finish();
        drained_ = true;
      }
      if (!out.empty()) return out;
    }
    return std::nullopt;
  }

  StreamStatus status() const override { return status_; }
  std::string diagnostic() const override { return diagnostic_; }

 private:
  std::optional<std::string> end(StreamStatus status, std::string why) {
    status_ = status;
    diagnostic_ = std::move(why);
    if (status != StreamStatus::kCompleted) options_.cancel.cancel();
    client_->stop();
    return std::nullopt;
  }

  std::shared_ptr<Clock> clock_;
  GenerateOptions options_;
  LimitTracker limits_;
  std::shared_ptr<Channel> channel_;
  std::shared_ptr<httplib::Client> client_;
  std::thread worker_;
  StreamStatus status_ = StreamStatus::kRunning;
  bool drained_ = false;
  std::string diagnostic_;
};

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), clock_(std::move(clock)) {}

std::unique_ptr<GenerationStream> HttpBackend::generate(
    const FimPrompt& prompt, const GenerationParams& params,
    const GenerateOptions& options) {
  params.validate();
  return std::make_unique<HttpStream>(config_, clock_, prompt, params, options);
}

}  // namespace scopecomplete
