#ifndef SCOPECOMPLETE_CLOCK_H_
#define SCOPECOMPLETE_CLOCK_H_

#include <atomic>
#include <memory>

namespace scopecomplete {

// Milliseconds on an arbitrary epoch. Latency simulation and timeouts go
// through this interface so tests and replay can run on virtual time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() const = 0;
  virtual void sleep_ms(double ms) = 0;
};

class SteadyClock : public Clock {
 public:
  double now_ms() const override;
  void sleep_ms(double ms) override;
};

// Virtual time: sleeping advances the clock instantly. Safe to share across
// threads, although virtual time only makes sense with one driver.
class ManualClock : public Clock {
 public:
  explicit ManualClock(double start_ms = 0) : now_us_(to_us(start_ms)) {}
  double now_ms() const override { return now_us_.load() / 1000.0; }
  void sleep_ms(double ms) override { advance(ms); }
  void advance(double ms) {
    if (ms > 0) now_us_ += to_us(ms);
  }
  void set(double ms) { now_us_ = to_us(ms); }

 private:
  static long long to_us(double ms) {
    return static_cast<long long>(ms * 1000.0 + 0.5);
  }
  std::atomic<long long> now_us_;
};

std::shared_ptr<Clock> steady_clock();

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_CLOCK_H_
