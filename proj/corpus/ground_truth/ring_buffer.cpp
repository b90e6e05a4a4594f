#include <cstddef>
#include <stdexcept>
#include <vector>

template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : data_(capacity) {
    if (capacity == 0) {
      throw std::invalid_argument("capacity must be positive");
    }
  }

  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == data_.size(); }
  std::size_t size() const { return size_; }

  void push(const T& value) {
    data_[tail_] = value;
    tail_ = (tail_ + 1) % data_.size();
    if (full()) {
      head_ = (head_ + 1) % data_.size();
    } else {
      ++size_;
    }
  }

  T pop() {
    if (empty()) {
      throw std::out_of_range("pop from empty buffer");
    }
    T value = data_[head_];
    head_ = (head_ + 1) % data_.size();
    --size_;
    return value;
  }

  const T& front() const {
    if (empty()) {
      throw std::out_of_range("front of empty buffer");
    }
    return data_[head_];
  }

  std::vector<T> drain() {
    std::vector<T> out;
    out.reserve(size_);
    while (!empty()) {
      out.push_back(pop());
    }
    return out;
  }

 private:
  std::vector<T> data_;
  std::size_t head_ = 0;
  std::size_t tail_ = 0;
  std::size_t size_ = 0;
};

int sum_last(RingBuffer<int>& buffer) {
  int total = 0;
  for (int value : buffer.drain()) {
    total += value;
  }
  return total;
}
