#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

class Graph {
 public:
  void add_edge(const std::string& from, const std::string& to) {
    edges_[from].push_back(to);
    nodes_.insert(from);
    nodes_.insert(to);
  }

  std::vector<std::string> neighbors(const std::string& node) const {
    auto it = edges_.find(node);
    if (it == edges_.end()) {
      return {};
    }
    return it->second;
  }

  std::vector<std::string> bfs(const std::string& start) const {
    std::vector<std::string> order;
    std::set<std::string> seen{start};
    std::queue<std::string> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      std::string node = frontier.front();
      frontier.pop();
      order.push_back(node);
      for (const auto& next : neighbors(node)) {
        if (seen.insert(next).second) {
          frontier.push(next);
        }
      }
    }
    return order;
  }

  std::map<std::string, int> in_degrees() const {
    std::map<std::string, int> degree;
    for (const auto& node : nodes_) {
      degree[node] = 0;
    }
    for (const auto& [from, targets] : edges_) {
      for (const auto& to : targets) {
        ++degree[to];
      }
    }
    return degree;
  }

  bool topological_order(std::vector<std::string>& out) const {
    auto degree = in_degrees();
    std::queue<std::string> ready;
    for (const auto& [node, d] : degree) {
      if (d == 0) {
        ready.push(node);
      }
    }
    out.clear();
    while (!ready.empty()) {
      std::string node = ready.front();
      ready.pop();
      out.push_back(node);
      for (const auto& next : neighbors(node)) {
        if (--degree[next] == 0) {
          ready.push(next);
        }
      }
    }
    return out.size() == nodes_.size();
  }

 private:
  std::map<std::string, std::vector<std::string>> edges_;
  std::set<std::string> nodes_;
};
