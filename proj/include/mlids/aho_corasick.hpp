#pragma once

#include <array>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace mlids {

// Multi-pattern byte-string search. Build once, scan many times; scanning is
// O(text length + hits) via a dense goto table completed with failure links.
class AhoCorasick {
 public:
  AhoCorasick() { nodes_.emplace_back(); }

  /// Adds a pattern (non-empty) and returns its id. Must precede build().
  int add(std::string_view pattern) {
    if (built_) throw std::logic_error("AhoCorasick: add after build");
    if (pattern.empty()) throw std::invalid_argument("AhoCorasick: empty pattern");
    int32_t node = 0;
    for (unsigned char b : pattern) {
      int32_t next = nodes_[static_cast<size_t>(node)].next[b];
      if (next < 0) {
        next = static_cast<int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[static_cast<size_t>(node)].next[b] = next;
      }
      node = next;
    }
    nodes_[static_cast<size_t>(node)].out.push_back(static_cast<int32_t>(count_));
    return static_cast<int>(count_++);
  }

  size_t size() const { return count_; }

  void build() {
    if (built_) return;
    std::queue<int32_t> bfs;
    for (int c = 0; c < 256; ++c) {
      int32_t v = nodes_[0].next[c];
      if (v < 0) {
        nodes_[0].next[c] = 0;
      } else {
        nodes_[static_cast<size_t>(v)].fail = 0;
        bfs.push(v);
      }
    }
    while (!bfs.empty()) {
      int32_t u = bfs.front();
      bfs.pop();
      Node& nu = nodes_[static_cast<size_t>(u)];
      const Node& nf = nodes_[static_cast<size_t>(nu.fail)];
      nu.out_link = nf.out.empty() ? nf.out_link : nu.fail;
      for (int c = 0; c < 256; ++c) {
        int32_t v = nu.next[c];
        int32_t via_fail = nf.next[c];
        if (v < 0) {
          nu.next[c] = via_fail;
        } else {
          nodes_[static_cast<size_t>(v)].fail = via_fail;
          bfs.push(v);
        }
      }
    }
    built_ = true;
  }

  /// Calls emit(pattern_id) for every occurrence (ids may repeat).
  template <typename Fn>
  void scan(std::string_view text, Fn&& emit) const {
    if (!built_) throw std::logic_error("AhoCorasick: scan before build");
    int32_t s = 0;
    for (unsigned char b : text) {
      s = nodes_[static_cast<size_t>(s)].next[b];
      for (int32_t u = s; u >= 0; u = nodes_[static_cast<size_t>(u)].out_link)
        for (int32_t id : nodes_[static_cast<size_t>(u)].out) emit(id);
    }
  }

 private:
  struct Node {
    Node() { next.fill(-1); }
    std::array<int32_t, 256> next;
    int32_t fail = 0;
    int32_t out_link = -1;  // nearest suffix state with output
    std::vector<int32_t> out;
  };

  std::vector<Node> nodes_;
  size_t count_ = 0;
  bool built_ = false;
};

}  // namespace mlids
