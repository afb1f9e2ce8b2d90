#pragma once

// Bulk-synchronous execution over logical ranks. A superstep runs a callable
// once per rank on a worker pool and returns only when every rank finished;
// data crosses ranks exclusively through Exchange objects between supersteps.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "cpaft/errors.hpp"

namespace cpaft::bsp {

class Runtime {
 public:
  Runtime(int n_ranks, int n_threads) : n_ranks_(n_ranks), n_threads_(std::max(1, n_threads)) {
    if (n_ranks < 1) throw PreconditionError("bsp runtime: n_ranks must be >= 1");
    if (n_threads_ > 1) {
      // Lift the worker limit so oversubscribed requests (more threads than
      // cores) still get the pool size they asked for.
      limit_ = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                     static_cast<std::size_t>(n_threads_));
      arena_ = std::make_unique<tbb::task_arena>(n_threads_);
    }
  }

  int ranks() const { return n_ranks_; }
  int threads() const { return n_threads_; }
  std::uint64_t supersteps() const { return supersteps_; }

  /// Runs fn(rank) for every rank. With a single thread ranks run inline in
  /// ascending order, which is the reference schedule.
  template <class Fn>
  void superstep(Fn&& fn) {
    ++supersteps_;
    if (!arena_ || n_ranks_ == 1) {
      for (int r = 0; r < n_ranks_; ++r) fn(r);
      return;
    }
    arena_->execute([&] { tbb::parallel_for(0, n_ranks_, [&](int r) { fn(r); }); });
  }

 private:
  int n_ranks_;
  int n_threads_;
  std::unique_ptr<tbb::global_control> limit_;
  std::unique_ptr<tbb::task_arena> arena_;
  std::uint64_t supersteps_ = 0;
};

/// Point-to-point mailbox for one communication phase. Rank `src` may only
/// call send(src, ...) during a superstep, so outboxes need no locking.
/// Delivery concatenates sources in ascending rank order and sorts each
/// source's messages by `key`, making the applied order schedule-free.
template <class Msg>
class Exchange {
 public:
  explicit Exchange(int n_ranks)
      : n_(n_ranks), boxes_(static_cast<std::size_t>(n_ranks) * static_cast<std::size_t>(n_ranks)) {}

  void send(int src, int dst, Msg m) { box(src, dst).push_back(std::move(m)); }

  struct Delivered {
    int source;
    Msg msg;
  };

  template <class Key>
  std::vector<Delivered> deliver(int dst, Key key) const {
    std::vector<Delivered> out;
    for (int src = 0; src < n_; ++src) {
      std::vector<Msg> msgs = boxes_[index(src, dst)];
      std::stable_sort(msgs.begin(), msgs.end(), [&](const Msg& a, const Msg& b) { return key(a) < key(b); });
      for (auto& m : msgs) out.push_back({src, std::move(m)});
    }
    return out;
  }

  void clear() {
    for (auto& b : boxes_) b.clear();
  }

 private:
  std::size_t index(int src, int dst) const {
    return static_cast<std::size_t>(src) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(dst);
  }
  std::vector<Msg>& box(int src, int dst) { return boxes_[index(src, dst)]; }

  int n_;
  std::vector<std::vector<Msg>> boxes_;
};

}  // namespace cpaft::bsp
