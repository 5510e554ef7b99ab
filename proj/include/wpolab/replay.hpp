#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "wpolab/rng.hpp"
#include "wpolab/vec.hpp"

namespace wpolab {

struct Transition {
  Vec state;
  Vec action;
  double reward = 0.0;
  Vec next_state;
  bool terminal = false;
  bool truncated = false;
  bool action_clipped = false;
};

// Up to n_step + 1 consecutive transitions from one episode (fewer at the
// episode end). States chain: steps[k].next_state == steps[k+1].state.
struct TrajectorySegment {
  std::vector<Transition> steps;

  bool ends_episode() const {
    return !steps.empty() && steps.back().terminal;
  }
};

void validate(const TrajectorySegment& seg);

// Streams transitions into overlapping segments: one segment per start
// index, each n_step + 1 transitions long until the episode end shortens
// the tail ones.
class SegmentAssembler {
 public:
  explicit SegmentAssembler(int n_step);
  // returns the segments completed by this transition
  std::vector<TrajectorySegment> push(const Transition& t);
  // flush at episode boundary; also called internally on terminal steps
  std::vector<TrajectorySegment> end_episode();

 private:
  int n_step_;
  std::deque<Transition> window_;
};

// Uniform-sampling FIFO ring of segments.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(TrajectorySegment seg);
  const TrajectorySegment& sample(Rng& rng) const;
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<TrajectorySegment> data_;
};

}  // namespace wpolab
