#include "wpolab/replay.hpp"

#include <stdexcept>

namespace wpolab {

void validate(const TrajectorySegment& seg) {
  if (seg.steps.empty())
    throw std::invalid_argument("TrajectorySegment: empty");
  for (std::size_t k = 0; k + 1 < seg.steps.size(); ++k) {
    if (seg.steps[k].terminal || seg.steps[k].truncated)
      throw std::invalid_argument("TrajectorySegment: episode boundary mid-segment");
    if (seg.steps[k].next_state != seg.steps[k + 1].state)
      throw std::invalid_argument("TrajectorySegment: states do not chain");
  }
}

SegmentAssembler::SegmentAssembler(int n_step) : n_step_(n_step) {
  if (n_step < 1) throw std::invalid_argument("SegmentAssembler: n_step must be >= 1");
}

std::vector<TrajectorySegment> SegmentAssembler::push(const Transition& t) {
  window_.push_back(t);
  std::vector<TrajectorySegment> out;
  if (t.terminal || t.truncated) return end_episode();
  if (window_.size() == static_cast<std::size_t>(n_step_) + 1) {
    out.push_back(TrajectorySegment{{window_.begin(), window_.end()}});
    window_.pop_front();
  }
  return out;
}

std::vector<TrajectorySegment> SegmentAssembler::end_episode() {
  std::vector<TrajectorySegment> out;
  while (!window_.empty()) {
    out.push_back(TrajectorySegment{{window_.begin(), window_.end()}});
    window_.pop_front();
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(TrajectorySegment seg) {
  validate(seg);
  if (data_.size() < capacity_) {
    data_.push_back(std::move(seg));
  } else {
    data_[next_] = std::move(seg);
  }
  next_ = (next_ + 1) % capacity_;
}

const TrajectorySegment& ReplayBuffer::sample(Rng& rng) const {
  if (data_.empty()) throw std::logic_error("ReplayBuffer::sample: empty buffer");
  return data_[rng.uniform_index(data_.size())];
}

}  // namespace wpolab
