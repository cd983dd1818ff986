#include "sadq/train/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sadq/common/error.hpp"

namespace sadq {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim) {
  if (capacity == 0) fail(ErrorKind::kConfigInvalid, "schedule.buffer_size must be > 0");
  if (obs_dim == 0) fail(ErrorKind::kConfigInvalid, "replay buffer needs a positive observation width");
  s_.resize(capacity * obs_dim);
  s_next_.resize(capacity * obs_dim);
  a_.resize(capacity);
  r_.resize(capacity);
  done_.resize(capacity);
  truncated_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (t.s.size() != obs_dim_ || t.s_next.size() != obs_dim_) {
    fail(ErrorKind::kShapeMismatch, "transition observation width " + std::to_string(t.s.size()) + ", buffer holds " +
                                        std::to_string(obs_dim_));
  }
  const auto finite = [](const Observation& o) { return std::all_of(o.begin(), o.end(), [](double x) { return std::isfinite(x); }); };
  if (!finite(t.s) || !finite(t.s_next) || !std::isfinite(t.r)) {
    fail(ErrorKind::kConfigInvalid, "non-finite transition rejected by the replay buffer");
  }
  std::copy(t.s.begin(), t.s.end(), s_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
  std::copy(t.s_next.begin(), t.s_next.end(), s_next_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
  a_[cursor_] = t.a.index;
  r_[cursor_] = t.r;
  done_[cursor_] = t.done ? 1 : 0;
  truncated_[cursor_] = t.truncated ? 1 : 0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) fail(ErrorKind::kEmptyBuffer, "replay index out of range");
  const std::size_t k = slot(i);
  const auto from = [&](const std::vector<double>& v) {
    return Observation(v.begin() + static_cast<std::ptrdiff_t>(k * obs_dim_),
                       v.begin() + static_cast<std::ptrdiff_t>((k + 1) * obs_dim_));
  };
  return {from(s_), ActionId{a_[k]}, r_[k], from(s_next_), done_[k] != 0, truncated_[k] != 0};
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (size_ == 0) fail(ErrorKind::kEmptyBuffer, "sampling from an empty replay buffer");
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.index(size_));
  return idx;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const { return gather(sample_indices(n, rng)); }

Batch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  const auto n = static_cast<Eigen::Index>(indices.size());
  const auto d = static_cast<Eigen::Index>(obs_dim_);
  Batch b;
  b.s.resize(n, d);
  b.s_next.resize(n, d);
  b.a.resize(indices.size());
  b.r.resize(indices.size());
  b.done.resize(indices.size());
  for (Eigen::Index row = 0; row < n; ++row) {
    const std::size_t i = indices[static_cast<std::size_t>(row)];
    if (i >= size_) fail(ErrorKind::kEmptyBuffer, "replay index out of range");
    const std::size_t k = slot(i);
    for (Eigen::Index c = 0; c < d; ++c) {
      b.s(row, c) = s_[k * obs_dim_ + static_cast<std::size_t>(c)];
      b.s_next(row, c) = s_next_[k * obs_dim_ + static_cast<std::size_t>(c)];
    }
    b.a[row] = a_[k];
    b.r[row] = r_[k];
    b.done[row] = done_[k];
  }
  return b;
}

void ReplayBuffer::save(ByteWriter& out) const {
  out.put<std::uint64_t>(capacity_);
  out.put<std::uint64_t>(obs_dim_);
  out.put<std::uint64_t>(size_);
  out.put<std::uint64_t>(cursor_);
  out.put_doubles(s_.data(), s_.size());
  out.put_doubles(s_next_.data(), s_next_.size());
  out.put_doubles(r_.data(), r_.size());
  for (std::size_t i = 0; i < capacity_; ++i) {
    out.put<std::uint64_t>(a_[i]);
    out.put<std::uint8_t>(static_cast<std::uint8_t>(done_[i] | (truncated_[i] << 1)));
  }
}

void ReplayBuffer::load(ByteReader& in) {
  if (in.get<std::uint64_t>() != capacity_ || in.get<std::uint64_t>() != obs_dim_) {
    fail(ErrorKind::kShapeMismatch, "replay buffer layout differs from the checkpoint");
  }
  size_ = in.get<std::uint64_t>();
  cursor_ = in.get<std::uint64_t>();
  if (size_ > capacity_ || cursor_ >= capacity_) fail(ErrorKind::kCorruptChecksum, "replay buffer counters");
  s_ = in.get_doubles();
  s_next_ = in.get_doubles();
  r_ = in.get_doubles();
  if (s_.size() != capacity_ * obs_dim_ || s_next_.size() != s_.size() || r_.size() != capacity_) {
    fail(ErrorKind::kCorruptChecksum, "replay buffer arrays");
  }
  for (std::size_t i = 0; i < capacity_; ++i) {
    a_[i] = in.get<std::uint64_t>();
    const auto flags = in.get<std::uint8_t>();
    done_[i] = flags & 1;
    truncated_[i] = (flags >> 1) & 1;
  }
}

double EpsilonSchedule::at(std::uint64_t step) const {
  if (step >= decay_steps) return end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

void EpsilonSchedule::validate() const {
  if (!(start >= 0.0 && start <= 1.0)) fail(ErrorKind::kConfigInvalid, "schedule.eps_start must lie in [0, 1]");
  if (!(end >= 0.0 && end <= 1.0)) fail(ErrorKind::kConfigInvalid, "schedule.eps_end must lie in [0, 1]");
  if (decay_steps == 0) fail(ErrorKind::kConfigInvalid, "schedule.eps_decay must be > 0");
}

}  // namespace sadq
