#include "sadq/nn/param_set.hpp"

#include <cstring>

#include "sadq/common/error.hpp"

namespace sadq::nn {

std::size_t ParamSet::add(std::string name, Matrix init) {
  if (!init.allFinite()) fail(ErrorKind::kShapeMismatch, "non-finite initial value for " + name);
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

std::size_t ParamSet::total_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool ParamSet::same_shapes(const ParamSet& other) const {
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].rows() != other.values_[i].rows() || values_[i].cols() != other.values_[i].cols()) return false;
  }
  return true;
}

void ParamSet::copy_from(const ParamSet& other) {
  if (!same_shapes(other)) fail(ErrorKind::kShapeMismatch, "parameter layouts differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = other.values_[i];
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (!same_shapes(other)) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::memcmp(values_[i].data(), other.values_[i].data(), sizeof(double) * values_[i].size()) != 0) {
      return false;
    }
  }
  return true;
}

std::uint64_t ParamSet::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : values_) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(v.size()); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

Gradients zero_gradients(const ParamSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    g.push_back(Matrix::Zero(params.value(i).rows(), params.value(i).cols()));
  }
  return g;
}

void sync_target(const ParamSet& online, ParamSet& target) { target.copy_from(online); }

void ParamSet::save(ByteWriter& out) const {
  out.put<std::uint64_t>(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out.put_string(names_[i]);
    out.put<std::int64_t>(values_[i].rows());
    out.put<std::int64_t>(values_[i].cols());
    out.put_doubles(values_[i].data(), static_cast<std::size_t>(values_[i].size()));
  }
}

void ParamSet::load(ByteReader& in) {
  if (in.get<std::uint64_t>() != values_.size()) fail(ErrorKind::kShapeMismatch, "parameter count differs");
  std::vector<Matrix> loaded(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const std::string name = in.get_string();
    const auto rows = in.get<std::int64_t>();
    const auto cols = in.get<std::int64_t>();
    if (name != names_[i] || rows != values_[i].rows() || cols != values_[i].cols()) {
      fail(ErrorKind::kShapeMismatch, "parameter layout differs at " + names_[i]);
    }
    const auto data = in.get_doubles();
    if (static_cast<std::int64_t>(data.size()) != rows * cols) fail(ErrorKind::kShapeMismatch, "parameter size");
    loaded[i] = Eigen::Map<const Matrix>(data.data(), rows, cols);
  }
  values_ = std::move(loaded);
}

}  // namespace sadq::nn
