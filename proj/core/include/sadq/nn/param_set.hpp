#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "sadq/common/bytes.hpp"

namespace sadq::nn {

/// Batch-major dense matrix: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Named parameter arrays with shapes fixed at registration time.
class ParamSet {
 public:
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const { return values_.size(); }
  std::size_t total_count() const;

  const std::string& name(std::size_t i) const { return names_.at(i); }
  const Matrix& value(std::size_t i) const { return values_.at(i); }
  /// Writable view; the shape cannot change through it.
  Eigen::Ref<Matrix> mutable_value(std::size_t i) { return values_.at(i); }

  bool same_shapes(const ParamSet& other) const;
  /// Hard copy of every array; ShapeMismatch if layouts differ.
  void copy_from(const ParamSet& other);

  bool operator==(const ParamSet& other) const;

  /// FNV-1a over the raw bytes of every array (trajectory fingerprints).
  std::uint64_t fingerprint() const;

  /// Raw float64 arrays with names and shapes; load requires the same layout.
  void save(ByteWriter& out) const;
  void load(ByteReader& in);

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

/// One gradient array per ParamSet entry, same shapes.
using Gradients = std::vector<Matrix>;

Gradients zero_gradients(const ParamSet& params);

/// Hard copy of online into target (target-network synchronisation).
void sync_target(const ParamSet& online, ParamSet& target);

}  // namespace sadq::nn
