#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace rmfs {

/// Typed integer handle. Handles of different entity kinds do not convert into
/// each other; a default-constructed handle is invalid.
template <class Tag>
class Id {
 public:
  using value_type = std::int32_t;

  constexpr Id() = default;
  constexpr explicit Id(value_type v) : value_(v) {}
  constexpr explicit Id(std::size_t v) : value_(static_cast<value_type>(v)) {}

  constexpr value_type value() const { return value_; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(value_); }
  constexpr bool valid() const { return value_ >= 0; }

  friend constexpr auto operator<=>(Id, Id) = default;

 private:
  value_type value_ = -1;
};

using NodeId = Id<struct NodeTag>;
using PodId = Id<struct PodTag>;
using LocationId = Id<struct LocationTag>;
using StationId = Id<struct StationTag>;
using RobotId = Id<struct RobotTag>;

using SkuId = std::int32_t;
using OrderId = std::int64_t;
using Seconds = double;

}  // namespace rmfs

template <class Tag>
struct std::hash<rmfs::Id<Tag>> {
  std::size_t operator()(rmfs::Id<Tag> id) const noexcept {
    return std::hash<std::int32_t>{}(id.value());
  }
};
