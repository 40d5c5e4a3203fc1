#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <variant>

namespace vvaas {

// Opaque textual identifier, distinct per entity kind.
template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    auto operator<=>(const Id&) const = default;

private:
    std::string value_;
};

template <class Tag>
std::ostream& operator<<(std::ostream& os, const Id<Tag>& id) {
    return os << id.str();
}

using VehicleId = Id<struct VehicleTag>;
using RsuId = Id<struct RsuTag>;
using VvId = Id<struct VvTag>;
using ConsumerId = Id<struct ConsumerTag>;

using TxnId = std::uint64_t;

// Where a virtual vehicle lives: a mobile host or a roadside unit.
using HostRef = std::variant<VehicleId, RsuId>;

inline bool is_vehicle(const HostRef& h) { return std::holds_alternative<VehicleId>(h); }
inline bool is_rsu(const HostRef& h) { return std::holds_alternative<RsuId>(h); }

inline const std::string& host_name(const HostRef& h) {
    return std::visit([](const auto& id) -> const std::string& { return id.str(); }, h);
}

}  // namespace vvaas

template <class Tag>
struct std::hash<vvaas::Id<Tag>> {
    std::size_t operator()(const vvaas::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
