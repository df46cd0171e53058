#pragma once

#include <filesystem>

#include <json.hpp>

#include "actionimg/net.hpp"

namespace actionimg {

nlohmann::json to_json(const NetConfig& config);
NetConfig net_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const OptimizerConfig& config);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& doc);

/// Network, optimizer state and free-form run metadata.
template <typename Scalar>
struct Checkpoint {
    NetConfig net;
    OptimizerConfig optimizer;
    Vector<Scalar> parameters;
    OptimizerState<Scalar> state;
    nlohmann::json metadata = nlohmann::json::object();
};

/// Binary container, version 1:
///   "AIMGCKPT" | u32 version | u32 scalar bytes | u64 header length | JSON header
///   | u64 n | n parameters | u64 n | n momentum values
/// Numbers are stored in host byte order; values round-trip bit-exactly.
template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<Scalar>& checkpoint);

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

}  // namespace actionimg
