#include "actionimg/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "actionimg/errors.hpp"

namespace actionimg {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'I', 'M', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value))
        throw DataError("truncated checkpoint " + path.string());
    return value;
}

template <typename Scalar>
void put_vector(std::ostream& out, const Vector<Scalar>& v) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(Scalar)));
}

template <typename Scalar>
Vector<Scalar> get_vector(std::istream& in, const std::filesystem::path& path) {
    const auto n = get<std::uint64_t>(in, path);
    if (n > (std::uint64_t{1} << 34)) throw DataError("implausible vector length in " + path.string());
    Vector<Scalar> v(static_cast<Eigen::Index>(n));
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(Scalar))))
        throw DataError("truncated checkpoint " + path.string());
    return v;
}

std::string average_name(AverageMode mode) { return mode == AverageMode::Logits ? "logits" : "probabilities"; }

}  // namespace

json to_json(const NetConfig& config) {
    json blocks = json::array();
    for (const auto& b : config.trunk.blocks)
        blocks.push_back({{"channels", b.out_channels}, {"stride", b.stride}, {"pool", b.pool}});
    return {{"blocks", blocks},
            {"scales", config.scales},
            {"class_count", config.class_count},
            {"shared_classifier", config.shared_classifier},
            {"average", average_name(config.average)}};
}

NetConfig net_config_from_json(const json& doc) {
    NetConfig config;
    try {
        if (doc.contains("blocks")) {
            config.trunk.blocks.clear();
            for (const auto& b : doc.at("blocks"))
                config.trunk.blocks.push_back(ConvBlockConfig{b.at("channels").get<int>(), b.value("stride", 1),
                                                              b.value("pool", true)});
        }
        if (doc.contains("scales")) config.scales = doc.at("scales").get<std::vector<int>>();
        config.class_count = doc.value("class_count", config.class_count);
        config.shared_classifier = doc.value("shared_classifier", config.shared_classifier);
        const std::string avg = doc.value("average", std::string("logits"));
        if (avg == "logits") config.average = AverageMode::Logits;
        else if (avg == "probabilities") config.average = AverageMode::Probabilities;
        else throw ConfigError("net: average must be \"logits\" or \"probabilities\"");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("net config: ") + e.what());
    }
    return config;
}

json to_json(const OptimizerConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"momentum", c.momentum},      {"weight_decay", c.weight_decay},
            {"hold_epochs", c.hold_epochs},     {"step_epochs", c.step_epochs}, {"step_factor", c.step_factor}};
}

OptimizerConfig optimizer_config_from_json(const json& doc) {
    OptimizerConfig c;
    try {
        c.learning_rate = doc.value("learning_rate", c.learning_rate);
        c.momentum = doc.value("momentum", c.momentum);
        c.weight_decay = doc.value("weight_decay", c.weight_decay);
        c.hold_epochs = doc.value("hold_epochs", c.hold_epochs);
        c.step_epochs = doc.value("step_epochs", c.step_epochs);
        c.step_factor = doc.value("step_factor", c.step_factor);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("optimizer config: ") + e.what());
    }
    c.validate();
    return c;
}

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, const Checkpoint<Scalar>& ckpt) {
    const json header = {{"net", to_json(ckpt.net)},
                         {"optimizer", to_json(ckpt.optimizer)},
                         {"epochs_done", ckpt.state.epochs_done},
                         {"metadata", ckpt.metadata}};
    const std::string text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, sizeof(Scalar));
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    put_vector(out, ckpt.parameters);
    put_vector(out, ckpt.state.velocity);
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic)
        throw DataError(path.string() + " is not a checkpoint");
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto scalar_bytes = get<std::uint32_t>(in, path);
    if (scalar_bytes != sizeof(Scalar))
        throw DataError("checkpoint stores " + std::to_string(scalar_bytes) + "-byte scalars, expected " +
                        std::to_string(sizeof(Scalar)));
    const auto length = get<std::uint64_t>(in, path);
    if (length > (std::uint64_t{1} << 30)) throw DataError("implausible checkpoint header in " + path.string());
    std::string text(length, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw DataError("truncated checkpoint " + path.string());

    Checkpoint<Scalar> ckpt;
    try {
        const json header = json::parse(text);
        ckpt.net = net_config_from_json(header.at("net"));
        ckpt.optimizer = optimizer_config_from_json(header.at("optimizer"));
        ckpt.state.epochs_done = header.at("epochs_done").get<int>();
        ckpt.metadata = header.value("metadata", json::object());
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": bad checkpoint header: " + e.what());
    }
    ckpt.parameters = get_vector<Scalar>(in, path);
    ckpt.state.velocity = get_vector<Scalar>(in, path);
    return ckpt;
}

template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace actionimg
