#include "braintune/checkpoint.hpp"

#include "braintune/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace braintune {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const char* field) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw FormatError(std::string("checkpoint truncated while reading ") + field);
    return v;
}

std::uint64_t read_u64(std::istream& in, const char* field) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw FormatError(std::string("checkpoint truncated while reading ") + field);
    return v;
}

nlohmann::json config_to_json(const ModelBundle& bundle) {
    const ModelConfig& c = bundle.config;
    return {
        {"regions", c.regions},
        {"adapter_hidden", c.adapter_hidden},
        {"latent_dim", c.latent_dim},
        {"adapter_activation", c.adapter_activation == AdapterActivation::relu ? "relu" : "identity"},
        {"encoder",
         {{"depth", c.encoder.depth},
          {"heads", c.encoder.heads},
          {"embed", c.encoder.embed},
          {"ffn_hidden", c.encoder.ffn_hidden},
          {"use_ffn", c.encoder.use_ffn},
          {"use_norm", c.encoder.use_norm},
          {"frozen", bundle.encoder.frozen}}},
        {"rng_seed", bundle.rng_seed},
    };
}

ModelBundle bundle_from_json(const nlohmann::json& j) {
    ModelConfig config;
    try {
        config.regions = j.at("regions").get<std::size_t>();
        config.adapter_hidden = j.at("adapter_hidden").get<std::size_t>();
        config.latent_dim = j.at("latent_dim").get<std::size_t>();
        config.adapter_activation = j.at("adapter_activation").get<std::string>() == "identity"
                                        ? AdapterActivation::identity
                                        : AdapterActivation::relu;
        const auto& enc = j.at("encoder");
        config.encoder.depth = enc.at("depth").get<std::size_t>();
        config.encoder.heads = enc.at("heads").get<std::size_t>();
        config.encoder.embed = enc.at("embed").get<std::size_t>();
        config.encoder.ffn_hidden = enc.at("ffn_hidden").get<std::size_t>();
        config.encoder.use_ffn = enc.at("use_ffn").get<bool>();
        config.encoder.use_norm = enc.at("use_norm").get<bool>();
        ModelBundle bundle = init_bundle(config, j.at("rng_seed").get<std::uint64_t>());
        if (enc.at("frozen").get<bool>()) bundle.set_encoder_frozen(true);
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint config block: ") + e.what());
    }
}

} // namespace

void save_checkpoint(ModelBundle& bundle, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u32(out, kCheckpointVersion);

    const std::string config = config_to_json(bundle).dump();
    write_u64(out, config.size());
    out.write(config.data(), static_cast<std::streamsize>(config.size()));

    auto tensors = bundle.named_tensors();
    write_u64(out, tensors.size());
    for (auto& nt : tensors) {
        write_u64(out, nt.name.size());
        out.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
        const auto& shape = nt.tensor.shape();
        write_u64(out, shape.size());
        for (std::size_t d : shape) write_u64(out, d);
        const auto data = nt.tensor.data();
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    }
    if (!out) throw FormatError("write failure on checkpoint " + path.string());
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw FormatError("checkpoint " + path.string() + ": bad magic bytes");
    const std::uint32_t version = read_u32(in, "format version");
    if (version != kCheckpointVersion)
        throw FormatError("checkpoint " + path.string() + ": unsupported format version " +
                          std::to_string(version));

    const std::uint64_t config_len = read_u64(in, "config length");
    std::string config_text(config_len, '\0');
    if (!in.read(config_text.data(), static_cast<std::streamsize>(config_len)))
        throw FormatError("checkpoint truncated while reading config block");
    nlohmann::json config_json;
    try {
        config_json = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint config block: ") + e.what());
    }
    ModelBundle bundle = bundle_from_json(config_json);

    auto expected = bundle.named_tensors();
    const std::uint64_t count = read_u64(in, "tensor count");
    if (count != expected.size())
        throw FormatError("checkpoint tensor count " + std::to_string(count) + " does not match " +
                          std::to_string(expected.size()) + " expected from the config");
    for (auto& nt : expected) {
        const std::uint64_t name_len = read_u64(in, "tensor name length");
        std::string name(name_len, '\0');
        if (!in.read(name.data(), static_cast<std::streamsize>(name_len)))
            throw FormatError("checkpoint truncated while reading tensor name");
        if (name != nt.name)
            throw FormatError("checkpoint tensor '" + name + "' where '" + nt.name +
                              "' was expected");
        const std::uint64_t ndim = read_u64(in, ("rank of " + name).c_str());
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = read_u64(in, ("shape of " + name).c_str());
        if (shape != nt.tensor.shape())
            throw FormatError("checkpoint tensor '" + name + "': shape mismatch");
        auto dst = nt.tensor.mutable_data();
        if (!in.read(reinterpret_cast<char*>(dst.data()),
                     static_cast<std::streamsize>(dst.size() * sizeof(double))))
            throw FormatError("checkpoint truncated while reading data of '" + name + "'");
    }
    return bundle;
}

} // namespace braintune
