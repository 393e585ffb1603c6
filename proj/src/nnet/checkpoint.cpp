#include "nmtlab/nnet/checkpoint.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/text.hpp"

#include <bit>
#include <cstring>
#include <sstream>

namespace nmtlab::nnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << v;
    return ss.str();
}

std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t at) {
    if (at + sizeof(T) > bytes.size()) throw ParseError("checkpoint: truncated");
    T v;
    std::memcpy(&v, bytes.data() + at, sizeof(T));
    return v;
}

struct TensorRef {
    std::string name;
    const Mat* value;
};

} // namespace

std::string serialize_checkpoint(const Checkpoint& c, Dtype dtype) {
    std::vector<TensorRef> tensors;
    for (std::size_t i = 0; i < c.params.size(); ++i)
        tensors.push_back({c.params.name(static_cast<int>(i)), &c.params.value(static_cast<int>(i))});
    if (!c.optimizer.m.empty()) {
        if (c.optimizer.m.size() != c.params.size()) throw Error("checkpoint: optimizer state does not match parameters");
        for (std::size_t i = 0; i < c.params.size(); ++i)
            tensors.push_back({"adam.m/" + c.params.name(static_cast<int>(i)), &c.optimizer.m[i]});
        for (std::size_t i = 0; i < c.params.size(); ++i)
            tensors.push_back({"adam.v/" + c.params.name(static_cast<int>(i)), &c.optimizer.v[i]});
    }

    const std::size_t elem = dtype == Dtype::f64 ? 8 : 4;
    nlohmann::json index = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& t : tensors) {
        index.push_back({{"name", t.name},
                         {"shape", {t.value->rows(), t.value->cols()}},
                         {"dtype", dtype == Dtype::f64 ? "f64" : "f32"},
                         {"offset", offset}});
        offset += elem * static_cast<std::size_t>(t.value->size());
    }

    nlohmann::json rng = nlohmann::json::array();
    for (auto w : c.rng) rng.push_back(hex64(w));
    const nlohmann::json header = {{"config", c.config.to_json()},
                                   {"optimizer", c.hyper.to_json()},
                                   {"step", c.step},
                                   {"seed", hex64(c.seed)},
                                   {"rng", rng},
                                   {"vocab_fingerprint", hex64(c.vocab_fingerprint)},
                                   {"cursor", {{"epoch", c.epoch}, {"position", c.position}}},
                                   {"assets", c.assets},
                                   {"tensors", index}};
    const std::string header_text = header.dump();

    std::string out = "NMTL";
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, header_text.size());
    out += header_text;
    out.reserve(out.size() + offset);
    for (const auto& t : tensors) {
        const double* data = t.value->data();
        for (Eigen::Index i = 0; i < t.value->size(); ++i) {
            if (dtype == Dtype::f64) put<double>(out, data[i]);
            else put<float>(out, static_cast<float>(data[i]));
        }
    }
    return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    if (bytes.size() < 16 || bytes.substr(0, 4) != "NMTL") throw ParseError("checkpoint: bad magic");
    const auto version = get<std::uint32_t>(bytes, 4);
    if (version != kCheckpointVersion)
        throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
    const auto header_len = get<std::uint64_t>(bytes, 8);
    if (16 + header_len > bytes.size()) throw ParseError("checkpoint: truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint header: ") + e.what());
    }
    const std::size_t payload = 16 + header_len;

    Checkpoint c;
    c.config = ModelConfig::from_json(header.at("config"));
    c.hyper = OptimizerHyper::from_json(header.at("optimizer"));
    c.step = header.at("step").get<long>();
    c.seed = parse_hex64(header.at("seed").get<std::string>());
    const auto& rng = header.at("rng");
    if (rng.size() != 4) throw ParseError("checkpoint: bad rng state");
    for (std::size_t i = 0; i < 4; ++i) c.rng[i] = parse_hex64(rng[i].get<std::string>());
    c.vocab_fingerprint = parse_hex64(header.at("vocab_fingerprint").get<std::string>());
    c.epoch = header.at("cursor").at("epoch").get<long>();
    c.position = header.at("cursor").at("position").get<long>();
    c.assets = header.value("assets", nlohmann::json::object());

    std::vector<std::pair<std::string, Mat>> adam_m, adam_v;
    for (const auto& t : header.at("tensors")) {
        const std::string name = t.at("name").get<std::string>();
        const auto rows = t.at("shape")[0].get<Eigen::Index>();
        const auto cols = t.at("shape")[1].get<Eigen::Index>();
        const std::string dtype = t.at("dtype").get<std::string>();
        const std::size_t offset = t.at("offset").get<std::size_t>();
        Mat m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            if (dtype == "f64") m.data()[i] = get<double>(bytes, payload + offset + 8 * static_cast<std::size_t>(i));
            else if (dtype == "f32") m.data()[i] = get<float>(bytes, payload + offset + 4 * static_cast<std::size_t>(i));
            else throw ParseError("checkpoint: unknown dtype '" + dtype + "'");
        }
        if (name.rfind("adam.m/", 0) == 0) adam_m.emplace_back(name.substr(7), std::move(m));
        else if (name.rfind("adam.v/", 0) == 0) adam_v.emplace_back(name.substr(7), std::move(m));
        else c.params.add(name, std::move(m));
    }
    if (!adam_m.empty()) {
        if (adam_m.size() != c.params.size() || adam_v.size() != c.params.size())
            throw ParseError("checkpoint: incomplete optimizer state");
        for (std::size_t i = 0; i < adam_m.size(); ++i) {
            if (adam_m[i].first != c.params.name(static_cast<int>(i)) || adam_v[i].first != adam_m[i].first)
                throw ParseError("checkpoint: optimizer state out of order");
            c.optimizer.m.push_back(std::move(adam_m[i].second));
            c.optimizer.v.push_back(std::move(adam_v[i].second));
        }
    }
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, Dtype dtype) {
    text::write_file(path, serialize_checkpoint(ckpt, dtype));
}

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(text::read_file(path)); }

} // namespace nmtlab::nnet
