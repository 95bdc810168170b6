#include <bit>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "imputer/domain.hpp"
#include "imputer/nnkit/optim.hpp"

namespace imputer::nn {

namespace {

constexpr char kMagic[8] = {'P', 'I', 'M', 'P', 'B', 'L', 'O', 'B'};
constexpr int kBlobVersion = 1;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_params(const ParamList& params, std::uint64_t seed,
                                           const std::string& model_kind) {
    nlohmann::json header;
    header["version"] = kBlobVersion;
    header["seed"] = seed;
    header["model"] = model_kind;
    header["dtype"] = "f64le";
    header["layout"] = "column-major";
    header["params"] = nlohmann::json::array();
    for (const ParamRef& p : params) {
        header["params"].push_back({{"name", p.name}, {"shape", {p.value->rows(), p.value->cols()}}});
    }
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (const ParamRef& p : params) {
        const double* d = p.value->data();
        for (Eigen::Index i = 0; i < p.value->size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(d[i]));
    }
    return out;
}

BlobHeader deserialize_params(const std::vector<std::uint8_t>& blob, const ParamList& params) {
    if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 8) != 0) {
        throw DataError("parameter blob: bad magic");
    }
    const std::uint64_t len = get_u64(blob.data() + 8);
    if (len > blob.size() - 16) throw DataError("parameter blob: truncated header");
    const std::string text(blob.begin() + 16, blob.begin() + 16 + static_cast<std::ptrdiff_t>(len));
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("parameter blob: header is not JSON: ") + e.what());
    }

    BlobHeader h;
    h.version = header.value("version", 0);
    if (h.version != kBlobVersion) throw DataError("parameter blob: unsupported version " + std::to_string(h.version));
    h.seed = header.value("seed", std::uint64_t{0});
    h.model_kind = header.value("model", std::string{});
    for (const auto& p : header.at("params")) {
        h.names.push_back(p.at("name").get<std::string>());
        h.shapes.emplace_back(p.at("shape").at(0).get<long>(), p.at("shape").at(1).get<long>());
    }
    if (h.names.size() != params.size()) throw DataError("parameter blob: parameter count mismatch");

    std::size_t offset = 16 + len;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& w = *params[k].value;
        if (h.names[k] != params[k].name || h.shapes[k].first != w.rows() || h.shapes[k].second != w.cols()) {
            throw DataError("parameter blob: layout mismatch at " + params[k].name);
        }
        const auto bytes = static_cast<std::size_t>(w.size()) * 8;
        if (offset + bytes > blob.size()) throw DataError("parameter blob: truncated payload");
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data()[i] = std::bit_cast<double>(get_u64(blob.data() + offset + static_cast<std::size_t>(i) * 8));
        }
        offset += bytes;
    }
    if (offset != blob.size()) throw DataError("parameter blob: trailing bytes");
    return h;
}

}  // namespace imputer::nn
