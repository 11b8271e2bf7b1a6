#include "ps2r/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace ps2r {

namespace {

constexpr char kMagic[4] = {'P', 'S', '2', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2)) throw std::runtime_error("truncated checkpoint");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated checkpoint");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_tensor(std::ostream& out, const std::string& name,
                  const std::vector<std::uint32_t>& dims, const std::vector<double>& values) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(static_cast<char>(dims.size()));
    for (auto d : dims) put_u32(out, d);
    for (double v : values) put_f64(out, v);
}

std::vector<double> matrix_values(const Eigen::MatrixXd& m) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
    return v;
}

struct RawTensor {
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
};

} // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const EncoderConfig& enc, const ClassifierConfig& cls,
                     std::size_t target_points) {
    validate_params(params, enc, cls);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

    out.write(kMagic, 4);
    put_u32(out, kVersion);
    const std::uint32_t count =
        static_cast<std::uint32_t>(2 * (params.encoder.size() + params.classifier.size()) + 1);
    put_u32(out, count);

    auto dump = [&](const std::vector<Dense>& layers, bool is_encoder) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const Dense& d = layers[l];
            write_tensor(out, ModelParams::tensor_name(is_encoder, l, true),
                         {static_cast<std::uint32_t>(d.W.rows()),
                          static_cast<std::uint32_t>(d.W.cols())},
                         matrix_values(d.W));
            std::vector<double> bias(d.b.data(), d.b.data() + d.b.size());
            write_tensor(out, ModelParams::tensor_name(is_encoder, l, false),
                         {static_cast<std::uint32_t>(d.b.size())}, bias);
        }
    };
    dump(params.encoder, true);
    dump(params.classifier, false);

    write_tensor(out, "meta.config", {3},
                 {static_cast<double>(static_cast<int>(enc.kind)), static_cast<double>(enc.k),
                  static_cast<double>(target_points)});
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a PS2W checkpoint: " + path);
    const std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t count = get_u32(in);

    std::map<std::string, RawTensor> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t name_len = get_u16(in);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw std::runtime_error("truncated checkpoint");
        const int rank = in.get();
        if (rank < 0) throw std::runtime_error("truncated checkpoint");
        RawTensor t;
        std::size_t total = 1;
        for (int r = 0; r < rank; ++r) {
            t.dims.push_back(get_u32(in));
            total *= t.dims.back();
        }
        t.values.reserve(total);
        for (std::size_t v = 0; v < total; ++v) t.values.push_back(get_f64(in));
        tensors.emplace(std::move(name), std::move(t));
    }

    const auto meta_it = tensors.find("meta.config");
    if (meta_it == tensors.end() || meta_it->second.values.size() != 3)
        throw std::runtime_error("checkpoint missing meta.config: " + path);

    LoadedCheckpoint ck;
    const int kind = static_cast<int>(meta_it->second.values[0]);
    if (kind != 0 && kind != 1) throw std::runtime_error("checkpoint: bad encoder kind");
    ck.enc.kind = kind == 0 ? EncoderKind::point_mlp : EncoderKind::edge_conv;
    ck.enc.k = static_cast<int>(meta_it->second.values[1]);
    ck.target_points = static_cast<std::size_t>(meta_it->second.values[2]);

    auto fetch = [&](const std::string& name) -> const RawTensor& {
        const auto it = tensors.find(name);
        if (it == tensors.end())
            throw std::runtime_error("checkpoint missing tensor '" + name + "': " + path);
        return it->second;
    };
    auto load_layers = [&](bool is_encoder) {
        std::vector<Dense> layers;
        for (std::size_t l = 0;; ++l) {
            const std::string wname = ModelParams::tensor_name(is_encoder, l, true);
            if (tensors.find(wname) == tensors.end()) break;
            const RawTensor& wt = fetch(wname);
            const RawTensor& bt = fetch(ModelParams::tensor_name(is_encoder, l, false));
            if (wt.dims.size() != 2 || bt.dims.size() != 1 || bt.dims[0] != wt.dims[0])
                throw std::runtime_error("checkpoint: bad tensor shape in " + wname);
            Dense d(static_cast<int>(wt.dims[0]), static_cast<int>(wt.dims[1]));
            std::size_t idx = 0;
            for (std::uint32_t r = 0; r < wt.dims[0]; ++r)
                for (std::uint32_t c = 0; c < wt.dims[1]; ++c) d.W(r, c) = wt.values[idx++];
            for (std::uint32_t r = 0; r < bt.dims[0]; ++r) d.b(r) = bt.values[r];
            layers.push_back(std::move(d));
        }
        if (layers.empty())
            throw std::runtime_error(std::string("checkpoint missing ") +
                                     (is_encoder ? "encoder" : "classifier") + " layers: " + path);
        return layers;
    };
    ck.params.encoder = load_layers(true);
    ck.params.classifier = load_layers(false);

    ck.enc.layer_widths.clear();
    for (const auto& d : ck.params.encoder)
        ck.enc.layer_widths.push_back(static_cast<int>(d.W.rows()));
    const int expected_in = ck.enc.kind == EncoderKind::edge_conv ? 6 : 3;
    if (ck.params.encoder[0].W.cols() != expected_in)
        throw std::runtime_error("checkpoint: encoder input width inconsistent with kind");

    ck.cls.hidden_widths.clear();
    for (std::size_t l = 0; l + 1 < ck.params.classifier.size(); ++l)
        ck.cls.hidden_widths.push_back(static_cast<int>(ck.params.classifier[l].W.rows()));
    ck.cls.num_classes = static_cast<int>(ck.params.classifier.back().W.rows());

    validate_params(ck.params, ck.enc, ck.cls);
    return ck;
}

} // namespace ps2r
