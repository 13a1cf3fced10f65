#include "hwy/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hwy/io_util.hpp"

namespace hwy {

namespace {

constexpr char kMagic[4] = {'H', 'W', 'Y', '1'};
constexpr std::uint32_t kVersion = 1;

// The build targets little-endian machines; serialize words directly.
static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), 4);
}

void put_f64s(std::string& out, const Matrix& m) {
    out.append(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(double));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) {
        if (pos + n > buf.size()) throw TruncatedFileError(path + ": truncated checkpoint");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + pos, 4);
        pos += 4;
        return v;
    }
    Matrix f64s(std::size_t rows, std::size_t cols) {
        need(rows * cols * sizeof(double));
        Matrix m(rows, cols);
        std::memcpy(m.data.data(), buf.data() + pos, rows * cols * sizeof(double));
        pos += rows * cols * sizeof(double);
        return m;
    }
};

void put_plain(std::string& out, const PlainLayer& l) {
    out.push_back(0);
    out.push_back(static_cast<char>(l.act));
    put_u32(out, static_cast<std::uint32_t>(l.in_dim()));
    put_u32(out, static_cast<std::uint32_t>(l.out_dim()));
    put_f64s(out, l.w_h);
    put_f64s(out, l.b_h);
}

void put_highway(std::string& out, const HighwayLayer& l) {
    out.push_back(1);
    out.push_back(static_cast<char>(l.act));
    put_u32(out, static_cast<std::uint32_t>(l.dim()));
    put_u32(out, static_cast<std::uint32_t>(l.dim()));
    put_f64s(out, l.w_h);
    put_f64s(out, l.b_h);
    put_f64s(out, l.w_t);
    put_f64s(out, l.b_t);
}

} // namespace

void save_checkpoint(const Network& net, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(2 + net.body_size()));
    put_plain(out, net.first);
    if (net.body_kind == LayerKind::plain) {
        for (const auto& l : net.plain_body) put_plain(out, l);
    } else {
        for (const auto& l : net.highway_body) put_highway(out, l);
    }
    put_plain(out, net.output);
    atomic_write_file(path, out);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw BadMagicError(path + ": not a HWY1 checkpoint");
    }
    Reader r{buf, 4, path};
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint32_t layer_count = r.u32();
    if (layer_count < 2) throw IoError(path + ": fewer than two layers");

    auto read_layer = [&](bool& is_highway, PlainLayer& pl, HighwayLayer& hl) {
        const std::uint8_t kind = r.u8();
        const std::uint8_t act = r.u8();
        if (kind > 1 || act > 3) throw IoError(path + ": corrupt layer header");
        const std::uint32_t in_dim = r.u32();
        const std::uint32_t out_dim = r.u32();
        is_highway = kind == 1;
        if (is_highway) {
            if (in_dim != out_dim) throw IoError(path + ": non-square highway layer");
            hl.act = static_cast<Activation>(act);
            hl.w_h = r.f64s(in_dim, out_dim);
            hl.b_h = r.f64s(1, out_dim);
            hl.w_t = r.f64s(in_dim, out_dim);
            hl.b_t = r.f64s(1, out_dim);
        } else {
            pl.act = static_cast<Activation>(act);
            pl.w_h = r.f64s(in_dim, out_dim);
            pl.b_h = r.f64s(1, out_dim);
        }
    };

    Network net;
    bool is_highway = false;
    PlainLayer pl;
    HighwayLayer hl;

    read_layer(is_highway, pl, hl);
    if (is_highway) throw IoError(path + ": first layer must be plain");
    net.first = std::move(pl);

    net.body_kind = LayerKind::plain; // may flip to highway below
    for (std::uint32_t i = 1; i + 1 < layer_count; ++i) {
        read_layer(is_highway, pl, hl);
        if (is_highway) {
            net.body_kind = LayerKind::highway;
            net.highway_body.push_back(std::move(hl));
        } else {
            net.plain_body.push_back(std::move(pl));
        }
    }
    if (!net.plain_body.empty() && !net.highway_body.empty()) {
        throw IoError(path + ": mixed body layer kinds");
    }
    if (!net.highway_body.empty()) net.body_kind = LayerKind::highway;

    read_layer(is_highway, pl, hl);
    if (is_highway) throw IoError(path + ": output layer must be plain");
    net.output = std::move(pl);

    if (r.pos != buf.size()) throw IoError(path + ": trailing bytes after layers");
    return net;
}

} // namespace hwy
