#include "umbra/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace umbra {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written little-endian");

constexpr char kMagic[4] = {'U', 'M', 'B', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_str(std::ostream& out, const std::string& s) {
    write_u32(out, (std::uint32_t)s.size());
    out.write(s.data(), (std::streamsize)s.size());
}
void write_blob(std::ostream& out, const std::vector<double>& v) {
    write_u32(out, (std::uint32_t)v.size());
    out.write(reinterpret_cast<const char*>(v.data()), (std::streamsize)(v.size() * 8));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::int64_t read_i64(std::istream& in) {
    std::int64_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::string read_str(std::istream& in) {
    std::string s(read_u32(in), '\0');
    in.read(s.data(), (std::streamsize)s.size());
    return s;
}
std::vector<double> read_blob(std::istream& in) {
    std::vector<double> v(read_u32(in));
    in.read(reinterpret_cast<char*>(v.data()), (std::streamsize)(v.size() * 8));
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_str(out, ckpt.config_echo);
    write_i64(out, ckpt.epochs_done);
    write_i64(out, ckpt.global_step);
    write_str(out, ckpt.rng_state);
    write_u32(out, (std::uint32_t)ckpt.params.size());
    for (const auto& [name, blob] : ckpt.params) {
        write_str(out, name);
        write_blob(out, blob);
    }
    out.put(ckpt.optimizer ? 1 : 0);
    if (ckpt.optimizer) {
        write_i64(out, ckpt.optimizer->t);
        for (const auto& m : ckpt.optimizer->m) write_blob(out, m);
        for (const auto& v : ckpt.optimizer->v) write_blob(out, v);
    }
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("bad checkpoint magic in: " + path);
    if (read_u32(in) != kVersion) throw CheckpointError("unsupported checkpoint version");

    Checkpoint ckpt;
    ckpt.config_echo = read_str(in);
    ckpt.epochs_done = read_i64(in);
    ckpt.global_step = read_i64(in);
    ckpt.rng_state = read_str(in);
    const std::uint32_t n = read_u32(in);
    ckpt.params.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = read_str(in);
        ckpt.params.emplace_back(std::move(name), read_blob(in));
    }
    if (in.get() == 1) {
        AdamW::State s;
        s.t = read_i64(in);
        s.m.resize(n);
        s.v.resize(n);
        for (auto& m : s.m) m = read_blob(in);
        for (auto& v : s.v) v = read_blob(in);
        ckpt.optimizer = std::move(s);
    }
    if (!in) throw CheckpointError("truncated checkpoint: " + path);
    return ckpt;
}

void restore_params(RestorationModel& model, const Checkpoint& ckpt) {
    auto& items = model.params().items;
    if (items.size() != ckpt.params.size())
        throw CheckpointError("checkpoint parameter count does not match model");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& [name, blob] = ckpt.params[i];
        if (items[i].first != name || items[i].second.size() != blob.size())
            throw CheckpointError("checkpoint entry mismatch at '" + name + "'");
        items[i].second.value() = blob;
    }
}

Checkpoint snapshot(const RestorationModel& model) {
    Checkpoint ckpt;
    for (const auto& [name, t] : model.params().items)
        ckpt.params.emplace_back(name, t.value());
    return ckpt;
}

std::uint64_t param_hash(const RestorationModel& model) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, t] : model.params().items) {
        mix(name.data(), name.size());
        mix(t.value().data(), t.value().size() * 8);
    }
    return h;
}

}  // namespace umbra
