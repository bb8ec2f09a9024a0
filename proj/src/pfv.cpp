#include "posterlab/pfv.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "posterlab/error.hpp"

static_assert(std::endian::native == std::endian::little, "PFV i/o assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace posterlab {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'V', '1'};

template <typename T>
void read_raw(std::istream& in, T& value, const std::string& path) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw Error("truncated PFV file: " + path);
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

std::string read_string(std::istream& in, const std::string& path) {
    std::uint16_t len = 0;
    read_raw(in, len, path);
    std::string s(len, '\0');
    if (len > 0) {
        in.read(s.data(), len);
        if (!in) throw Error("truncated PFV file: " + path);
    }
    return s;
}

} // namespace

FeatureFile read_pfv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open PFV file: " + path);

    char magic[4] = {0};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("bad PFV magic in " + path);

    FeatureFile file;
    file.channel = read_string(in, path);
    std::uint32_t count = 0;
    read_raw(in, count, path);
    read_raw(in, file.dim, path);

    file.records.resize(count);
    for (auto& rec : file.records) {
        rec.id = read_string(in, path);
        rec.values.resize(file.dim);
        if (file.dim > 0) {
            in.read(reinterpret_cast<char*>(rec.values.data()),
                    static_cast<std::streamsize>(sizeof(float)) * file.dim);
            if (!in) throw Error("truncated PFV file: " + path);
        }
    }
    return file;
}

void write_pfv(const std::string& path, const FeatureFile& file) {
    for (const auto& rec : file.records) {
        if (rec.values.size() != file.dim)
            throw Error("PFV record '" + rec.id + "' has dim " + std::to_string(rec.values.size()) +
                        ", file dim is " + std::to_string(file.dim));
        if (rec.id.size() > 0xffff) throw Error("PFV id too long: " + rec.id);
    }
    if (file.channel.size() > 0xffff) throw Error("PFV channel name too long");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write PFV file: " + path);

    out.write(kMagic, 4);
    write_raw(out, static_cast<std::uint16_t>(file.channel.size()));
    out.write(file.channel.data(), static_cast<std::streamsize>(file.channel.size()));
    write_raw(out, static_cast<std::uint32_t>(file.records.size()));
    write_raw(out, file.dim);
    for (const auto& rec : file.records) {
        write_raw(out, static_cast<std::uint16_t>(rec.id.size()));
        out.write(rec.id.data(), static_cast<std::streamsize>(rec.id.size()));
        out.write(reinterpret_cast<const char*>(rec.values.data()),
                  static_cast<std::streamsize>(sizeof(float)) * file.dim);
    }
    if (!out) throw Error("write failed: " + path);
}

} // namespace posterlab
