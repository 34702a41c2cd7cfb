#pragma once
// Reader/writer for a small NRRD subset: magic NRRD0004, detached headers not
// supported, 3-D little-endian data, type short or float, diagonal space
// directions, raw or gzip encoding. gzip members are emitted with a fixed
// header (mtime 0, OS 255) so identical inputs produce identical bytes.

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "radstab/csv.hpp"
#include "radstab/errors.hpp"
#include "radstab/volume.hpp"

namespace radstab {

enum class NrrdEncoding { Raw, Gzip };

namespace detail {

inline std::vector<unsigned char> gzip_compress(const unsigned char* data, std::size_t size) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::vector<unsigned char> out = {0x1f, 0x8b, 8, 0, 0, 0, 0, 0, 0, 255};
    zs.next_in = const_cast<unsigned char*>(data);
    zs.avail_in = static_cast<uInt>(size);
    unsigned char buf[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = buf;
        zs.avail_out = sizeof(buf);
        rc = deflate(&zs, Z_FINISH);
        out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    } while (rc == Z_OK);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
    const std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, data, static_cast<uInt>(size)));
    const std::uint32_t isize = static_cast<std::uint32_t>(size);
    for (std::uint32_t v : {crc, isize})
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    return out;
}

inline std::vector<unsigned char> gzip_decompress(const unsigned char* data, std::size_t size,
                                                  std::size_t expected) {
    if (size < 18 || data[0] != 0x1f || data[1] != 0x8b || data[2] != 8)
        throw input_error("bad gzip stream in NRRD data");
    const unsigned flags = data[3];
    std::size_t off = 10;
    if (flags & 4) {  // FEXTRA
        if (off + 2 > size) throw input_error("truncated gzip header");
        const std::size_t xlen = data[off] | (data[off + 1] << 8);
        off += 2 + xlen;
    }
    for (unsigned bit : {8u, 16u}) {  // FNAME, FCOMMENT: zero-terminated
        if (flags & bit) {
            while (off < size && data[off] != 0) ++off;
            ++off;
        }
    }
    if (flags & 2) off += 2;  // FHCRC
    if (off >= size) throw input_error("truncated gzip header");

    std::vector<unsigned char> out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw std::runtime_error("inflateInit2 failed");
    zs.next_in = const_cast<unsigned char*>(data + off);
    zs.avail_in = static_cast<uInt>(size - off);
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected)
        throw input_error("gzip data does not inflate to the expected size");
    return out;
}

struct NrrdHeader {
    std::string type;  // "short" or "float"
    Geometry geom;
    NrrdEncoding encoding = NrrdEncoding::Raw;
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

// Parses "(a,b,c)" triples.
inline Vec3 parse_vector3(const std::string& s, const std::string& path) {
    Vec3 v{};
    const std::size_t open = s.find('(');
    const std::size_t close = s.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw input_error(path + ": malformed vector '" + s + "'");
    std::string inner = s.substr(open + 1, close - open - 1);
    for (char& c : inner)
        if (c == ',') c = ' ';
    std::istringstream iss(inner);
    if (!(iss >> v[0] >> v[1] >> v[2])) throw input_error(path + ": malformed vector '" + s + "'");
    return v;
}

inline NrrdHeader read_nrrd_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    if (trim(line) != "NRRD0004") throw input_error(path + ": unsupported magic (want NRRD0004)");

    NrrdHeader h;
    bool have_sizes = false, have_dirs = false, have_type = false;
    int dimension = -1;
    Vec3 dir[3];
    while (std::getline(in, line)) {
        if (trim(line).empty()) break;  // header/data separator
        if (line[0] == '#') continue;
        const std::size_t colon = line.find(": ");
        if (colon == std::string::npos) throw input_error(path + ": malformed header line '" + line + "'");
        const std::string key = trim(line.substr(0, colon));
        const std::string val = trim(line.substr(colon + 2));
        if (key == "type") {
            if (val != "short" && val != "float")
                throw input_error(path + ": unsupported element type '" + val + "'");
            h.type = val;
            have_type = true;
        } else if (key == "dimension") {
            dimension = std::stoi(val);
        } else if (key == "sizes") {
            std::istringstream iss(val);
            if (!(iss >> h.geom.dims[0] >> h.geom.dims[1] >> h.geom.dims[2]))
                throw input_error(path + ": malformed sizes");
            have_sizes = true;
        } else if (key == "space directions") {
            std::istringstream iss(val);
            std::string tok[3];
            if (!(iss >> tok[0] >> tok[1] >> tok[2]))
                throw input_error(path + ": malformed space directions");
            for (int a = 0; a < 3; ++a) dir[a] = parse_vector3(tok[a], path);
            have_dirs = true;
        } else if (key == "space origin") {
            h.geom.origin = parse_vector3(val, path);
        } else if (key == "encoding") {
            if (val == "raw")
                h.encoding = NrrdEncoding::Raw;
            else if (val == "gzip" || val == "gz")
                h.encoding = NrrdEncoding::Gzip;
            else
                throw input_error(path + ": unsupported encoding '" + val + "'");
        } else if (key == "endian") {
            if (val != "little") throw input_error(path + ": only little-endian data supported");
        }
        // other fields (space, kinds, content, ...) are ignored
    }
    if (!have_type) throw input_error(path + ": missing type field");
    if (dimension != 3) throw input_error(path + ": dimension != 3");
    if (!have_sizes) throw input_error(path + ": missing sizes field");
    if (!have_dirs) throw input_error(path + ": missing space directions");
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a != b && dir[a][b] != 0.0)
                throw input_error(path + ": non-diagonal direction matrix");
        }
        h.geom.spacing[a] = dir[a][a];
    }
    validate_geometry(h.geom);
    return h;
}

inline std::vector<unsigned char> read_nrrd_payload(std::istream& in, const NrrdHeader& h,
                                                    const std::string& path) {
    const std::size_t elem = (h.type == "short") ? 2 : 4;
    const std::size_t want = h.geom.voxel_count() * elem;
    std::vector<unsigned char> body((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (h.encoding == NrrdEncoding::Gzip) return gzip_decompress(body.data(), body.size(), want);
    if (body.size() < want) throw input_error(path + ": truncated data section");
    body.resize(want);
    return body;
}

inline void write_nrrd(const std::string& path, const Geometry& g, const std::string& type,
                       const unsigned char* payload, std::size_t payload_size,
                       NrrdEncoding encoding) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open for writing: " + path);
    out << "NRRD0004\n";
    out << "type: " << type << "\n";
    out << "dimension: 3\n";
    out << "sizes: " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << "\n";
    out << "space directions: (" << csv::format_double(g.spacing[0]) << ",0,0) (0,"
        << csv::format_double(g.spacing[1]) << ",0) (0,0," << csv::format_double(g.spacing[2])
        << ")\n";
    out << "space origin: (" << csv::format_double(g.origin[0]) << ','
        << csv::format_double(g.origin[1]) << ',' << csv::format_double(g.origin[2]) << ")\n";
    out << "endian: little\n";
    out << "encoding: " << (encoding == NrrdEncoding::Gzip ? "gzip" : "raw") << "\n";
    out << "\n";
    if (encoding == NrrdEncoding::Gzip) {
        const std::vector<unsigned char> z = gzip_compress(payload, payload_size);
        out.write(reinterpret_cast<const char*>(z.data()), static_cast<std::streamsize>(z.size()));
    } else {
        out.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(payload_size));
    }
    if (!out) throw input_error("write failed: " + path);
}

}  // namespace detail

inline Volume load_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open NRRD file: " + path);
    const detail::NrrdHeader h = detail::read_nrrd_header(in, path);
    const std::vector<unsigned char> bytes = detail::read_nrrd_payload(in, h, path);
    Volume v = make_volume(h.geom);
    const std::size_t n = h.geom.voxel_count();
    if (h.type == "short") {
        for (std::size_t i = 0; i < n; ++i) {
            std::int16_t s;
            std::memcpy(&s, bytes.data() + 2 * i, 2);
            v.data[i] = static_cast<double>(s);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            float f;
            std::memcpy(&f, bytes.data() + 4 * i, 4);
            v.data[i] = static_cast<double>(f);
        }
    }
    validate_volume(v);
    return v;
}

inline void save_volume(const Volume& v, const std::string& path,
                        NrrdEncoding encoding = NrrdEncoding::Raw) {
    validate_volume(v);
    const std::size_t n = v.geom.voxel_count();
    std::vector<unsigned char> bytes(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const float f = static_cast<float>(v.data[i]);
        std::memcpy(bytes.data() + 4 * i, &f, 4);
    }
    detail::write_nrrd(path, v.geom, "float", bytes.data(), bytes.size(), encoding);
}

inline Mask load_mask(const std::string& path) {
    const Volume v = load_volume(path);
    std::vector<std::uint8_t> vox(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) vox[i] = (v.data[i] != 0.0);
    return make_mask(v.geom, std::move(vox));
}

inline void save_mask(const Mask& m, const std::string& path,
                      NrrdEncoding encoding = NrrdEncoding::Raw) {
    validate_geometry(m.geom);
    const std::size_t n = m.geom.voxel_count();
    std::vector<unsigned char> bytes(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t s = m.voxels[i] ? 1 : 0;
        std::memcpy(bytes.data() + 2 * i, &s, 2);
    }
    detail::write_nrrd(path, m.geom, "short", bytes.data(), bytes.size(), encoding);
}

}  // namespace radstab
