#pragma once

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgd/geometry.hpp"
#include "vgd/image.hpp"

namespace vgd {

// ---------------------------------------------------------------------------
// SVG 1.1 subset: one root element, optional background rect, one path
// element per VectorPath using only M/C/Z, fixed 3-decimal coordinates.
// emit(parse(emit(s))) == emit(s) byte-for-byte.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt3(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("svg: non-finite coordinate");
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    std::string s(buf, res.ptr);
    if (s == "-0.000") s = "0.000"; // canonical zero
    return s;
}

inline std::string hex_color(const Color& c) {
    auto q = [](double v) {
        int x = static_cast<int>(std::lround(clamp01(v) * 255.0));
        return x;
    };
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", q(c.r), q(c.g), q(c.b));
    return buf;
}

inline std::string path_data(const VectorPath& p) {
    std::string d;
    auto put = [&](Vec2 v) { d += fmt3(v.x) + "," + fmt3(v.y); };
    if (p.kind == PathKind::FixedSquare) {
        // four straight cubic segments with handles at the thirds
        d += "M ";
        put(p.points[0]);
        for (int i = 0; i < 4; ++i) {
            Vec2 a = p.points[i], b = p.points[(i + 1) % 4];
            d += " C ";
            put(a + (1.0 / 3.0) * (b - a));
            d += " ";
            put(a + (2.0 / 3.0) * (b - a));
            d += " ";
            put(b);
        }
        d += " Z";
        return d;
    }
    int k = p.segment_count();
    d += "M ";
    put(p.points[0]);
    for (int s = 0; s < k; ++s) {
        CubicSegment cs = p.segment(s);
        d += " C ";
        put(cs.p1);
        d += " ";
        put(cs.p2);
        d += " ";
        put(cs.p3);
    }
    if (p.kind == PathKind::ClosedFilled) d += " Z";
    return d;
}

} // namespace detail

inline std::string emit_svg(const Scene& scene) {
    std::vector<const VectorPath*> order;
    order.reserve(scene.paths.size());
    for (const auto& p : scene.paths) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](const VectorPath* a, const VectorPath* b) { return a->z_index < b->z_index; });

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(scene.width) +
           "\" height=\"" + std::to_string(scene.height) + "\" viewBox=\"0 0 " +
           std::to_string(scene.width) + " " + std::to_string(scene.height) + "\">\n";
    out += "<rect width=\"" + std::to_string(scene.width) + "\" height=\"" +
           std::to_string(scene.height) + "\" fill=\"" + detail::hex_color(scene.background) +
           "\"/>\n";
    for (const VectorPath* p : order) {
        out += "<path d=\"" + detail::path_data(*p) + "\"";
        switch (p->kind) {
            case PathKind::ClosedFilled:
                out += " fill=\"" + detail::hex_color(p->fill) + "\" fill-opacity=\"" +
                       detail::fmt3(p->fill.a) + "\"";
                break;
            case PathKind::FixedSquare:
                out += " fill=\"" + detail::hex_color(p->fill) + "\" fill-opacity=\"" +
                       detail::fmt3(p->fill.a) + "\" data-kind=\"square\"";
                break;
            case PathKind::OpenStroked:
                out += " fill=\"none\" stroke=\"" + detail::hex_color(p->stroke) +
                       "\" stroke-opacity=\"" + detail::fmt3(p->stroke.a) + "\" stroke-width=\"" +
                       detail::fmt3(p->stroke_width) + "\" stroke-linecap=\"round\"";
                break;
        }
        out += "/>\n";
    }
    out += "</svg>\n";
    return out;
}

namespace detail {

struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attrs;
};

class XmlScanner {
public:
    explicit XmlScanner(const std::string& text) : s_(text) {}

    // next element tag; returns false at end; throws on anything outside the
    // emitted subset
    bool next(XmlElement& el, bool& closing) {
        skip_ws();
        while (pos_ < s_.size() && s_[pos_] != '<') ++pos_; // stray text ignored
        if (pos_ >= s_.size()) return false;
        ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '?') { // xml declaration
            std::size_t end = s_.find("?>", pos_);
            if (end == std::string::npos) throw std::runtime_error("svg parse: unterminated declaration");
            pos_ = end + 2;
            return next(el, closing);
        }
        closing = false;
        if (pos_ < s_.size() && s_[pos_] == '/') {
            closing = true;
            ++pos_;
        }
        el.name.clear();
        el.attrs.clear();
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-'))
            el.name += s_[pos_++];
        for (;;) {
            skip_ws();
            if (pos_ >= s_.size()) throw std::runtime_error("svg parse: unterminated tag");
            if (s_[pos_] == '>') {
                ++pos_;
                return true;
            }
            if (s_[pos_] == '/') {
                ++pos_;
                skip_ws();
                if (pos_ >= s_.size() || s_[pos_] != '>') throw std::runtime_error("svg parse: bad tag end");
                ++pos_;
                return true;
            }
            std::string key;
            while (pos_ < s_.size() && s_[pos_] != '=' && !std::isspace(static_cast<unsigned char>(s_[pos_])))
                key += s_[pos_++];
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '=') throw std::runtime_error("svg parse: attribute without value");
            ++pos_;
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != '"') throw std::runtime_error("svg parse: unquoted attribute");
            ++pos_;
            std::string val;
            while (pos_ < s_.size() && s_[pos_] != '"') val += s_[pos_++];
            if (pos_ >= s_.size()) throw std::runtime_error("svg parse: unterminated attribute");
            ++pos_;
            el.attrs[key] = val;
        }
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    const std::string& s_;
    std::size_t pos_ = 0;
};

inline Color parse_hex_color(const std::string& s) {
    if (s.size() != 7 || s[0] != '#') throw std::runtime_error("svg parse: bad color '" + s + "'");
    auto hex = [&](int i) {
        int v = 0;
        auto res = std::from_chars(s.data() + i, s.data() + i + 2, v, 16);
        if (res.ec != std::errc()) throw std::runtime_error("svg parse: bad color '" + s + "'");
        return v / 255.0;
    };
    return {hex(1), hex(3), hex(5), 1.0};
}

inline double parse_num(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw std::runtime_error("svg parse: bad number '" + s + "'");
    return v;
}

inline std::vector<Vec2> parse_path_points(const std::string& d, bool& closed) {
    std::vector<double> nums;
    std::vector<char> cmds;
    std::size_t i = 0;
    closed = false;
    while (i < d.size()) {
        char ch = d[i];
        if (ch == 'M' || ch == 'C') {
            cmds.push_back(ch);
            ++i;
        } else if (ch == 'Z') {
            closed = true;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
            ++i;
        } else if (ch == '-' || ch == '.' || std::isdigit(static_cast<unsigned char>(ch))) {
            double v = 0;
            auto res = std::from_chars(d.data() + i, d.data() + d.size(), v);
            if (res.ec != std::errc()) throw std::runtime_error("svg parse: bad path number");
            nums.push_back(v);
            i = static_cast<std::size_t>(res.ptr - d.data());
        } else {
            throw std::runtime_error(std::string("svg parse: unsupported path command '") + ch + "'");
        }
    }
    if (cmds.empty() || cmds[0] != 'M') throw std::runtime_error("svg parse: path must start with M");
    if (nums.size() % 2 != 0 || nums.size() < 2) throw std::runtime_error("svg parse: odd coordinate count");
    std::vector<Vec2> pts;
    for (std::size_t k = 0; k + 1 < nums.size(); k += 2) pts.push_back({nums[k], nums[k + 1]});
    if ((pts.size() - 1) % 3 != 0) throw std::runtime_error("svg parse: malformed cubic path");
    return pts;
}

} // namespace detail

// Inverse of emit_svg on canonical documents; rejects anything outside the
// subset with an error naming the construct.
inline Scene parse_svg(const std::string& text) {
    detail::XmlScanner scan(text);
    detail::XmlElement el;
    bool closing = false;
    if (!scan.next(el, closing) || el.name != "svg")
        throw std::runtime_error("svg parse: expected <svg> root");
    Scene scene;
    scene.width = static_cast<int>(detail::parse_num(el.attrs.at("width")));
    scene.height = static_cast<int>(detail::parse_num(el.attrs.at("height")));
    bool saw_rect = false;
    int z = 0;
    while (scan.next(el, closing)) {
        if (closing) {
            if (el.name == "svg") break;
            throw std::runtime_error("svg parse: unexpected closing tag: " + el.name);
        }
        if (el.name == "rect") {
            if (saw_rect) throw std::runtime_error("svg parse: unsupported element: second rect");
            saw_rect = true;
            scene.background = detail::parse_hex_color(el.attrs.at("fill"));
            continue;
        }
        if (el.name != "path") throw std::runtime_error("svg parse: unsupported element: " + el.name);

        bool closed = false;
        std::vector<Vec2> pts = detail::parse_path_points(el.attrs.at("d"), closed);
        VectorPath p;
        p.z_index = z++;
        auto fill_it = el.attrs.find("fill");
        if (fill_it != el.attrs.end() && fill_it->second == "none") {
            if (closed) throw std::runtime_error("svg parse: stroked paths must be open");
            p.kind = PathKind::OpenStroked;
            p.stroke = detail::parse_hex_color(el.attrs.at("stroke"));
            if (el.attrs.count("stroke-opacity"))
                p.stroke.a = detail::parse_num(el.attrs.at("stroke-opacity"));
            p.stroke_width = detail::parse_num(el.attrs.at("stroke-width"));
            p.points = pts;
        } else {
            if (!closed) throw std::runtime_error("svg parse: filled paths must be closed");
            if (pts.size() < 4) throw std::runtime_error("svg parse: degenerate path");
            pts.pop_back(); // closing point duplicates the start
            auto kind_it = el.attrs.find("data-kind");
            if (kind_it != el.attrs.end() && kind_it->second == "square") {
                p.kind = PathKind::FixedSquare;
                if (pts.size() != 12) throw std::runtime_error("svg parse: malformed square");
                p.points = {pts[0], pts[3], pts[6], pts[9]}; // segment endpoints = corners
            } else {
                p.kind = PathKind::ClosedFilled;
                p.points = pts;
            }
            p.fill = detail::parse_hex_color(el.attrs.at("fill"));
            if (el.attrs.count("fill-opacity"))
                p.fill.a = detail::parse_num(el.attrs.at("fill-opacity"));
        }
        scene.paths.push_back(std::move(p));
    }
    return scene;
}

// ---------------------------------------------------------------------------
// Raster I/O: PPM P6 8-bit (bit-exact interchange) and PNG 8-bit RGB.
// ---------------------------------------------------------------------------

enum class ImageFormat { PPM, PNG };

inline ImageFormat format_from_path(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == "ppm") return ImageFormat::PPM;
    if (ext == "png") return ImageFormat::PNG;
    throw std::invalid_argument("unsupported image extension: " + path);
}

namespace detail {

inline std::vector<unsigned char> quantize8(const Raster& img) {
    std::vector<unsigned char> bytes(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        bytes[i] = static_cast<unsigned char>(std::lround(clamp01(img.data[i]) * 255.0));
    return bytes;
}

inline Raster from_bytes(const std::vector<unsigned char>& bytes, int h, int w) {
    Raster img(h, w, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = bytes[i] / 255.0;
    return img;
}

inline void write_ppm(const std::string& path, const Raster& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << "P6\n" << img.w << " " << img.h << "\n255\n";
    auto bytes = quantize8(img);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline Raster read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    f >> magic;
    if (magic != "P6") throw std::runtime_error("malformed PPM header (want P6): " + path);
    auto next_int = [&]() {
        for (;;) {
            f >> std::ws;
            if (f.peek() == '#') {
                std::string line;
                std::getline(f, line);
                continue;
            }
            long v;
            if (!(f >> v)) throw std::runtime_error("malformed PPM header: " + path);
            return v;
        }
    };
    long w = next_int(), h = next_int(), maxval = next_int();
    if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15)
        throw std::runtime_error("PPM dimension overflow: " + path);
    if (maxval != 255) throw std::runtime_error("unsupported PPM maxval (want 255): " + path);
    f.get(); // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
    f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (f.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw std::runtime_error("truncated PPM data: " + path);
    return from_bytes(bytes, static_cast<int>(h), static_cast<int>(w));
}

inline void png_chunk(std::ofstream& f, const char type[4], const std::vector<unsigned char>& data) {
    auto be32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        f.write(reinterpret_cast<char*>(b), 4);
    };
    be32(static_cast<std::uint32_t>(data.size()));
    f.write(type, 4);
    if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    be32(static_cast<std::uint32_t>(crc));
}

inline void write_png(const std::string& path, const Raster& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    f.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<unsigned char> ihdr(13);
    auto put_be = [&](std::vector<unsigned char>& v, std::size_t at, std::uint32_t x) {
        v[at] = static_cast<unsigned char>(x >> 24);
        v[at + 1] = static_cast<unsigned char>(x >> 16);
        v[at + 2] = static_cast<unsigned char>(x >> 8);
        v[at + 3] = static_cast<unsigned char>(x);
    };
    put_be(ihdr, 0, static_cast<std::uint32_t>(img.w));
    put_be(ihdr, 4, static_cast<std::uint32_t>(img.h));
    ihdr[8] = 8;  // bit depth
    ihdr[9] = 2;  // color type RGB
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    png_chunk(f, "IHDR", ihdr);

    auto bytes = quantize8(img);
    std::vector<unsigned char> raw(static_cast<std::size_t>(img.h) * (1 + 3 * img.w));
    for (int y = 0; y < img.h; ++y) {
        raw[static_cast<std::size_t>(y) * (1 + 3 * img.w)] = 0; // filter none
        std::memcpy(&raw[static_cast<std::size_t>(y) * (1 + 3 * img.w) + 1],
                    &bytes[static_cast<std::size_t>(y) * 3 * img.w], 3 * static_cast<std::size_t>(img.w));
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> idat(bound);
    if (compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("PNG compression failed");
    idat.resize(bound);
    png_chunk(f, "IDAT", idat);
    png_chunk(f, "IEND", {});
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

inline Raster read_png(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    unsigned char sig[8];
    f.read(reinterpret_cast<char*>(sig), 8);
    static const unsigned char want[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (f.gcount() != 8 || std::memcmp(sig, want, 8) != 0)
        throw std::runtime_error("malformed PNG signature: " + path);
    auto be32 = [&]() {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
               (static_cast<std::uint32_t>(b[2]) << 8) | b[3];
    };
    int w = 0, h = 0;
    std::vector<unsigned char> idat;
    bool done = false;
    while (f && !done) {
        std::uint32_t len = be32();
        char type[5] = {};
        f.read(type, 4);
        if (!f) throw std::runtime_error("truncated PNG: " + path);
        std::vector<unsigned char> data(len);
        if (len) f.read(reinterpret_cast<char*>(data.data()), len);
        be32(); // crc, unchecked on read
        std::string t(type);
        if (t == "IHDR") {
            if (len != 13) throw std::runtime_error("malformed IHDR: " + path);
            w = (data[0] << 24) | (data[1] << 16) | (data[2] << 8) | data[3];
            h = (data[4] << 24) | (data[5] << 16) | (data[6] << 8) | data[7];
            if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15)
                throw std::runtime_error("PNG dimension overflow: " + path);
            if (data[8] != 8 || data[9] != 2 || data[12] != 0)
                throw std::runtime_error("unsupported PNG (need 8-bit RGB, no interlace): " + path);
        } else if (t == "IDAT") {
            idat.insert(idat.end(), data.begin(), data.end());
        } else if (t == "IEND") {
            done = true;
        } // ancillary chunks ignored
    }
    if (w == 0 || idat.empty()) throw std::runtime_error("PNG missing image data: " + path);
    std::size_t stride = 1 + 3 * static_cast<std::size_t>(w);
    std::vector<unsigned char> raw(static_cast<std::size_t>(h) * stride);
    uLongf rawlen = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &rawlen, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        rawlen != raw.size())
        throw std::runtime_error("PNG inflate failed: " + path);
    std::vector<unsigned char> pix(static_cast<std::size_t>(h) * w * 3);
    const int bpp = 3;
    for (int y = 0; y < h; ++y) {
        unsigned char filter = raw[static_cast<std::size_t>(y) * stride];
        const unsigned char* src = &raw[static_cast<std::size_t>(y) * stride + 1];
        unsigned char* dst = &pix[static_cast<std::size_t>(y) * w * 3];
        const unsigned char* up = y > 0 ? &pix[static_cast<std::size_t>(y - 1) * w * 3] : nullptr;
        for (int i = 0; i < w * 3; ++i) {
            int a = i >= bpp ? dst[i - bpp] : 0;
            int b = up ? up[i] : 0;
            int c = (up && i >= bpp) ? up[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: throw std::runtime_error("unsupported PNG filter: " + path);
            }
            dst[i] = static_cast<unsigned char>(v & 0xFF);
        }
    }
    return from_bytes(pix, h, w);
}

} // namespace detail

inline void write_image(const std::string& path, const Raster& img, ImageFormat fmt) {
    if (img.c != 3) throw std::invalid_argument("write_image: 3-channel raster required");
    if (fmt == ImageFormat::PPM)
        detail::write_ppm(path, img);
    else
        detail::write_png(path, img);
}

inline void write_image(const std::string& path, const Raster& img) {
    write_image(path, img, format_from_path(path));
}

inline Raster read_image(const std::string& path, ImageFormat fmt) {
    return fmt == ImageFormat::PPM ? detail::read_ppm(path) : detail::read_png(path);
}

inline Raster read_image(const std::string& path) {
    return read_image(path, format_from_path(path));
}

inline void write_svg(const std::string& path, const Scene& scene) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f << emit_svg(scene);
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline Scene read_svg(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_svg(ss.str());
}

} // namespace vgd
