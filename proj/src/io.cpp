#include "anystar/io.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace anystar {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

#pragma pack(push, 1)
struct NiftiHeader {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code;
    std::int16_t sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(NiftiHeader) == 348);

enum : std::int16_t {
    DT_UINT8 = 2,
    DT_INT16 = 4,
    DT_INT32 = 8,
    DT_FLOAT32 = 16,
    DT_FLOAT64 = 64,
    DT_INT8 = 256,
    DT_UINT16 = 512,
    DT_UINT32 = 768,
};

int type_size(int dt) {
    switch (dt) {
        case DT_UINT8:
        case DT_INT8: return 1;
        case DT_INT16:
        case DT_UINT16: return 2;
        case DT_INT32:
        case DT_UINT32:
        case DT_FLOAT32: return 4;
        case DT_FLOAT64: return 8;
        default: return 0;
    }
}

const char* dtype_name(int dt) {
    switch (dt) {
        case DT_UINT8: return "uint8";
        case DT_INT8: return "int8";
        case DT_INT16: return "int16";
        case DT_UINT16: return "uint16";
        case DT_INT32: return "int32";
        case DT_UINT32: return "uint32";
        case DT_FLOAT32: return "float32";
        case DT_FLOAT64: return "float64";
        default: return "unknown";
    }
}

int dtype_from_name(const std::string& s) {
    for (int dt : {DT_UINT8, DT_INT8, DT_INT16, DT_UINT16, DT_INT32, DT_UINT32, DT_FLOAT32, DT_FLOAT64}) {
        if (s == dtype_name(dt)) return dt;
    }
    return 0;
}

// Decoded volume of up to 4 dims with little-endian payload bytes.
struct RawVolume {
    std::array<int, 4> dims{1, 1, 1, 1};
    Spacing spacing{1.0, 1.0, 1.0};
    int datatype = DT_FLOAT32;
    double slope = 1.0;
    double inter = 0.0;
    std::vector<std::uint8_t> bytes;

    std::size_t count() const {
        return std::size_t(dims[0]) * std::size_t(dims[1]) * std::size_t(dims[2]) * std::size_t(dims[3]);
    }

    double value(std::size_t i) const {
        const std::uint8_t* p = bytes.data() + i * std::size_t(type_size(datatype));
        auto load = [p](auto v) {
            std::memcpy(&v, p, sizeof v);
            return static_cast<double>(v);
        };
        switch (datatype) {
            case DT_UINT8: return load(std::uint8_t{});
            case DT_INT8: return load(std::int8_t{});
            case DT_INT16: return load(std::int16_t{});
            case DT_UINT16: return load(std::uint16_t{});
            case DT_INT32: return load(std::int32_t{});
            case DT_UINT32: return load(std::uint32_t{});
            case DT_FLOAT32: return load(float{});
            case DT_FLOAT64: return load(double{});
        }
        return 0.0;
    }
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& in) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) throw IoError("gzip: init failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(in.size())) + 64);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t n = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("gzip: compression failed");
    out.resize(n);
    return out;
}

std::vector<std::uint8_t> gunzip_bytes(const std::vector<std::uint8_t>& in, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError(path + ": gzip init failed");
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> buf(1 << 20);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError(path + ": corrupt gzip stream");
        }
        out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw IoError(path + ": truncated gzip stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

template <typename T>
void swap_bytes(T& v) {
    auto* p = reinterpret_cast<std::uint8_t*>(&v);
    std::reverse(p, p + sizeof(T));
}

std::vector<std::uint8_t> encode_nifti(const RawVolume& v) {
    NiftiHeader h{};
    h.sizeof_hdr = 348;
    h.regular = 'r';
    const int ndim = v.dims[3] > 1 ? 4 : 3;
    h.dim[0] = static_cast<std::int16_t>(ndim);
    for (int a = 0; a < 4; ++a) {
        if (v.dims[a] > std::numeric_limits<std::int16_t>::max()) throw IoError("nifti: dimension too large");
        h.dim[a + 1] = static_cast<std::int16_t>(v.dims[a]);
    }
    for (int a = 5; a < 8; ++a) h.dim[a] = 1;
    h.datatype = static_cast<std::int16_t>(v.datatype);
    h.bitpix = static_cast<std::int16_t>(8 * type_size(v.datatype));
    h.pixdim[0] = 1.0f;
    for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = static_cast<float>(v.spacing[a]);
    for (int a = 4; a < 8; ++a) h.pixdim[a] = 1.0f;
    h.vox_offset = 352.0f;
    h.scl_slope = 0.0f;
    h.xyzt_units = 2;  // mm
    h.qform_code = 0;
    h.sform_code = 1;
    h.srow_x[0] = static_cast<float>(v.spacing[0]);
    h.srow_y[1] = static_cast<float>(v.spacing[1]);
    h.srow_z[2] = static_cast<float>(v.spacing[2]);
    std::memcpy(h.magic, "n+1\0", 4);
    std::vector<std::uint8_t> out(352 + v.bytes.size(), 0);
    std::memcpy(out.data(), &h, sizeof h);
    std::copy(v.bytes.begin(), v.bytes.end(), out.begin() + 352);
    return out;
}

RawVolume decode_nifti(std::vector<std::uint8_t> bytes, const std::string& path) {
    if (bytes.size() < 348) throw IoError(path + ": too short for a NIfTI-1 header");
    NiftiHeader h;
    std::memcpy(&h, bytes.data(), sizeof h);
    bool swapped = false;
    if (h.sizeof_hdr != 348) {
        swap_bytes(h.sizeof_hdr);
        if (h.sizeof_hdr != 348) throw IoError(path + ": not a NIfTI-1 file");
        swapped = true;
        for (auto& d : h.dim) swap_bytes(d);
        for (auto& d : h.pixdim) swap_bytes(d);
        swap_bytes(h.datatype);
        swap_bytes(h.vox_offset);
        swap_bytes(h.scl_slope);
        swap_bytes(h.scl_inter);
    }
    if (std::memcmp(h.magic, "n+1\0", 4) != 0) throw IoError(path + ": only single-file NIfTI-1 (n+1) is supported");
    if (h.dim[0] < 1 || h.dim[0] > 7) throw IoError(path + ": bad dim[0]");
    RawVolume v;
    for (int a = 0; a < h.dim[0]; ++a) {
        const int n = h.dim[a + 1];
        if (n < 1) throw IoError(path + ": bad dimension");
        if (a < 4) v.dims[a] = n;
        else if (n != 1) throw IoError(path + ": more than 4 dimensions");
    }
    for (int a = 0; a < 3; ++a) v.spacing[a] = h.pixdim[a + 1] > 0.0f ? h.pixdim[a + 1] : 1.0;
    v.datatype = h.datatype;
    const int ts = type_size(v.datatype);
    if (!ts) throw IoError(path + ": unsupported datatype " + std::to_string(v.datatype));
    if (h.scl_slope != 0.0f && std::isfinite(h.scl_slope)) {
        v.slope = h.scl_slope;
        v.inter = std::isfinite(h.scl_inter) ? h.scl_inter : 0.0;
    }
    const auto off = static_cast<std::size_t>(h.vox_offset);
    const std::size_t need = v.count() * std::size_t(ts);
    if (off < 348 || bytes.size() < off + need) throw IoError(path + ": truncated voxel data");
    v.bytes.assign(bytes.begin() + std::ptrdiff_t(off), bytes.begin() + std::ptrdiff_t(off + need));
    if (swapped && ts > 1) {
        for (std::size_t i = 0; i < v.bytes.size(); i += std::size_t(ts)) {
            std::reverse(v.bytes.begin() + std::ptrdiff_t(i), v.bytes.begin() + std::ptrdiff_t(i) + ts);
        }
    }
    return v;
}

void write_raw_volume(const std::string& path, const RawVolume& v) {
    switch (file_kind(path)) {
        case FileKind::Nifti: write_file(path, encode_nifti(v)); return;
        case FileKind::NiftiGz: write_file(path, gzip_bytes(encode_nifti(v))); return;
        case FileKind::Raw: {
            nlohmann::json side = {{"dims", v.dims},
                                   {"spacing", v.spacing},
                                   {"dtype", dtype_name(v.datatype)},
                                   {"byte_order", "little"}};
            write_file(path, v.bytes);
            const std::string s = side.dump(2) + "\n";
            write_file(path + ".json", std::vector<std::uint8_t>(s.begin(), s.end()));
            return;
        }
    }
}

RawVolume read_raw_volume(const std::string& path) {
    const FileKind kind = file_kind(path);
    if (kind != FileKind::Raw) {
        auto bytes = read_file(path);
        if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) bytes = gunzip_bytes(bytes, path);
        return decode_nifti(std::move(bytes), path);
    }
    const auto side_bytes = read_file(path + ".json");
    RawVolume v;
    try {
        const auto side = nlohmann::json::parse(side_bytes.begin(), side_bytes.end());
        v.dims = side.at("dims").get<std::array<int, 4>>();
        v.spacing = side.at("spacing").get<Spacing>();
        v.datatype = dtype_from_name(side.at("dtype").get<std::string>());
        if (side.value("byte_order", "little") != "little") throw IoError(path + ".json: only little byte order");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ".json: bad sidecar: " + e.what());
    }
    if (!v.datatype) throw IoError(path + ".json: unsupported dtype");
    for (int n : v.dims) {
        if (n < 1) throw IoError(path + ".json: bad dims");
    }
    v.bytes = read_file(path);
    if (v.bytes.size() != v.count() * std::size_t(type_size(v.datatype))) {
        throw IoError(path + ": size does not match sidecar");
    }
    return v;
}

template <typename T>
void append(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof v);
}

void check_3d(const RawVolume& v, const std::string& path) {
    if (v.dims[3] != 1) throw IoError(path + ": expected a 3D volume");
}

}  // namespace

FileKind file_kind(const std::string& path) {
    if (ends_with(path, ".nii.gz")) return FileKind::NiftiGz;
    if (ends_with(path, ".nii")) return FileKind::Nifti;
    if (ends_with(path, ".raw")) return FileKind::Raw;
    throw IoError(path + ": unknown volume extension (expected .nii, .nii.gz or .raw)");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path + ": read failed");
    return out;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError(path + ": write failed");
}

void write_image(const std::string& path, const Image& img) {
    RawVolume v;
    v.dims = {img.nx(), img.ny(), img.nz(), 1};
    v.spacing = img.spacing();
    v.datatype = DT_FLOAT32;
    v.bytes.reserve(img.size() * 4);
    for (float f : img.data()) append(v.bytes, f);
    write_raw_volume(path, v);
}

void write_labels(const std::string& path, const LabelVolume& labels) {
    RawVolume v;
    v.dims = {labels.nx(), labels.ny(), labels.nz(), 1};
    v.spacing = labels.spacing();
    v.datatype = DT_UINT16;
    v.bytes.reserve(labels.size() * 2);
    for (Label l : labels.data()) {
        if (l < 0 || l > 65535) throw IoError(path + ": label " + std::to_string(l) + " does not fit uint16");
        append(v.bytes, static_cast<std::uint16_t>(l));
    }
    write_raw_volume(path, v);
}

void write_encoding(const std::string& path, const StarEncoding& enc) {
    RawVolume v;
    v.dims = {enc.dims[0], enc.dims[1], enc.dims[2], enc.n_rays + 1};
    v.spacing = enc.prob.spacing();
    v.datatype = DT_FLOAT32;
    const std::size_t nvox = Image::voxel_count(enc.dims);
    v.bytes.reserve(nvox * std::size_t(enc.n_rays + 1) * 4);
    for (float f : enc.prob.data()) append(v.bytes, f);
    for (int k = 0; k < enc.n_rays; ++k)
        for (std::size_t j = 0; j < nvox; ++j) append(v.bytes, enc.dists[j * std::size_t(enc.n_rays) + std::size_t(k)]);
    write_raw_volume(path, v);
}

Image read_image(const std::string& path) {
    const RawVolume v = read_raw_volume(path);
    check_3d(v, path);
    Image img({v.dims[0], v.dims[1], v.dims[2]}, 0.0f, v.spacing);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<float>(v.value(i) * v.slope + v.inter);
    return img;
}

LabelVolume read_labels(const std::string& path) {
    const RawVolume v = read_raw_volume(path);
    check_3d(v, path);
    LabelVolume out({v.dims[0], v.dims[1], v.dims[2]}, 0, v.spacing);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double x = v.value(i) * v.slope + v.inter;
        if (x != std::floor(x) || x < 0.0 || x > double(std::numeric_limits<Label>::max())) {
            throw IoError(path + ": label volume holds a non-integral or negative value");
        }
        out[i] = static_cast<Label>(x);
    }
    return out;
}

StarEncoding read_encoding(const std::string& path) {
    const RawVolume v = read_raw_volume(path);
    if (v.dims[3] < 2) throw IoError(path + ": encoding needs at least 2 channels");
    StarEncoding enc;
    enc.dims = {v.dims[0], v.dims[1], v.dims[2]};
    enc.n_rays = v.dims[3] - 1;
    const std::size_t nvox = Image::voxel_count(enc.dims);
    enc.prob = Image(enc.dims, 0.0f, v.spacing);
    enc.dists.assign(nvox * std::size_t(enc.n_rays), 0.0f);
    for (std::size_t j = 0; j < nvox; ++j) enc.prob[j] = static_cast<float>(v.value(j));
    for (int k = 0; k < enc.n_rays; ++k)
        for (std::size_t j = 0; j < nvox; ++j) {
            enc.dists[j * std::size_t(enc.n_rays) + std::size_t(k)] =
                static_cast<float>(v.value(nvox * std::size_t(k + 1) + j));
        }
    return enc;
}

std::string sha256_hex(const std::vector<std::uint8_t>& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void write_png(const std::string& path, int width, int height, int channels, const std::vector<std::uint8_t>& pixels) {
    if (width < 1 || height < 1 || (channels != 1 && channels != 3)) throw std::invalid_argument("write_png: bad shape");
    const std::size_t row = std::size_t(width) * std::size_t(channels);
    if (pixels.size() != row * std::size_t(height)) throw std::invalid_argument("write_png: pixel count mismatch");
    std::vector<std::uint8_t> raw;
    raw.reserve((row + 1) * std::size_t(height));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + std::ptrdiff_t(row * std::size_t(y)),
                   pixels.begin() + std::ptrdiff_t(row * std::size_t(y + 1)));
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw IoError(path + ": png compression failed");
    }
    z.resize(zlen);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    auto be32 = [&](std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
    };
    auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
        be32(static_cast<std::uint32_t>(data.size()));
        const std::size_t start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        be32(static_cast<std::uint32_t>(crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start))));
    };
    std::vector<std::uint8_t> ihdr;
    for (std::uint32_t v : {std::uint32_t(width), std::uint32_t(height)})
        for (int s = 24; s >= 0; s -= 8) ihdr.push_back(static_cast<std::uint8_t>(v >> s));
    ihdr.insert(ihdr.end(), {8, std::uint8_t(channels == 1 ? 0 : 2), 0, 0, 0});
    chunk("IHDR", ihdr);
    chunk("IDAT", z);
    chunk("IEND", {});
    write_file(path, out);
}

}  // namespace anystar
