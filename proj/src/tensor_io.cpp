#include "e3dtv/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

namespace e3dtv {
namespace {

constexpr std::string_view kTensorMagic = "E3DTVT01";
constexpr std::string_view kMeasurementMagic = "E3DTVM01";

class Writer {
public:
    void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    [[nodiscard]] std::size_t size() const { return out_.size(); }
    Bytes take() { return std::move(out_); }
    [[nodiscard]] std::span<const std::uint8_t> tail(std::size_t from) const {
        return {out_.data() + from, out_.size() - from};
    }

private:
    void put(std::uint64_t v, int n) {
        for (int b = 0; b < n; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
    Bytes out_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> in, const char* what) : in_(in), what_(what) {}

    void magic(std::string_view m) {
        need(m.size());
        if (std::memcmp(in_.data() + pos_, m.data(), m.size()) != 0) {
            throw FormatError(std::string(what_) + ": bad magic (expected " + std::string(m) + ")");
        }
        pos_ += m.size();
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    [[nodiscard]] std::size_t pos() const { return pos_; }
    [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }
    [[nodiscard]] std::span<const std::uint8_t> slice(std::size_t from, std::size_t len) const {
        return in_.subspan(from, len);
    }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError(std::string(what_) + ": truncated file");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int b = 0; b < n; ++b) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(b)]) << (8 * b);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::span<const std::uint8_t> in_;
    const char* what_;
    std::size_t pos_ = 0;
};

// Reads `count` doubles followed by the payload checksum; checks the
// declared size against the bytes actually present.
std::vector<double> read_payload(Reader& r, std::uint64_t count, const char* what) {
    if (count > (r.remaining() / 8) || r.remaining() != count * 8 + 8) {
        throw FormatError(std::string(what) + ": declared size does not match payload length");
    }
    const std::size_t start = r.pos();
    std::vector<double> values(static_cast<std::size_t>(count));
    for (auto& v : values) v = r.f64();
    const std::uint64_t expected = fnv1a64(r.slice(start, static_cast<std::size_t>(count) * 8));
    if (r.u64() != expected) throw FormatError(std::string(what) + ": checksum mismatch");
    return values;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Bytes encode_tensor(const HsiTensor& t) {
    Writer w;
    w.magic(kTensorMagic);
    w.u32(static_cast<std::uint32_t>(t.h()));
    w.u32(static_cast<std::uint32_t>(t.w()));
    w.u32(static_cast<std::uint32_t>(t.s()));
    w.u32(kDtypeFloat64);
    const std::size_t start = w.size();
    for (double v : t.flat()) w.f64(v);
    w.u64(fnv1a64(w.tail(start)));
    return w.take();
}

HsiTensor decode_tensor(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "tensor file");
    r.magic(kTensorMagic);
    const Dims dims{r.u32(), r.u32(), r.u32()};
    if (!dims.valid()) throw FormatError("tensor file: zero dimension in header");
    if (r.u32() != kDtypeFloat64) throw FormatError("tensor file: unsupported dtype");
    const auto values = read_payload(r, static_cast<std::uint64_t>(dims.size()), "tensor file");
    try {
        return HsiTensor::from_flat(dims, values);
    } catch (const std::domain_error& e) {
        throw FormatError(std::string("tensor file: ") + e.what());
    }
}

OperatorDescriptor OperatorDescriptor::describe(const CompressiveOperator& op) {
    return {op.seed(), op.dims(), op.n_pad(), op.ratio(), op.m()};
}

CompressiveOperator OperatorDescriptor::build() const {
    CompressiveOperator op = [&] {
        try {
            return CompressiveOperator::build(dims, ratio, seed);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string("measurement file: invalid operator descriptor: ") + e.what());
        }
    }();
    if (op.n_pad() != n_pad || op.m() != m) {
        throw FormatError("measurement file: operator descriptor inconsistent (n_pad/m do not match rebuild)");
    }
    return op;
}

Bytes encode_measurement(const Measurement& meas) {
    if (meas.y.size() != meas.op.m) throw std::invalid_argument("encode_measurement: payload length differs from m");
    Writer w;
    w.magic(kMeasurementMagic);
    w.u64(meas.op.seed);
    w.u32(static_cast<std::uint32_t>(meas.op.dims.h));
    w.u32(static_cast<std::uint32_t>(meas.op.dims.w));
    w.u32(static_cast<std::uint32_t>(meas.op.dims.s));
    w.u64(static_cast<std::uint64_t>(meas.op.n_pad));
    w.f64(meas.op.ratio);
    w.u64(static_cast<std::uint64_t>(meas.op.m));
    const std::size_t start = w.size();
    for (Index i = 0; i < meas.y.size(); ++i) w.f64(meas.y(i));
    w.u64(fnv1a64(w.tail(start)));
    return w.take();
}

Measurement decode_measurement(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "measurement file");
    r.magic(kMeasurementMagic);
    Measurement meas;
    meas.op.seed = r.u64();
    meas.op.dims = Dims{r.u32(), r.u32(), r.u32()};
    meas.op.n_pad = static_cast<Index>(r.u64());
    meas.op.ratio = r.f64();
    meas.op.m = static_cast<Index>(r.u64());
    if (!meas.op.dims.valid()) throw FormatError("measurement file: zero dimension in header");
    const auto values = read_payload(r, static_cast<std::uint64_t>(meas.op.m), "measurement file");
    meas.y = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    if (!meas.y.allFinite()) throw FormatError("measurement file: non-finite measurement");
    return meas;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_tensor(const std::filesystem::path& path, const HsiTensor& t) { write_file_atomic(path, encode_tensor(t)); }

HsiTensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

void write_measurement(const std::filesystem::path& path, const Measurement& meas) {
    write_file_atomic(path, encode_measurement(meas));
}

Measurement read_measurement(const std::filesystem::path& path) { return decode_measurement(read_file(path)); }

}  // namespace e3dtv
