#include "pcc/checkpoint.hpp"

#include "pcc/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace pcc {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'P', 'C', 'C', 'K', 'P', 'T', 0, 0};
constexpr std::size_t kHeaderSize = 64;

class Writer {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    template <typename T>
    void uint(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }

    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t>& buffer() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T uint() {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
        }
        pos_ += sizeof(T);
        return v;
    }

    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw CheckpointError("checkpoint: truncated at byte " + std::to_string(pos_));
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
    uLong c = crc32(0L, Z_NULL, 0);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
        c = crc32(c, bytes.data() + done, chunk);
        done += chunk;
    }
    return static_cast<std::uint32_t>(c);
}

} // namespace

std::vector<std::uint8_t> save_checkpoint(const EncoderParams& params) {
    const auto count = static_cast<std::uint64_t>(params.shape.parameter_count());
    if (static_cast<std::uint64_t>(params.theta.size()) != count ||
        static_cast<std::uint64_t>(params.adam_m.size()) != count ||
        static_cast<std::uint64_t>(params.adam_v.size()) != count) {
        throw CheckpointError("save_checkpoint: parameter buffers do not match shape");
    }
    Writer w;
    w.bytes(kMagic);
    w.uint<std::uint16_t>(kCheckpointMajor);
    w.uint<std::uint16_t>(kCheckpointMinor);
    w.uint<std::uint32_t>(0);
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(params.shape.input_dim));
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(params.shape.hidden_dim));
    w.uint<std::uint64_t>(static_cast<std::uint64_t>(params.shape.embed_dim));
    w.uint<std::uint64_t>(params.seed);
    w.uint<std::uint64_t>(params.step);
    w.uint<std::uint64_t>(count);
    for (const Eigen::VectorXd* v : {&params.theta, &params.adam_m, &params.adam_v}) {
        for (Eigen::Index i = 0; i < v->size(); ++i) {
            w.f64((*v)(i));
        }
    }
    w.uint<std::uint32_t>(crc(w.buffer()));
    return std::move(w.buffer());
}

EncoderParams load_checkpoint(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(kMagic.size());
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw CheckpointError("checkpoint: bad magic");
    }
    const auto major = r.uint<std::uint16_t>();
    r.uint<std::uint16_t>();  // minor
    r.uint<std::uint32_t>();  // reserved
    if (major != kCheckpointMajor) {
        throw CheckpointError("checkpoint: unsupported format version " + std::to_string(major));
    }

    EncoderParams p;
    p.shape.input_dim = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
    p.shape.hidden_dim = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
    p.shape.embed_dim = static_cast<Eigen::Index>(r.uint<std::uint64_t>());
    p.seed = r.uint<std::uint64_t>();
    p.step = r.uint<std::uint64_t>();
    const auto count = r.uint<std::uint64_t>();

    constexpr std::uint64_t kMaxDim = 1u << 20;
    if (p.shape.input_dim < 1 || p.shape.hidden_dim < 1 || p.shape.embed_dim < 1 ||
        static_cast<std::uint64_t>(p.shape.input_dim) > kMaxDim ||
        static_cast<std::uint64_t>(p.shape.hidden_dim) > kMaxDim ||
        static_cast<std::uint64_t>(p.shape.embed_dim) > kMaxDim ||
        count != static_cast<std::uint64_t>(p.shape.parameter_count())) {
        throw CheckpointError("checkpoint: inconsistent dimensions");
    }
    if ((bytes.size() - kHeaderSize) / 24 < count) {
        throw CheckpointError("checkpoint: truncated parameter block");
    }

    const auto n = static_cast<Eigen::Index>(count);
    for (Eigen::VectorXd* v : {&p.theta, &p.adam_m, &p.adam_v}) {
        v->resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            (*v)(i) = r.f64();
        }
    }
    const std::size_t payload = r.position();
    const auto stored = r.uint<std::uint32_t>();
    if (r.position() != bytes.size()) {
        throw CheckpointError("checkpoint: trailing bytes after checksum");
    }
    if (crc(bytes.first(payload)) != stored) {
        throw CheckpointError("checkpoint: checksum mismatch");
    }
    return p;
}

void write_checkpoint_file(const std::filesystem::path& path, const EncoderParams& params) {
    const auto bytes = save_checkpoint(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CheckpointError("cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw CheckpointError("failed writing '" + path.string() + "'");
    }
}

EncoderParams read_checkpoint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_checkpoint(bytes);
}

std::string checkpoint_id(const EncoderParams& params) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc(save_checkpoint(params)));
    return buf;
}

} // namespace pcc
