#include "prawn/media_hash.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace prawn::media {

void FrameImage::validate() const {
    if (width < 1 || height < 1)
        throw std::invalid_argument("FrameImage: zero-dimension frame");
    const std::size_t expected =
        static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
        static_cast<std::size_t>(channels());
    if (pixels.size() != expected)
        throw std::invalid_argument("FrameImage: pixel buffer size does not match dimensions");
}

namespace {

// Luma scaled by 1000 so it stays integral: 299R + 587G + 114B, or 1000 * v
// for gray. The hash only compares cells against their mean, so a common
// scale factor is invisible; keeping every quantity an exact multiple of
// 1/64 in double makes the thresholding exact, and with it the brightness
// shift and positive-scale invariances (a rounded luma would break strict >
// on cells algebraically tied with the mean).
double scaled_luma_at(const FrameImage& frame, int row, int col) {
    const std::size_t idx =
        (static_cast<std::size_t>(row) * frame.width + col) * frame.channels();
    if (frame.channel_mode == ChannelMode::Gray) return 1000.0 * frame.pixels[idx];
    return 299.0 * frame.pixels[idx] + 587.0 * frame.pixels[idx + 1] +
           114.0 * frame.pixels[idx + 2];
}

// Area-weighted luma sum over the cell [r*h/8,(r+1)*h/8) x [c*w/8,(c+1)*w/8),
// fractional pixel coverage at the boundaries. Every cell covers the same
// area, so cell_mean > grid_mean reduces to 64 * cell_sum > total_sum.
double pooled_cell_sum(const FrameImage& frame, int cell_row, int cell_col) {
    const double row_lo = cell_row * frame.height / 8.0;
    const double row_hi = (cell_row + 1) * frame.height / 8.0;
    const double col_lo = cell_col * frame.width / 8.0;
    const double col_hi = (cell_col + 1) * frame.width / 8.0;

    double sum = 0.0;
    const int first_row = static_cast<int>(row_lo);
    const int first_col = static_cast<int>(col_lo);
    for (int r = first_row; r < frame.height && r < row_hi; ++r) {
        const double wr = std::min<double>(r + 1, row_hi) - std::max<double>(r, row_lo);
        if (wr <= 0.0) continue;
        for (int c = first_col; c < frame.width && c < col_hi; ++c) {
            const double wc = std::min<double>(c + 1, col_hi) - std::max<double>(c, col_lo);
            if (wc <= 0.0) continue;
            sum += wr * wc * scaled_luma_at(frame, r, c);
        }
    }
    return sum;
}

} // namespace

FrameHash average_hash(const FrameImage& frame) {
    frame.validate();
    double cell_sums[64];
    double total = 0.0;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            cell_sums[r * 8 + c] = pooled_cell_sum(frame, r, c);
            total += cell_sums[r * 8 + c];
        }
    std::uint64_t bits = 0;
    for (int i = 0; i < 64; ++i)
        if (64.0 * cell_sums[i] > total) bits |= 1ULL << (63 - i);
    return FrameHash{bits};
}

MultiFrameHash multi_frame_hash(std::span<const FrameImage> frames) {
    if (frames.empty())
        throw std::invalid_argument("multi_frame_hash: empty frame sequence");
    const std::size_t n = frames.size();
    return MultiFrameHash{{average_hash(frames[0]), average_hash(frames[(n - 1) / 2]),
                           average_hash(frames[n - 1])}};
}

int hamming(const MultiFrameHash& a, const MultiFrameHash& b) {
    int count = 0;
    for (int i = 0; i < 3; ++i)
        count += std::popcount(a.blocks[i].bits ^ b.blocks[i].bits);
    return count;
}

std::array<int, 4> quartile_frame_indices(int frame_count) {
    if (frame_count < 1)
        throw std::invalid_argument("quartile_frame_indices: frame count must be positive");
    std::array<int, 4> indices{};
    for (int q = 0; q < 4; ++q) {
        const long long raw =
            static_cast<long long>(2 * q + 1) * frame_count / 8;
        indices[q] = static_cast<int>(std::clamp<long long>(raw, 0, frame_count - 1));
    }
    return indices;
}

std::string to_hex(const MultiFrameHash& hash) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(48);
    for (const FrameHash& block : hash.blocks)
        for (int shift = 60; shift >= 0; shift -= 4)
            out.push_back(digits[(block.bits >> shift) & 0xF]);
    return out;
}

MultiFrameHash hash_from_hex(std::string_view hex) {
    if (hex.size() != 48)
        throw std::invalid_argument("hash_from_hex: expected 48 hex characters");
    MultiFrameHash hash;
    for (int b = 0; b < 3; ++b) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 16; ++i) {
            const char ch = hex[b * 16 + i];
            std::uint64_t nibble;
            if (ch >= '0' && ch <= '9') nibble = ch - '0';
            else if (ch >= 'a' && ch <= 'f') nibble = 10 + (ch - 'a');
            else if (ch >= 'A' && ch <= 'F') nibble = 10 + (ch - 'A');
            else throw std::invalid_argument("hash_from_hex: invalid hex character");
            bits = (bits << 4) | nibble;
        }
        hash.blocks[b].bits = bits;
    }
    return hash;
}

std::vector<FrameImage> read_frame_dump(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error("frame dump: missing header line");
    std::istringstream hs(header);
    std::string magic, mode;
    long long n = 0, width = 0, height = 0;
    if (!(hs >> magic >> n >> width >> height >> mode) || magic != "GIFFRAMES")
        throw std::runtime_error("frame dump: malformed header");
    if (n < 1 || width < 1 || height < 1)
        throw std::runtime_error("frame dump: non-positive dimensions");
    ChannelMode channel_mode;
    if (mode == "RGB") channel_mode = ChannelMode::Rgb;
    else if (mode == "GRAY") channel_mode = ChannelMode::Gray;
    else throw std::runtime_error("frame dump: channel mode must be RGB or GRAY");

    const std::size_t frame_bytes = static_cast<std::size_t>(width) * height *
                                    (channel_mode == ChannelMode::Rgb ? 3 : 1);
    std::vector<FrameImage> frames;
    frames.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        FrameImage frame{static_cast<int>(width), static_cast<int>(height), channel_mode, {}};
        frame.pixels.resize(frame_bytes);
        in.read(reinterpret_cast<char*>(frame.pixels.data()),
                static_cast<std::streamsize>(frame_bytes));
        if (static_cast<std::size_t>(in.gcount()) != frame_bytes)
            throw std::runtime_error("frame dump: truncated frame data");
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<FrameImage> read_frame_dump_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open frame dump: " + path);
    return read_frame_dump(in);
}

void write_frame_dump(std::ostream& out, std::span<const FrameImage> frames) {
    if (frames.empty())
        throw std::invalid_argument("write_frame_dump: empty frame sequence");
    const FrameImage& first = frames[0];
    first.validate();
    out << "GIFFRAMES " << frames.size() << ' ' << first.width << ' ' << first.height
        << ' ' << (first.channel_mode == ChannelMode::Rgb ? "RGB" : "GRAY") << '\n';
    for (const FrameImage& frame : frames) {
        frame.validate();
        if (frame.width != first.width || frame.height != first.height ||
            frame.channel_mode != first.channel_mode)
            throw std::invalid_argument("write_frame_dump: frames disagree on geometry");
        out.write(reinterpret_cast<const char*>(frame.pixels.data()),
                  static_cast<std::streamsize>(frame.pixels.size()));
    }
}

void write_frame_dump_file(const std::string& path, std::span<const FrameImage> frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write frame dump: " + path);
    write_frame_dump(out, frames);
}

} // namespace prawn::media
