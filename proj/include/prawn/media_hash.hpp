#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prawn::media {

enum class ChannelMode { Rgb, Gray };

// One decoded frame, row-major 8-bit samples (3 per pixel for RGB).
struct FrameImage {
    int width = 0;
    int height = 0;
    ChannelMode channel_mode = ChannelMode::Gray;
    std::vector<std::uint8_t> pixels;

    int channels() const { return channel_mode == ChannelMode::Rgb ? 3 : 1; }
    void validate() const; // throws std::invalid_argument on bad dimensions
};

// 64-bit average hash of one frame. Bit 63 is row 0, col 0 of the 8x8 grid.
struct FrameHash {
    std::uint64_t bits = 0;
    auto operator<=>(const FrameHash&) const = default;
};

// 192-bit fingerprint, block order [first, middle, final].
struct MultiFrameHash {
    std::array<FrameHash, 3> blocks{};
    auto operator<=>(const MultiFrameHash&) const = default;
};

// Grid average hash: luma, area-weighted 8x8 mean pooling, threshold at the
// grid mean (strict >, so ties give 0 bits).
FrameHash average_hash(const FrameImage& frame);

// Hashes of the frames at indices 0, floor((n-1)/2), n-1.
MultiFrameHash multi_frame_hash(std::span<const FrameImage> frames);

// Differing bits across all 192 positions.
int hamming(const MultiFrameHash& a, const MultiFrameHash& b);

// Quartile midpoints: floor((2q+1)*n/8) for q = 0..3, clamped to [0, n-1].
std::array<int, 4> quartile_frame_indices(int frame_count);

// 48 lowercase hex chars, blocks in order, most significant bit first.
std::string to_hex(const MultiFrameHash& hash);
MultiFrameHash hash_from_hex(std::string_view hex);

// Frame-dump format: "GIFFRAMES <n> <width> <height> <RGB|GRAY>\n" followed
// by n raw row-major frames of 8-bit samples.
std::vector<FrameImage> read_frame_dump(std::istream& in);
std::vector<FrameImage> read_frame_dump_file(const std::string& path);
void write_frame_dump(std::ostream& out, std::span<const FrameImage> frames);
void write_frame_dump_file(const std::string& path, std::span<const FrameImage> frames);

} // namespace prawn::media
