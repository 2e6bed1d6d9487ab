#pragma once

#include "prawn/joint_embed.hpp"
#include "prawn/media_hash.hpp"
#include "prawn/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prawn::catalog {

// Canonical identity of one reference gif.
struct GifRecord {
    std::string id;
    media::MultiFrameHash hash;
    std::int64_t usage_count = 0;
    std::set<std::string> tags; // canonical tags only
    std::array<std::string, 4> captions{}; // one per quartile frame, may be empty
    std::optional<joint::GifFeatureBundle> feature_bundle;
};

struct TagVocabulary {
    std::vector<std::string> canonical; // lowercase, unique, sorted
    std::map<std::string, std::string> merge_map; // raw -> canonical

    std::optional<Index> index_of(std::string_view tag) const;
};

enum class Fold { Train, Dev, Test, Unassigned };

std::string fold_name(Fold fold);
Fold fold_from_name(std::string_view name);

struct ReplyPair {
    std::string message_id;
    std::string text;
    std::optional<Vec> text_features;
    std::string gif_id;
    Fold split = Fold::Unassigned;
};

// Matching rule: a record with an identical hash wins outright; otherwise the
// closest record with hamming distance < 10 and usage_count > 500. Ties break
// by smaller distance, then larger usage_count, then lexicographically
// smaller id. Absence is a normal outcome.
std::optional<std::string> canonicalize(const media::MultiFrameHash& query,
                                        std::span<const GifRecord> catalog);

struct TagUsage {
    std::string raw_tag;
    std::string gif_id;
};

struct NormalizedTags {
    TagVocabulary vocabulary;
    std::map<std::string, std::set<std::string>> gif_tags; // gif id -> canonical tags
};

// Lowercase, merge, then keep only tags attached to >= 5 distinct gifs whose
// usage counts sum to >= 1000.
NormalizedTags normalize_tags(std::span<const TagUsage> raw_usages,
                              const std::map<std::string, std::int64_t>& usage_counts,
                              const std::map<std::string, std::string>& merge_map);

// Iterative stratification over a k-hot label matrix. Returns one fold index
// per example; deterministic under the seed.
std::vector<int> iterative_stratified_split(const Mat& labels,
                                            std::span<const double> ratios,
                                            std::uint64_t seed);

// A text is annotatable when it has >= 10 whitespace tokens (punctuation-only
// tokens dropped), none starting with '@' and none looking like a URL.
bool annotatable(std::string_view text);

// Catalog file: JSON Lines with fields (id, hash, usage_count, tags, captions).
std::vector<GifRecord> read_catalog(std::istream& in);
std::vector<GifRecord> read_catalog_file(const std::string& path);
void write_catalog(std::ostream& out, std::span<const GifRecord> records);
void write_catalog_file(const std::string& path, std::span<const GifRecord> records);

// Split file: CSV `message_id,fold`.
void write_split_csv(std::ostream& out, std::span<const ReplyPair> pairs);
std::map<std::string, Fold> read_split_csv(std::istream& in);

// merge_map file: two-column TSV `raw<TAB>canonical`, '#' comments.
std::map<std::string, std::string> read_merge_map_file(const std::string& path);

// Reply pairs: JSON Lines with fields (message_id, text, gif_id).
std::vector<ReplyPair> read_pairs_file(const std::string& path);
void write_pairs_file(const std::string& path, std::span<const ReplyPair> pairs);

} // namespace prawn::catalog
