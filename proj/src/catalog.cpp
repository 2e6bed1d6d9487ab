#include "prawn/catalog.hpp"

#include "prawn/io.hpp"
#include "prawn/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace prawn::catalog {

namespace {
constexpr int kMaxMatchDistance = 10; // accept strictly below
constexpr std::int64_t kMinMatchUsage = 500; // accept strictly above
constexpr int kMinGifsPerTag = 5;
constexpr std::int64_t kMinTotalUsesPerTag = 1000;
} // namespace

std::optional<Index> TagVocabulary::index_of(std::string_view tag) const {
    const auto it = std::lower_bound(canonical.begin(), canonical.end(), tag);
    if (it == canonical.end() || *it != tag) return std::nullopt;
    return static_cast<Index>(it - canonical.begin());
}

std::string fold_name(Fold fold) {
    switch (fold) {
        case Fold::Train: return "train";
        case Fold::Dev: return "dev";
        case Fold::Test: return "test";
        case Fold::Unassigned: return "unassigned";
    }
    throw std::logic_error("fold_name: bad fold");
}

Fold fold_from_name(std::string_view name) {
    if (name == "train") return Fold::Train;
    if (name == "dev") return Fold::Dev;
    if (name == "test") return Fold::Test;
    if (name == "unassigned") return Fold::Unassigned;
    throw std::invalid_argument("fold_from_name: unknown fold " + std::string(name));
}

std::optional<std::string> canonicalize(const media::MultiFrameHash& query,
                                        std::span<const GifRecord> catalog) {
    const GifRecord* best = nullptr;
    int best_distance = std::numeric_limits<int>::max();
    for (const GifRecord& record : catalog) {
        const int distance = media::hamming(query, record.hash);
        const bool qualifies =
            distance == 0 ||
            (distance < kMaxMatchDistance && record.usage_count > kMinMatchUsage);
        if (!qualifies) continue;
        if (best == nullptr || distance < best_distance ||
            (distance == best_distance &&
             (record.usage_count > best->usage_count ||
              (record.usage_count == best->usage_count && record.id < best->id)))) {
            best = &record;
            best_distance = distance;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->id;
}

NormalizedTags normalize_tags(std::span<const TagUsage> raw_usages,
                              const std::map<std::string, std::int64_t>& usage_counts,
                              const std::map<std::string, std::string>& merge_map) {
    // canonical tag -> set of gifs it is attached to
    std::map<std::string, std::set<std::string>> tag_gifs;
    for (const TagUsage& usage : raw_usages) {
        std::string tag = usage.raw_tag;
        std::transform(tag.begin(), tag.end(), tag.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (const auto it = merge_map.find(tag); it != merge_map.end()) tag = it->second;
        tag_gifs[tag].insert(usage.gif_id);
    }

    NormalizedTags result;
    for (const auto& [tag, gifs] : tag_gifs) {
        if (static_cast<int>(gifs.size()) < kMinGifsPerTag) continue;
        std::int64_t total_uses = 0;
        for (const std::string& gif : gifs) {
            const auto it = usage_counts.find(gif);
            if (it != usage_counts.end()) {
                if (it->second < 0)
                    throw std::invalid_argument("normalize_tags: negative usage count");
                total_uses += it->second;
            }
        }
        if (total_uses < kMinTotalUsesPerTag) continue;
        result.vocabulary.canonical.push_back(tag);
        for (const std::string& gif : gifs) result.gif_tags[gif].insert(tag);
    }
    // std::map iteration already yields sorted canonical tags.
    for (const auto& [raw, canonical] : merge_map)
        if (std::binary_search(result.vocabulary.canonical.begin(),
                               result.vocabulary.canonical.end(), canonical))
            result.vocabulary.merge_map.emplace(raw, canonical);
    return result;
}

std::vector<int> iterative_stratified_split(const Mat& labels,
                                            std::span<const double> ratios,
                                            std::uint64_t seed) {
    const Index n = labels.rows();
    const Index n_labels = labels.cols();
    if (n == 0) throw std::invalid_argument("iterative_stratified_split: empty dataset");
    if (ratios.empty())
        throw std::invalid_argument("iterative_stratified_split: no folds");
    const double ratio_sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw std::invalid_argument("iterative_stratified_split: ratios must sum to 1");
    for (Index i = 0; i < n; ++i)
        for (Index l = 0; l < n_labels; ++l)
            if (labels(i, l) != 0.0 && labels(i, l) != 1.0)
                throw std::invalid_argument("iterative_stratified_split: labels must be k-hot");

    const int n_folds = static_cast<int>(ratios.size());
    std::vector<std::vector<Index>> label_examples(static_cast<std::size_t>(n_labels));
    for (Index l = 0; l < n_labels; ++l)
        for (Index i = 0; i < n; ++i)
            if (labels(i, l) == 1.0) label_examples[static_cast<std::size_t>(l)].push_back(i);

    // Remaining desired counts, per fold overall and per (fold, label).
    std::vector<double> fold_capacity(static_cast<std::size_t>(n_folds));
    std::vector<std::vector<double>> label_desire(static_cast<std::size_t>(n_folds),
                                                  std::vector<double>(static_cast<std::size_t>(n_labels)));
    for (int f = 0; f < n_folds; ++f) {
        fold_capacity[static_cast<std::size_t>(f)] = ratios[static_cast<std::size_t>(f)] * static_cast<double>(n);
        for (Index l = 0; l < n_labels; ++l)
            label_desire[static_cast<std::size_t>(f)][static_cast<std::size_t>(l)] =
                ratios[static_cast<std::size_t>(f)] *
                static_cast<double>(label_examples[static_cast<std::size_t>(l)].size());
    }

    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    std::vector<Index> remaining(static_cast<std::size_t>(n_labels));
    for (Index l = 0; l < n_labels; ++l)
        remaining[static_cast<std::size_t>(l)] =
            static_cast<Index>(label_examples[static_cast<std::size_t>(l)].size());

    Rng rng(seed);
    constexpr double kTieEps = 1e-9;

    const auto pick_fold = [&](const auto& score_of) {
        std::vector<int> candidates;
        double best = -std::numeric_limits<double>::infinity();
        for (int f = 0; f < n_folds; ++f) {
            const double s = score_of(f);
            if (s > best + kTieEps) {
                best = s;
                candidates.assign(1, f);
            } else if (s > best - kTieEps) {
                candidates.push_back(f);
            }
        }
        if (candidates.size() > 1) {
            // Secondary criterion: greatest remaining total capacity.
            std::vector<int> narrowed;
            double best_cap = -std::numeric_limits<double>::infinity();
            for (int f : candidates) {
                const double cap = fold_capacity[static_cast<std::size_t>(f)];
                if (cap > best_cap + kTieEps) {
                    best_cap = cap;
                    narrowed.assign(1, f);
                } else if (cap > best_cap - kTieEps) {
                    narrowed.push_back(f);
                }
            }
            candidates = std::move(narrowed);
        }
        if (candidates.size() == 1) return candidates[0];
        return candidates[rng.below(candidates.size())];
    };

    const auto assign = [&](Index example, int fold) {
        assignment[static_cast<std::size_t>(example)] = fold;
        fold_capacity[static_cast<std::size_t>(fold)] -= 1.0;
        for (Index l = 0; l < n_labels; ++l)
            if (labels(example, l) == 1.0) {
                label_desire[static_cast<std::size_t>(fold)][static_cast<std::size_t>(l)] -= 1.0;
                remaining[static_cast<std::size_t>(l)] -= 1;
            }
    };

    for (;;) {
        // Rarest label still carrying unassigned examples; ties to the
        // smaller label index.
        Index best_label = -1;
        Index best_remaining = std::numeric_limits<Index>::max();
        for (Index l = 0; l < n_labels; ++l) {
            const Index r = remaining[static_cast<std::size_t>(l)];
            if (r > 0 && r < best_remaining) {
                best_remaining = r;
                best_label = l;
            }
        }
        if (best_label < 0) break;
        for (const Index example : label_examples[static_cast<std::size_t>(best_label)]) {
            if (assignment[static_cast<std::size_t>(example)] >= 0) continue;
            const int fold = pick_fold([&](int f) {
                return label_desire[static_cast<std::size_t>(f)][static_cast<std::size_t>(best_label)];
            });
            assign(example, fold);
        }
    }

    // Label-free examples go wherever the most capacity remains.
    for (Index i = 0; i < n; ++i)
        if (assignment[static_cast<std::size_t>(i)] < 0)
            assign(i, pick_fold([&](int f) { return fold_capacity[static_cast<std::size_t>(f)]; }));

    return assignment;
}

bool annotatable(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    const auto flush = [&] {
        if (current.empty()) return;
        const bool has_content = std::any_of(current.begin(), current.end(), [](unsigned char ch) {
            return std::isalnum(ch) != 0;
        });
        if (has_content) tokens.push_back(current);
        current.clear();
    };
    for (const char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch)) != 0) flush();
        else current.push_back(ch);
    }
    flush();

    if (tokens.size() < 10) return false;
    for (const std::string& token : tokens) {
        if (token.front() == '@') return false;
        if (token == "HTTPURL") return false;
        std::string lower(token.substr(0, 8));
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (lower.starts_with("http://") || lower.starts_with("https://")) return false;
    }
    return true;
}

namespace {

using ordered_json = nlohmann::ordered_json;

GifRecord record_from_json(const nlohmann::json& j) {
    GifRecord record;
    record.id = j.at("id").get<std::string>();
    record.hash = media::hash_from_hex(j.at("hash").get<std::string>());
    record.usage_count = j.at("usage_count").get<std::int64_t>();
    if (record.usage_count < 0)
        throw std::invalid_argument("catalog: negative usage_count for gif " + record.id);
    for (const auto& tag : j.at("tags")) record.tags.insert(tag.get<std::string>());
    const auto& captions = j.at("captions");
    if (captions.size() != 4)
        throw std::invalid_argument("catalog: expected 4 captions for gif " + record.id);
    for (std::size_t q = 0; q < 4; ++q) record.captions[q] = captions[q].get<std::string>();
    return record;
}

} // namespace

std::vector<GifRecord> read_catalog(std::istream& in) {
    std::vector<GifRecord> records;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(nlohmann::json::parse(line)));
        if (!seen.insert(records.back().id).second)
            throw std::invalid_argument("catalog: duplicate gif id " + records.back().id);
    }
    return records;
}

std::vector<GifRecord> read_catalog_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog: " + path);
    return read_catalog(in);
}

void write_catalog(std::ostream& out, std::span<const GifRecord> records) {
    for (const GifRecord& record : records) {
        ordered_json j;
        j["id"] = record.id;
        j["hash"] = media::to_hex(record.hash);
        j["usage_count"] = record.usage_count;
        j["tags"] = record.tags;
        j["captions"] = record.captions;
        out << j.dump() << '\n';
    }
}

void write_catalog_file(const std::string& path, std::span<const GifRecord> records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write catalog: " + path);
    write_catalog(out, records);
}

void write_split_csv(std::ostream& out, std::span<const ReplyPair> pairs) {
    out << "message_id,fold\n";
    for (const ReplyPair& pair : pairs)
        out << pair.message_id << ',' << fold_name(pair.split) << '\n';
}

std::map<std::string, Fold> read_split_csv(std::istream& in) {
    std::map<std::string, Fold> folds;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line == "message_id,fold") {
            first = false;
            continue;
        }
        first = false;
        const auto fields = io::split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("split csv: malformed line: " + line);
        folds[fields[0]] = fold_from_name(fields[1]);
    }
    return folds;
}

std::map<std::string, std::string> read_merge_map_file(const std::string& path) {
    std::map<std::string, std::string> merge_map;
    for (const std::string& line : io::read_lines(path)) {
        if (line.empty() || line.front() == '#') continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("merge map: expected raw<TAB>canonical: " + line);
        merge_map.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    return merge_map;
}

std::vector<ReplyPair> read_pairs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pairs file: " + path);
    std::vector<ReplyPair> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        ReplyPair pair;
        pair.message_id = j.at("message_id").get<std::string>();
        pair.text = j.at("text").get<std::string>();
        pair.gif_id = j.at("gif_id").get<std::string>();
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

void write_pairs_file(const std::string& path, std::span<const ReplyPair> pairs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pairs file: " + path);
    for (const ReplyPair& pair : pairs) {
        ordered_json j;
        j["message_id"] = pair.message_id;
        j["text"] = pair.text;
        j["gif_id"] = pair.gif_id;
        out << j.dump() << '\n';
    }
}

} // namespace prawn::catalog
