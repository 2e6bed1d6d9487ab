#pragma once

#include "prawn/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prawn::bandit {

// Gamma posterior over one arm's Poisson reward rate. shape/rate always equal
// prior plus the accumulated score sum / pull count.
struct ArmPosterior {
    double shape = 1.0;
    double rate = 1.0;
    std::int64_t pulls = 0;
    std::int64_t sum_scores = 0;

    double mean() const { return shape / rate; }
};

// Community scores may be negative; rewards are clipped at zero.
int truncate(int raw);

// Conjugate update: shape += sum(scores), rate += count. Scores must already
// be truncated.
ArmPosterior posterior_update(ArmPosterior arm, std::span<const int> scores);

struct Phase {
    enum class Kind { Warmup, Adaptive } kind = Kind::Adaptive;
    std::uint64_t counter = 0;

    static Phase warmup(std::uint64_t counter) { return {Kind::Warmup, counter}; }
    static Phase adaptive() { return {Kind::Adaptive, 0}; }
};

// Warmup: round-robin by counter. Adaptive: Thompson sampling, i.e. draw one
// Gamma rate per arm and take the argmax (ties to the smaller index).
int select_arm(std::span<const ArmPosterior> posteriors, Rng& rng, Phase phase);

struct KeywordFilter {
    std::set<std::string> blocked; // lowercase words
};

// False when any token, or its naive suffix-stripped lemma, is blocked. The
// stripper over-matches on purpose ("coping" blocks "cop"); exclusion is the
// fail-safe direction.
bool passes_filter(std::string_view text, const KeywordFilter& filter);

struct PostInfo {
    int comment_count = 0;
    bool viral = false;
};

struct CommentInfo {
    bool is_top_rated = false;
    std::string text;
};

// Reply only to the top-rated comment of a viral post with >= 10 comments,
// and only when the comment passes the keyword filter.
bool eligible(const PostInfo& post, const CommentInfo& comment, const KeywordFilter& filter);

struct ExperimentConfig {
    std::vector<std::string> arms;
    int warmup_days = 3;
    int max_replies_per_hour = 10;
    int active_hour_begin = 8;  // inclusive
    int active_hour_end = 20;   // exclusive
    double prior_shape = 1.0;
    double prior_rate = 1.0;
    std::uint64_t seed = 0;
    std::string block_list_path; // optional, CLI only

    void validate() const;
};

struct ReplyObservation {
    int arm = 0;
    int raw_score = 0;
    int truncated_score = 0;
    int day = 0;
    int hour = 0;
};

// Stand-in for the live community: per-arm NB-2 scores.
struct Environment {
    std::vector<double> means;
    double dispersion = 1.0;
};

struct SimulationResult {
    std::vector<ReplyObservation> trajectory;
    std::vector<ArmPosterior> posteriors;
};

// Deterministic day loop: active hours only, the hourly reply cap exhausted
// each hour, round-robin during warmup, then Thompson sampling with the
// posterior rebuilt each morning from all previous days' scores.
SimulationResult simulate(const ExperimentConfig& config, const Environment& environment,
                          int horizon_days);

// Observation log: CSV `day,hour,arm,raw_score,truncated_score`.
void write_observation_log(std::ostream& out, std::span<const ReplyObservation> trajectory);
std::vector<ReplyObservation> read_observation_log(std::istream& in);

// Key-value config file, '#' comments. Recognized keys: arms, warmup_days,
// max_replies_per_hour, active_hours, prior, seed, block_list, horizon_days,
// means, dispersion.
struct SimulationSpec {
    ExperimentConfig config;
    Environment environment;
    int horizon_days = 0;
};
SimulationSpec read_config_file(const std::string& path);

// Block list: one word per line, '#' comments.
KeywordFilter read_block_list_file(const std::string& path);

} // namespace prawn::bandit
