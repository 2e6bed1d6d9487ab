#include "prawn/bandit_rct.hpp"

#include "prawn/io.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace prawn::bandit {

int truncate(int raw) { return raw < 0 ? 0 : raw; }

ArmPosterior posterior_update(ArmPosterior arm, std::span<const int> scores) {
    for (const int score : scores) {
        if (score < 0)
            throw std::invalid_argument("posterior_update: scores must be pre-truncated");
        arm.shape += static_cast<double>(score);
        arm.sum_scores += score;
    }
    arm.rate += static_cast<double>(scores.size());
    arm.pulls += static_cast<std::int64_t>(scores.size());
    return arm;
}

int select_arm(std::span<const ArmPosterior> posteriors, Rng& rng, Phase phase) {
    if (posteriors.empty()) throw std::invalid_argument("select_arm: no arms");
    if (phase.kind == Phase::Kind::Warmup)
        return static_cast<int>(phase.counter % posteriors.size());
    int best = 0;
    double best_rate = -1.0;
    for (std::size_t a = 0; a < posteriors.size(); ++a) {
        const double sampled = rng.gamma(posteriors[a].shape, posteriors[a].rate);
        if (sampled > best_rate) {
            best_rate = sampled;
            best = static_cast<int>(a);
        }
    }
    return best;
}

namespace {

// Trailing s/es/ed/ing, plus the de-doubled stem when stripping exposes a
// doubled consonant ("stopped" -> "stopp" -> "stop").
void add_lemma_candidates(const std::string& token, std::vector<std::string>& out) {
    static const char* kSuffixes[] = {"s", "es", "ed", "ing"};
    for (const char* suffix : kSuffixes) {
        const std::size_t len = std::string_view(suffix).size();
        if (token.size() <= len || !token.ends_with(suffix)) continue;
        std::string stem = token.substr(0, token.size() - len);
        if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2]) {
            std::string dedoubled = stem.substr(0, stem.size() - 1);
            out.push_back(std::move(dedoubled));
        }
        out.push_back(std::move(stem));
    }
}

} // namespace

bool passes_filter(std::string_view text, const KeywordFilter& filter) {
    std::string token;
    std::vector<std::string> candidates;
    const auto check = [&]() -> bool { // true when the token hits the block list
        if (token.empty()) return false;
        candidates.clear();
        candidates.push_back(token);
        add_lemma_candidates(token, candidates);
        for (const std::string& candidate : candidates)
            if (filter.blocked.contains(candidate)) return true;
        return false;
    };
    for (const char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '\'') {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else {
            if (check()) return false;
            token.clear();
        }
    }
    return !check();
}

bool eligible(const PostInfo& post, const CommentInfo& comment, const KeywordFilter& filter) {
    return post.comment_count >= 10 && post.viral && comment.is_top_rated &&
           passes_filter(comment.text, filter);
}

void ExperimentConfig::validate() const {
    if (arms.empty()) throw std::invalid_argument("experiment config: no arms");
    if (warmup_days < 0) throw std::invalid_argument("experiment config: negative warmup");
    if (max_replies_per_hour < 1)
        throw std::invalid_argument("experiment config: hourly cap must be positive");
    if (active_hour_begin < 0 || active_hour_end > 24 || active_hour_begin >= active_hour_end)
        throw std::invalid_argument("experiment config: bad active hours");
    if (!(prior_shape > 0.0) || !(prior_rate > 0.0))
        throw std::invalid_argument("experiment config: prior must be positive");
}

SimulationResult simulate(const ExperimentConfig& config, const Environment& environment,
                          int horizon_days) {
    config.validate();
    if (environment.means.size() != config.arms.size())
        throw std::invalid_argument("simulate: one mean per arm required");
    for (const double mean : environment.means)
        if (mean < 0.0) throw std::invalid_argument("simulate: negative arm mean");
    if (!(environment.dispersion > 0.0))
        throw std::invalid_argument("simulate: dispersion must be positive");
    if (horizon_days < 0) throw std::invalid_argument("simulate: negative horizon");

    const std::size_t n_arms = config.arms.size();
    SimulationResult result;
    result.posteriors.assign(n_arms,
                             ArmPosterior{config.prior_shape, config.prior_rate, 0, 0});
    std::vector<std::vector<int>> scores_by_arm(n_arms);

    std::uint64_t warmup_counter = 0;
    for (int day = 0; day < horizon_days; ++day) {
        // Separate streams keyed by day keep arm selection replayable
        // independently of how many environment draws happened before.
        Rng select_rng(config.seed, 2 * static_cast<std::uint64_t>(day));
        Rng score_rng(config.seed, 2 * static_cast<std::uint64_t>(day) + 1);

        // Morning posterior from all previous days' scores, reused all day.
        std::vector<ArmPosterior> posteriors(
            n_arms, ArmPosterior{config.prior_shape, config.prior_rate, 0, 0});
        for (std::size_t a = 0; a < n_arms; ++a)
            posteriors[a] = posterior_update(posteriors[a], scores_by_arm[a]);

        const bool warmup = day < config.warmup_days;
        for (int hour = config.active_hour_begin; hour < config.active_hour_end; ++hour) {
            for (int reply = 0; reply < config.max_replies_per_hour; ++reply) {
                const Phase phase =
                    warmup ? Phase::warmup(warmup_counter++) : Phase::adaptive();
                const int arm = select_arm(posteriors, select_rng, phase);
                const int raw = static_cast<int>(score_rng.negative_binomial(
                    environment.means[static_cast<std::size_t>(arm)], environment.dispersion));
                const int score = truncate(raw);
                result.trajectory.push_back(ReplyObservation{arm, raw, score, day, hour});
                scores_by_arm[static_cast<std::size_t>(arm)].push_back(score);
            }
        }
    }

    for (std::size_t a = 0; a < n_arms; ++a)
        result.posteriors[a] = posterior_update(result.posteriors[a], scores_by_arm[a]);
    return result;
}

void write_observation_log(std::ostream& out, std::span<const ReplyObservation> trajectory) {
    out << "day,hour,arm,raw_score,truncated_score\n";
    for (const ReplyObservation& obs : trajectory)
        out << obs.day << ',' << obs.hour << ',' << obs.arm << ',' << obs.raw_score << ','
            << obs.truncated_score << '\n';
}

std::vector<ReplyObservation> read_observation_log(std::istream& in) {
    std::vector<ReplyObservation> trajectory;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "day,hour,arm,raw_score,truncated_score") continue;
        }
        const auto fields = io::split_csv_line(line);
        if (fields.size() != 5)
            throw std::runtime_error("observation log: malformed line: " + line);
        trajectory.push_back(ReplyObservation{std::stoi(fields[2]), std::stoi(fields[3]),
                                              std::stoi(fields[4]), std::stoi(fields[0]),
                                              std::stoi(fields[1])});
    }
    return trajectory;
}

namespace {

std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, sep)) {
        const auto begin = part.find_first_not_of(" \t");
        if (begin == std::string::npos) {
            parts.push_back("");
            continue;
        }
        const auto end = part.find_last_not_of(" \t");
        parts.push_back(part.substr(begin, end - begin + 1));
    }
    return parts;
}

} // namespace

SimulationSpec read_config_file(const std::string& path) {
    SimulationSpec spec;
    for (const std::string& raw_line : io::read_lines(path)) {
        std::string line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream in(line);
        std::string key;
        if (!(in >> key)) continue;
        std::string value;
        std::getline(in, value);
        if (const auto eq = value.find_first_not_of(" \t="); eq != std::string::npos)
            value = value.substr(eq);
        else
            value.clear();
        if (const auto end = value.find_last_not_of(" \t\r"); end != std::string::npos)
            value.resize(end + 1);

        if (key == "arms") spec.config.arms = split_on(value, ',');
        else if (key == "warmup_days") spec.config.warmup_days = std::stoi(value);
        else if (key == "max_replies_per_hour") spec.config.max_replies_per_hour = std::stoi(value);
        else if (key == "active_hours") {
            const auto parts = split_on(value, ',');
            if (parts.size() != 2)
                throw std::runtime_error("config: active_hours wants begin,end");
            spec.config.active_hour_begin = std::stoi(parts[0]);
            spec.config.active_hour_end = std::stoi(parts[1]);
        } else if (key == "prior") {
            const auto parts = split_on(value, ',');
            if (parts.size() != 2) throw std::runtime_error("config: prior wants shape,rate");
            spec.config.prior_shape = std::stod(parts[0]);
            spec.config.prior_rate = std::stod(parts[1]);
        } else if (key == "seed") spec.config.seed = std::stoull(value);
        else if (key == "block_list") spec.config.block_list_path = value;
        else if (key == "horizon_days") spec.horizon_days = std::stoi(value);
        else if (key == "means") {
            spec.environment.means.clear();
            for (const std::string& part : split_on(value, ','))
                spec.environment.means.push_back(std::stod(part));
        } else if (key == "dispersion") spec.environment.dispersion = std::stod(value);
        else throw std::runtime_error("config: unknown key " + key);
    }
    return spec;
}

KeywordFilter read_block_list_file(const std::string& path) {
    KeywordFilter filter;
    for (const std::string& line : io::read_lines(path)) {
        if (line.empty() || line.front() == '#') continue;
        std::string word = line;
        if (const auto end = word.find_last_not_of(" \t"); end != std::string::npos)
            word.resize(end + 1);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (!word.empty()) filter.blocked.insert(word);
    }
    return filter;
}

} // namespace prawn::bandit
