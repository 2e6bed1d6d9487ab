// prawn: gif-reply engine CLI. Subcommands cover the pipeline end to end:
// hash -> canonicalize -> split -> train-tags / train-joint -> rank -> eval,
// plus the field-experiment simulator and the statistical fitters.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prawn/analysis.hpp"
#include "prawn/bandit_rct.hpp"
#include "prawn/catalog.hpp"
#include "prawn/io.hpp"
#include "prawn/joint_embed.hpp"
#include "prawn/media_hash.hpp"
#include "prawn/retrieval_eval.hpp"
#include "prawn/tag_pivot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

using namespace prawn;
using ordered_json = nlohmann::ordered_json;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PRAWN_SEED")) return std::stoull(env);
    return 0;
}

std::vector<double> parse_ratios(const std::string& text) {
    std::vector<double> ratios;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string part =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        ratios.push_back(std::stod(part));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return ratios;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
}

std::string four_decimals(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.4f", value);
    return buffer;
}

void emit_report(const ordered_json& report, const std::string& out_path) {
    for (const auto& [key, value] : report.items())
        if (value.is_number())
            std::cout << key << ' ' << four_decimals(value.get<double>()) << '\n';
        else
            std::cout << key << ' ' << value.dump() << '\n';
    if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
}

std::vector<std::string> read_id_file(const std::string& path) {
    std::vector<std::string> ids;
    for (const std::string& line : io::read_lines(path))
        if (!line.empty()) ids.push_back(line);
    return ids;
}

// ---- subcommand payloads -------------------------------------------------

int run_hash(const std::vector<std::string>& files) {
    for (const std::string& file : files) {
        const auto frames = media::read_frame_dump_file(file);
        std::cout << media::to_hex(media::multi_frame_hash(frames)) << '\n';
    }
    return 0;
}

int run_canonicalize(const std::string& catalog_path, const std::string& query_hex,
                     const std::string& queries_path) {
    const auto records = catalog::read_catalog_file(catalog_path);
    std::vector<std::string> queries;
    if (!query_hex.empty()) queries.push_back(query_hex);
    if (!queries_path.empty())
        for (const std::string& line : io::read_lines(queries_path))
            if (!line.empty()) queries.push_back(line);
    if (queries.empty()) throw std::runtime_error("canonicalize: no query given");
    for (const std::string& hex : queries) {
        const auto match = catalog::canonicalize(media::hash_from_hex(hex), records);
        std::cout << (match ? *match : std::string("none")) << '\n';
    }
    return 0;
}

int run_split(const std::string& catalog_path, const std::string& pairs_path,
              const std::string& ratios_text, std::uint64_t seed, const std::string& out_path) {
    const auto ratios = parse_ratios(ratios_text);
    if (ratios.size() != 3)
        throw CLI::ValidationError("--ratios", "expected three comma-separated ratios");
    const auto records = catalog::read_catalog_file(catalog_path);
    auto pairs = catalog::read_pairs_file(pairs_path);

    std::set<std::string> vocabulary;
    std::map<std::string, const catalog::GifRecord*> by_id;
    for (const auto& record : records) {
        by_id[record.id] = &record;
        vocabulary.insert(record.tags.begin(), record.tags.end());
    }
    std::map<std::string, Index> tag_index;
    for (const auto& tag : vocabulary)
        tag_index.emplace(tag, static_cast<Index>(tag_index.size()));

    Mat labels = Mat::Zero(static_cast<Index>(pairs.size()),
                           static_cast<Index>(std::max<std::size_t>(tag_index.size(), 1)));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto it = by_id.find(pairs[i].gif_id);
        if (it == by_id.end())
            throw std::runtime_error("split: pair references unknown gif " + pairs[i].gif_id);
        for (const auto& tag : it->second->tags)
            labels(static_cast<Index>(i), tag_index.at(tag)) = 1.0;
    }

    const auto assignment = catalog::iterative_stratified_split(labels, ratios, seed);
    static const catalog::Fold kFolds[3] = {catalog::Fold::Train, catalog::Fold::Dev,
                                            catalog::Fold::Test};
    for (std::size_t i = 0; i < pairs.size(); ++i)
        pairs[i].split = kFolds[assignment[i]];

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write split: " + out_path);
    catalog::write_split_csv(out, pairs);
    return 0;
}

int run_train_tags(const std::string& features_path, const std::string& labels_path,
                   const std::string& out_path, const tags::TrainConfig& config) {
    const Mat features = io::read_matrix_file(features_path);
    const Mat labels = io::read_matrix_file(labels_path);
    const auto model = tags::train_multilabel(features, labels, config);
    tags::write_model_file(out_path, model);
    std::cout << "epochs " << config.epochs << " final_loss "
              << (model.trained_on.loss_curve.empty()
                      ? std::string("nan")
                      : four_decimals(model.trained_on.loss_curve.back()))
              << '\n';
    return 0;
}

struct MaskOptions {
    bool no_caption = false;
    bool no_object_names = false;
    bool no_region_features = false;
    Index caption_dim = 0;
    Index object_dim = 0;
    Index region_dim = 0;

    bool any() const { return no_caption || no_object_names || no_region_features; }
    joint::AblationMask mask() const {
        return {!no_caption, !no_object_names, !no_region_features};
    }
    joint::BundleDims dims() const { return {caption_dim, object_dim, region_dim}; }
};

Mat apply_mask(const Mat& gif_features, const MaskOptions& options) {
    const joint::BundleDims dims = options.dims();
    if (dims.total() != gif_features.cols())
        throw std::runtime_error("mask block dims must sum to the gif feature width");
    std::vector<joint::GifFeatureBundle> bundles;
    bundles.reserve(static_cast<std::size_t>(gif_features.rows()));
    for (Index i = 0; i < gif_features.rows(); ++i) {
        joint::GifFeatureBundle bundle;
        bundle.caption_block = gif_features.row(i).segment(0, dims.caption).transpose();
        bundle.object_name_block =
            gif_features.row(i).segment(dims.caption, dims.object_names).transpose();
        bundle.region_block =
            gif_features.row(i).segment(dims.caption + dims.object_names, dims.region).transpose();
        bundles.push_back(std::move(bundle));
    }
    return joint::assemble_feature_matrix(bundles, options.mask(), dims);
}

int run_train_joint(const std::string& text_path, const std::string& gif_path,
                    const std::string& out_path, const std::string& index_out,
                    const joint::JointTrainConfig& config, const MaskOptions& mask_options) {
    const Mat text_features = io::read_matrix_file(text_path);
    Mat gif_features = io::read_matrix_file(gif_path);
    if (mask_options.any()) gif_features = apply_mask(gif_features, mask_options);

    const auto params = joint::train_joint(text_features, gif_features, config);
    joint::write_params_file(out_path, params);
    if (!index_out.empty())
        io::write_matrix_file(index_out, joint::encode_all(params, joint::Side::Gif, gif_features));
    std::cout << "trained d_t " << params.w_text.rows() << " d_g " << params.w_gif.rows()
              << " d_e " << params.w_text.cols() << '\n';
    return 0;
}

int run_rank(const std::string& mode, const std::string& model_path,
             const std::string& params_path, const std::string& gif_tags_path,
             const std::string& frame_features_path, const std::string& index_path,
             const std::string& ids_path, const std::string& query_path,
             const std::string& query_ids_path, int k, double tag_threshold,
             const std::string& out_path) {
    const Mat queries = io::read_matrix_file(query_path);
    std::vector<std::string> query_ids;
    if (!query_ids_path.empty()) query_ids = read_id_file(query_ids_path);
    else
        for (Index i = 0; i < queries.rows(); ++i) query_ids.push_back("q" + std::to_string(i));
    if (static_cast<Index>(query_ids.size()) != queries.rows())
        throw std::runtime_error("rank: query id count does not match query rows");

    const auto ids = read_id_file(ids_path);
    std::vector<eval::RankedList> lists;

    if (mode == "tags") {
        const auto model = tags::read_model_file(model_path);
        std::map<std::string, Vec> gif_vectors;
        if (!gif_tags_path.empty()) {
            const Mat tag_matrix = io::read_matrix_file(gif_tags_path);
            if (static_cast<Index>(ids.size()) != tag_matrix.rows())
                throw std::runtime_error("rank: ids do not match gif tag rows");
            for (Index i = 0; i < tag_matrix.rows(); ++i)
                gif_vectors[ids[static_cast<std::size_t>(i)]] = tag_matrix.row(i).transpose();
        } else if (!frame_features_path.empty()) {
            const Mat frames = io::read_matrix_file(frame_features_path);
            if (frames.rows() != static_cast<Index>(ids.size()) * 4)
                throw std::runtime_error("rank: frame feature file wants 4 rows per gif");
            for (std::size_t g = 0; g < ids.size(); ++g)
                gif_vectors[ids[g]] = tags::estimate_gif_tags(
                    frames.middleRows(static_cast<Index>(4 * g), 4), model);
        } else {
            throw CLI::ValidationError("rank", "--gif-tags or --gif-frame-features required");
        }
        for (Index q = 0; q < queries.rows(); ++q) {
            Vec scores = tags::predict_tags(model, queries.row(q).transpose());
            if (tag_threshold >= 0.0)
                scores = (scores.array() > tag_threshold).cast<double>().matrix();
            const auto top = tags::select_by_tags(scores, gif_vectors, k);
            eval::RankedList list;
            list.query_id = query_ids[static_cast<std::size_t>(q)];
            for (const auto& gif : top) {
                list.gif_ids.push_back(gif);
                // negative distance, so scores stay non-increasing down the list
                list.scores.push_back(-(gif_vectors.at(gif) - scores).norm());
            }
            lists.push_back(std::move(list));
        }
    } else if (mode == "joint") {
        const auto params = joint::read_params_file(params_path);
        const Mat index = io::read_matrix_file(index_path);
        if (static_cast<Index>(ids.size()) != index.rows())
            throw std::runtime_error("rank: ids do not match index rows");
        for (Index q = 0; q < queries.rows(); ++q) {
            const Vec query = joint::encode(params, joint::Side::Text, queries.row(q).transpose());
            auto list =
                eval::topk_cosine(index, ids, query, std::min<int>(k, static_cast<int>(index.rows())),
                                  query_ids[static_cast<std::size_t>(q)]);
            lists.push_back(std::move(list));
        }
    } else {
        throw CLI::ValidationError("--mode", "expected tags or joint");
    }

    if (out_path.empty()) {
        eval::write_ranked_lists(std::cout, lists);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write ranked lists: " + out_path);
        eval::write_ranked_lists(out, lists);
    }
    return 0;
}

std::map<std::string, std::string> read_truth_csv(const std::string& path) {
    std::map<std::string, std::string> truth;
    bool first = true;
    for (const std::string& line : io::read_lines(path)) {
        if (line.empty()) continue;
        if (first && line == "query_id,gif_id") {
            first = false;
            continue;
        }
        first = false;
        const auto fields = io::split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("truth csv: malformed line: " + line);
        truth[fields[0]] = fields[1];
    }
    return truth;
}

int run_eval(const std::string& metric, const std::string& ranked_path,
             const std::string& truth_path, const std::string& annotations_path,
             std::vector<int> ks, int depth, const std::string& out_path) {
    ordered_json report;
    if (metric == "precision") {
        std::ifstream ranked_in(ranked_path);
        if (!ranked_in) throw std::runtime_error("cannot open ranked lists: " + ranked_path);
        const auto lists = eval::read_ranked_lists(ranked_in);
        const auto truth = read_truth_csv(truth_path);
        if (ks.empty()) ks = {1, 5, 10};
        for (const int k : ks)
            report["precision_at_" + std::to_string(k)] = eval::precision_at_k(lists, truth, k);
    } else if (metric == "ndcg") {
        std::ifstream ranked_in(ranked_path);
        if (!ranked_in) throw std::runtime_error("cannot open ranked lists: " + ranked_path);
        const auto lists = eval::read_ranked_lists(ranked_in);
        std::ifstream ann_in(annotations_path);
        if (!ann_in) throw std::runtime_error("cannot open annotations: " + annotations_path);
        const auto annotations = eval::read_annotations(ann_in);
        if (lists.empty()) throw std::runtime_error("eval: no ranked lists");
        double total = 0.0;
        for (const auto& list : lists) {
            eval::RankedList head = list;
            if (static_cast<int>(head.gif_ids.size()) > depth) {
                head.gif_ids.resize(static_cast<std::size_t>(depth));
                head.scores.resize(static_cast<std::size_t>(depth));
            }
            // ideal pool = the same annotated list, per-model normalization
            const auto rels = eval::relevances_for(head, annotations);
            total += eval::ndcg(rels, rels);
        }
        report["ndcg"] = total / static_cast<double>(lists.size());
    } else if (metric == "alpha") {
        std::ifstream ann_in(annotations_path);
        if (!ann_in) throw std::runtime_error("cannot open annotations: " + annotations_path);
        const auto annotations = eval::read_annotations(ann_in);
        report["alpha"] = eval::krippendorff_alpha_binary(annotations);
    } else {
        throw CLI::ValidationError("--metric", "expected precision, ndcg, or alpha");
    }
    emit_report(report, out_path);
    return 0;
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed_override,
                 std::optional<int> horizon_override, const std::string& out_path,
                 const std::string& posteriors_path) {
    auto spec = bandit::read_config_file(config_path);
    if (seed_override) spec.config.seed = *seed_override;
    if (horizon_override) spec.horizon_days = *horizon_override;
    if (!spec.config.block_list_path.empty())
        bandit::read_block_list_file(spec.config.block_list_path); // validate early

    const auto result = bandit::simulate(spec.config, spec.environment, spec.horizon_days);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write observation log: " + out_path);
    bandit::write_observation_log(out, result.trajectory);

    if (!posteriors_path.empty()) {
        ordered_json posteriors = ordered_json::array();
        for (std::size_t a = 0; a < result.posteriors.size(); ++a) {
            ordered_json arm;
            arm["arm"] = spec.config.arms[a];
            arm["shape"] = result.posteriors[a].shape;
            arm["rate"] = result.posteriors[a].rate;
            arm["pulls"] = result.posteriors[a].pulls;
            arm["sum_scores"] = result.posteriors[a].sum_scores;
            arm["mean"] = result.posteriors[a].mean();
            posteriors.push_back(arm);
        }
        write_text_file(posteriors_path, posteriors.dump(2) + "\n");
    }
    std::cout << "replies " << result.trajectory.size() << '\n';
    return 0;
}

int run_fit_nb(const std::string& design_path, bool add_intercept, int max_iterations,
               double tolerance, const std::string& out_path) {
    auto design = analysis::read_design_csv_file(design_path);
    if (add_intercept) {
        Mat with_intercept(design.X.rows(), design.X.cols() + 1);
        with_intercept.col(0).setOnes();
        with_intercept.rightCols(design.X.cols()) = design.X;
        design.X = std::move(with_intercept);
        design.column_names.insert(design.column_names.begin(), "intercept");
    }
    const auto fit = analysis::fit_negative_binomial(design, {max_iterations, tolerance});

    ordered_json report;
    ordered_json coefficients, errors;
    for (Index j = 0; j < fit.coefficients.size(); ++j) {
        coefficients[design.column_names[static_cast<std::size_t>(j)]] = fit.coefficients(j);
        errors[design.column_names[static_cast<std::size_t>(j)]] = fit.standard_errors(j);
    }
    report["coefficients"] = coefficients;
    report["standard_errors"] = errors;
    report["theta"] = fit.dispersion;
    report["log_likelihood"] = fit.log_likelihood;
    report["converged"] = fit.converged;
    report["iterations"] = fit.iterations;
    report["poisson_like"] = fit.poisson_like;

    std::cout << report.dump(2) << '\n';
    if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
    return 0;
}

std::vector<double> read_counts_file(const std::string& path) {
    std::vector<double> counts;
    for (const std::string& line : io::read_lines(path))
        if (!line.empty() && line.front() != '#') counts.push_back(std::stod(line));
    if (counts.empty()) throw std::runtime_error("counts file is empty: " + path);
    return counts;
}

int run_stats(const std::string& fit, const std::string& counts_path, const std::string& xy_path,
              int permutations, std::uint64_t seed, const std::string& out_path) {
    ordered_json report;
    if (fit == "lognormal") {
        const auto result = analysis::fit_lognormal(read_counts_file(counts_path));
        report["mu"] = result.mu;
        report["sigma"] = result.sigma;
    } else if (fit == "zipf") {
        const auto result = analysis::rank_frequency_fit(read_counts_file(counts_path));
        report["slope"] = result.slope;
        report["intercept"] = result.intercept;
        report["r_squared"] = result.r_squared;
    } else if (fit == "correlation") {
        std::vector<double> x, y;
        bool first = true;
        for (const std::string& line : io::read_lines(xy_path)) {
            if (line.empty()) continue;
            const auto fields = io::split_csv_line(line);
            if (fields.size() != 2) throw std::runtime_error("xy csv: malformed line: " + line);
            if (first) {
                first = false;
                try {
                    std::stod(fields[0]);
                } catch (const std::exception&) {
                    continue; // header row
                }
            }
            x.push_back(std::stod(fields[0]));
            y.push_back(std::stod(fields[1]));
        }
        const auto result = analysis::pearson_with_permutation(x, y, permutations, seed);
        report["r"] = result.r;
        report["p_value"] = result.p_value;
    } else {
        throw CLI::ValidationError("--fit", "expected lognormal, zipf, or correlation");
    }
    emit_report(report, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prawn: gif reply selection, evaluation, and experiment toolkit"};
    app.require_subcommand(1);
    // key=value defaults with [subcommand] sections; explicit flags win
    app.set_config("--config", "", "Defaults file applied beneath command-line flags");

    auto* hash_cmd = app.add_subcommand("hash", "Hash frame dumps into 192-bit fingerprints");
    std::vector<std::string> hash_files;
    hash_cmd->add_option("files", hash_files, "Frame-dump files")->required();

    auto* canon_cmd =
        app.add_subcommand("canonicalize", "Resolve query hashes against a gif catalog");
    std::string canon_catalog, canon_query, canon_queries;
    canon_cmd->add_option("--catalog", canon_catalog, "Catalog JSONL")->required();
    canon_cmd->add_option("--query", canon_query, "Single 48-hex query");
    canon_cmd->add_option("--queries", canon_queries, "File of 48-hex queries, one per line");

    auto* split_cmd = app.add_subcommand("split", "Stratified train/dev/test split");
    std::string split_catalog, split_pairs, split_out;
    std::string split_ratios = "0.8,0.1,0.1";
    std::uint64_t split_seed = default_seed();
    split_cmd->add_option("--catalog", split_catalog, "Catalog JSONL")->required();
    split_cmd->add_option("--pairs", split_pairs, "Reply pairs JSONL")->required();
    split_cmd->add_option("--ratios", split_ratios, "Three comma-separated fold ratios");
    split_cmd->add_option("--seed", split_seed, "Tie-break seed");
    split_cmd->add_option("--out", split_out, "Split CSV output")->required();

    auto* tags_cmd = app.add_subcommand("train-tags", "Train the multi-label tag classifier");
    std::string tags_features, tags_labels, tags_out;
    tags::TrainConfig tag_config;
    tag_config.seed = default_seed();
    tags_cmd->add_option("--features", tags_features, "Feature matrix (GREM)")->required();
    tags_cmd->add_option("--labels", tags_labels, "K-hot label matrix (GREM)")->required();
    tags_cmd->add_option("--out", tags_out, "Model output (PRWT)")->required();
    tags_cmd->add_option("--lr", tag_config.learning_rate, "Learning rate");
    tags_cmd->add_option("--weight-decay", tag_config.weight_decay, "Decoupled weight decay");
    tags_cmd->add_option("--epochs", tag_config.epochs, "Epochs");
    tags_cmd->add_option("--batch", tag_config.batch_size, "Batch size");
    tags_cmd->add_option("--seed", tag_config.seed, "Shuffle seed");

    auto* joint_cmd = app.add_subcommand("train-joint", "Train the contrastive joint embedding");
    std::string joint_text, joint_gif, joint_out, joint_index_out;
    joint::JointTrainConfig joint_config;
    joint_config.seed = default_seed();
    MaskOptions joint_mask;
    joint_cmd->add_option("--text", joint_text, "Text feature matrix (GREM)")->required();
    joint_cmd->add_option("--gif", joint_gif, "Gif feature matrix (GREM)")->required();
    joint_cmd->add_option("--out", joint_out, "Parameter output (PRWJ)")->required();
    joint_cmd->add_option("--index-out", joint_index_out, "Also write the gif embedding index");
    joint_cmd->add_option("--embed-dim", joint_config.embed_dim, "Embedding dimension");
    joint_cmd->add_option("--tau", joint_config.temperature, "Softmax temperature");
    joint_cmd->add_option("--lr", joint_config.learning_rate, "Learning rate");
    joint_cmd->add_option("--weight-decay", joint_config.weight_decay, "Decoupled weight decay");
    joint_cmd->add_option("--epochs", joint_config.epochs, "Epochs");
    joint_cmd->add_option("--batch", joint_config.batch_size, "Batch size");
    joint_cmd->add_option("--seed", joint_config.seed, "Init and shuffle seed");
    joint_cmd->add_flag("--no-caption", joint_mask.no_caption, "Ablate the caption block");
    joint_cmd->add_flag("--no-object-names", joint_mask.no_object_names,
                        "Ablate the object-name block");
    joint_cmd->add_flag("--no-region-features", joint_mask.no_region_features,
                        "Ablate the region block");
    joint_cmd->add_option("--caption-dim", joint_mask.caption_dim, "Caption block width");
    joint_cmd->add_option("--object-dim", joint_mask.object_dim, "Object-name block width");
    joint_cmd->add_option("--region-dim", joint_mask.region_dim, "Region block width");

    auto* rank_cmd = app.add_subcommand("rank", "Rank gifs for message feature vectors");
    std::string rank_mode, rank_model, rank_params, rank_gif_tags, rank_frames, rank_index,
        rank_ids, rank_query, rank_query_ids, rank_out;
    int rank_k = 10;
    double rank_threshold = -1.0;
    rank_cmd->add_option("--mode", rank_mode, "tags or joint")->required();
    rank_cmd->add_option("--model", rank_model, "Tag model (PRWT)");
    rank_cmd->add_option("--params", rank_params, "Joint params (PRWJ)");
    rank_cmd->add_option("--gif-tags", rank_gif_tags, "Per-gif tag score matrix (GREM)");
    rank_cmd->add_option("--gif-frame-features", rank_frames,
                         "Per-gif quartile frame features, 4 rows per gif (GREM)");
    rank_cmd->add_option("--index", rank_index, "Unit-norm gif embedding index (GREM)");
    rank_cmd->add_option("--ids", rank_ids, "Gif ids, one per line")->required();
    rank_cmd->add_option("--query", rank_query, "Query feature matrix (GREM)")->required();
    rank_cmd->add_option("--query-ids", rank_query_ids, "Query ids, one per line");
    rank_cmd->add_option("-k,--k", rank_k, "List depth");
    rank_cmd->add_option("--tag-threshold", rank_threshold,
                         "Binarize predicted tag scores at this threshold first");
    rank_cmd->add_option("--out", rank_out, "Ranked-list CSV output (stdout when omitted)");

    auto* eval_cmd = app.add_subcommand("eval", "Score ranked lists and annotations");
    std::string eval_metric, eval_ranked, eval_truth, eval_annotations, eval_out;
    std::vector<int> eval_ks;
    int eval_depth = 10;
    eval_cmd->add_option("--metric", eval_metric, "precision, ndcg, or alpha")->required();
    eval_cmd->add_option("--ranked", eval_ranked, "Ranked-list CSV");
    eval_cmd->add_option("--truth", eval_truth, "Ground-truth CSV query_id,gif_id");
    eval_cmd->add_option("--annotations", eval_annotations, "Annotation CSV");
    eval_cmd->add_option("-k,--k", eval_ks, "Cutoffs for precision (default 1 5 10)");
    eval_cmd->add_option("--depth", eval_depth, "List depth for nDCG");
    eval_cmd->add_option("--out", eval_out, "Full-precision JSON report path");

    auto* sim_cmd = app.add_subcommand("simulate-rct", "Run the Thompson-sampling simulator");
    std::string sim_config, sim_out, sim_posteriors;
    std::optional<std::uint64_t> sim_seed;
    std::optional<int> sim_horizon;
    sim_cmd->add_option("--config", sim_config, "Experiment key-value config")->required();
    sim_cmd->add_option("--out", sim_out, "Observation log CSV")->required();
    sim_cmd->add_option("--posteriors", sim_posteriors, "Final posterior JSON");
    sim_cmd->add_option("--seed", sim_seed, "Override the config seed");
    sim_cmd->add_option("--horizon-days", sim_horizon, "Override the config horizon");

    auto* nb_cmd = app.add_subcommand("fit-nb", "Negative Binomial regression");
    std::string nb_design, nb_out;
    bool nb_intercept = false;
    int nb_max_iterations = 200;
    double nb_tolerance = 1e-8;
    nb_cmd->add_option("--design", nb_design, "Design CSV, first column y")->required();
    nb_cmd->add_flag("--add-intercept", nb_intercept, "Prepend a column of ones");
    nb_cmd->add_option("--max-iterations", nb_max_iterations, "Iteration cap");
    nb_cmd->add_option("--tolerance", nb_tolerance, "Log-likelihood convergence tolerance");
    nb_cmd->add_option("--out", nb_out, "JSON report path");

    auto* stats_cmd = app.add_subcommand("stats", "Distribution fits and correlation");
    std::string stats_fit, stats_counts, stats_xy, stats_out;
    int stats_permutations = 10000;
    std::uint64_t stats_seed = default_seed();
    stats_cmd->add_option("--fit", stats_fit, "lognormal, zipf, or correlation")->required();
    stats_cmd->add_option("--counts", stats_counts, "Counts file, one per line");
    stats_cmd->add_option("--xy", stats_xy, "Two-column CSV for correlation");
    stats_cmd->add_option("--permutations", stats_permutations, "Permutation count");
    stats_cmd->add_option("--seed", stats_seed, "Permutation seed");
    stats_cmd->add_option("--out", stats_out, "Full-precision JSON report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (hash_cmd->parsed()) return run_hash(hash_files);
        if (canon_cmd->parsed()) return run_canonicalize(canon_catalog, canon_query, canon_queries);
        if (split_cmd->parsed())
            return run_split(split_catalog, split_pairs, split_ratios, split_seed, split_out);
        if (tags_cmd->parsed())
            return run_train_tags(tags_features, tags_labels, tags_out, tag_config);
        if (joint_cmd->parsed())
            return run_train_joint(joint_text, joint_gif, joint_out, joint_index_out,
                                   joint_config, joint_mask);
        if (rank_cmd->parsed())
            return run_rank(rank_mode, rank_model, rank_params, rank_gif_tags, rank_frames,
                            rank_index, rank_ids, rank_query, rank_query_ids, rank_k,
                            rank_threshold, rank_out);
        if (eval_cmd->parsed())
            return run_eval(eval_metric, eval_ranked, eval_truth, eval_annotations, eval_ks,
                            eval_depth, eval_out);
        if (sim_cmd->parsed())
            return run_simulate(sim_config, sim_seed, sim_horizon, sim_out, sim_posteriors);
        if (nb_cmd->parsed())
            return run_fit_nb(nb_design, nb_intercept, nb_max_iterations, nb_tolerance, nb_out);
        if (stats_cmd->parsed())
            return run_stats(stats_fit, stats_counts, stats_xy, stats_permutations, stats_seed,
                             stats_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
