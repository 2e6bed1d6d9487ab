#include "prawn/joint_embed.hpp"

#include "prawn/optim.hpp"
#include "prawn/io.hpp"
#include "prawn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace prawn::joint {

namespace {

void check_block(const Vec& block, Index expected, const char* name) {
    if (block.size() != expected)
        throw std::invalid_argument(std::string("assemble_gif_features: ") + name +
                                    " block dimension mismatch");
}

} // namespace

Vec assemble_gif_features(const GifFeatureBundle& bundle, const AblationMask& mask,
                          const BundleDims& dims) {
    if (!mask.use_caption && !mask.use_object_names && !mask.use_region_features)
        throw std::invalid_argument("assemble_gif_features: all-false ablation mask");
    check_block(bundle.caption_block, dims.caption, "caption");
    check_block(bundle.object_name_block, dims.object_names, "object name");
    check_block(bundle.region_block, dims.region, "region");

    Vec out = Vec::Zero(dims.total());
    if (mask.use_caption && bundle.has_caption)
        out.segment(0, dims.caption) = bundle.caption_block;
    if (mask.use_object_names && bundle.has_object_names)
        out.segment(dims.caption, dims.object_names) = bundle.object_name_block;
    if (mask.use_region_features && bundle.has_region)
        out.segment(dims.caption + dims.object_names, dims.region) = bundle.region_block;
    return out;
}

Mat assemble_feature_matrix(std::span<const GifFeatureBundle> bundles,
                            const AblationMask& mask, const BundleDims& dims) {
    Mat out(static_cast<Index>(bundles.size()), dims.total());
    for (std::size_t i = 0; i < bundles.size(); ++i)
        out.row(static_cast<Index>(i)) = assemble_gif_features(bundles[i], mask, dims).transpose();
    return out;
}

Vec encode(const JointEmbedParams& params, Side side, const Vec& x) {
    const Mat& w = side == Side::Text ? params.w_text : params.w_gif;
    if (x.size() != w.rows())
        throw std::invalid_argument("encode: feature dimension mismatch");
    Vec projected = w.transpose() * x;
    const double norm = projected.norm();
    if (norm == 0.0)
        throw DegenerateEmbeddingError("encode: zero-norm projection");
    return projected / norm;
}

Mat encode_all(const JointEmbedParams& params, Side side, const Mat& features) {
    Mat out(features.rows(), side == Side::Text ? params.w_text.cols() : params.w_gif.cols());
    for (Index i = 0; i < features.rows(); ++i)
        out.row(i) = encode(params, side, features.row(i).transpose()).transpose();
    return out;
}

ContrastiveResult contrastive_loss(const JointEmbedParams& params, const Mat& text_features,
                                   const Mat& gif_features) {
    const Index batch = text_features.rows();
    if (batch < 1 || gif_features.rows() != batch)
        throw std::invalid_argument("contrastive_loss: batch rows must align and be nonempty");
    if (!(params.temperature > 0.0))
        throw std::invalid_argument("contrastive_loss: temperature must be positive");

    // Projections and their row norms; embeddings are the normalized rows.
    const Mat text_proj = text_features * params.w_text; // B x d_e
    const Mat gif_proj = gif_features * params.w_gif;
    Vec text_norm(batch), gif_norm(batch);
    for (Index i = 0; i < batch; ++i) {
        text_norm(i) = text_proj.row(i).norm();
        gif_norm(i) = gif_proj.row(i).norm();
        if (text_norm(i) == 0.0 || gif_norm(i) == 0.0)
            throw DegenerateEmbeddingError("contrastive_loss: zero-norm projection");
    }
    const Mat text_emb = text_norm.cwiseInverse().asDiagonal() * text_proj;
    const Mat gif_emb = gif_norm.cwiseInverse().asDiagonal() * gif_proj;

    const Mat logits = text_emb * gif_emb.transpose() / params.temperature;

    // Row- and column-wise softmax with the diagonal as target.
    Mat row_prob(batch, batch), col_prob(batch, batch);
    double loss = 0.0;
    for (Index i = 0; i < batch; ++i) {
        const Vec row = logits.row(i).transpose();
        const double row_max = row.maxCoeff();
        const Vec row_exp = (row.array() - row_max).exp();
        const double row_sum = row_exp.sum();
        row_prob.row(i) = (row_exp / row_sum).transpose();
        loss -= logits(i, i) - row_max - std::log(row_sum);

        const Vec col = logits.col(i);
        const double col_max = col.maxCoeff();
        const Vec col_exp = (col.array() - col_max).exp();
        const double col_sum = col_exp.sum();
        col_prob.col(i) = col_exp / col_sum;
        loss -= logits(i, i) - col_max - std::log(col_sum);
    }
    loss /= 2.0 * static_cast<double>(batch);

    // dL/dlogits, then back through the temperature, the normalization, and
    // the linear projections.
    Mat dlogits = (row_prob + col_prob) / (2.0 * static_cast<double>(batch));
    dlogits.diagonal().array() -= 1.0 / static_cast<double>(batch);

    const Mat dtext_emb = dlogits * gif_emb / params.temperature;       // B x d_e
    const Mat dgif_emb = dlogits.transpose() * text_emb / params.temperature;

    Mat dtext_proj(batch, text_proj.cols()), dgif_proj(batch, gif_proj.cols());
    for (Index i = 0; i < batch; ++i) {
        const auto te = text_emb.row(i);
        dtext_proj.row(i) = (dtext_emb.row(i) - te.dot(dtext_emb.row(i)) * te) / text_norm(i);
        const auto ge = gif_emb.row(i);
        dgif_proj.row(i) = (dgif_emb.row(i) - ge.dot(dgif_emb.row(i)) * ge) / gif_norm(i);
    }

    ContrastiveResult result;
    result.loss = loss;
    result.grad_w_text = text_features.transpose() * dtext_proj;
    result.grad_w_gif = gif_features.transpose() * dgif_proj;
    return result;
}

namespace {

Mat random_init(Index rows, Index cols, Rng& rng) {
    Mat w(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            w(r, c) = scale * rng.normal();
    return w;
}

} // namespace

JointEmbedParams train_joint(const Mat& text_features, const Mat& gif_features,
                             const JointTrainConfig& config) {
    const Index n = text_features.rows();
    if (n < 2)
        throw std::invalid_argument("train_joint: need at least 2 pairs for negatives");
    if (gif_features.rows() != n)
        throw std::invalid_argument("train_joint: text/gif pair counts differ");
    if (config.batch_size < 1 || config.epochs < 0)
        throw std::invalid_argument("train_joint: bad config");

    Rng rng(config.seed);
    JointEmbedParams params;
    params.w_text = random_init(text_features.cols(), config.embed_dim, rng);
    params.w_gif = random_init(gif_features.cols(), config.embed_dim, rng);
    params.temperature = config.temperature;

    optim::AdamW opt_text(params.w_text.rows(), params.w_text.cols(), config.learning_rate,
                          config.weight_decay);
    optim::AdamW opt_gif(params.w_gif.rows(), params.w_gif.cols(), config.learning_rate,
                         config.weight_decay);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with the run's stream keeps the schedule seed-stable.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        for (Index start = 0; start < n; start += config.batch_size) {
            const Index size = std::min<Index>(config.batch_size, n - start);
            Mat text_batch(size, text_features.cols());
            Mat gif_batch(size, gif_features.cols());
            for (Index b = 0; b < size; ++b) {
                text_batch.row(b) = text_features.row(order[static_cast<std::size_t>(start + b)]);
                gif_batch.row(b) = gif_features.row(order[static_cast<std::size_t>(start + b)]);
            }
            const ContrastiveResult result = contrastive_loss(params, text_batch, gif_batch);
            opt_text.step(params.w_text, result.grad_w_text);
            opt_gif.step(params.w_gif, result.grad_w_gif);
        }
    }
    return params;
}

JointEmbedParams train_joint(const Mat& text_features,
                             std::span<const GifFeatureBundle> bundles,
                             const AblationMask& mask, const BundleDims& dims,
                             const JointTrainConfig& config) {
    return train_joint(text_features, assemble_feature_matrix(bundles, mask, dims), config);
}

std::vector<std::string> rank_gifs(const JointEmbedParams& params, const Vec& text_features,
                                   const Mat& gif_embeddings,
                                   std::span<const std::string> ids, int k) {
    const Index n = gif_embeddings.rows();
    if (n == 0) throw std::invalid_argument("rank_gifs: empty index");
    if (static_cast<Index>(ids.size()) != n)
        throw std::invalid_argument("rank_gifs: id count does not match index rows");
    if (k < 1) throw std::invalid_argument("rank_gifs: k must be positive");

    const Vec query = encode(params, Side::Text, text_features);
    const Vec scores = gif_embeddings * query;
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    const auto better = [&](Index a, Index b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
    };
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      better);
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back(ids[static_cast<std::size_t>(idx[i])]);
    return out;
}

void write_params(std::ostream& out, const JointEmbedParams& params) {
    io::write_magic(out, "PRWJ");
    io::write_u32(out, static_cast<std::uint32_t>(params.w_text.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(params.w_gif.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(params.w_text.cols()));
    io::write_f64(out, params.temperature);
    for (Index r = 0; r < params.w_text.rows(); ++r)
        for (Index c = 0; c < params.w_text.cols(); ++c)
            io::write_f64(out, params.w_text(r, c));
    for (Index r = 0; r < params.w_gif.rows(); ++r)
        for (Index c = 0; c < params.w_gif.cols(); ++c)
            io::write_f64(out, params.w_gif(r, c));
}

JointEmbedParams read_params(std::istream& in) {
    io::expect_magic(in, "PRWJ", "PRWJ params");
    const std::uint32_t d_text = io::read_u32(in);
    const std::uint32_t d_gif = io::read_u32(in);
    const std::uint32_t d_embed = io::read_u32(in);
    JointEmbedParams params;
    params.temperature = io::read_f64(in);
    params.w_text.resize(d_text, d_embed);
    params.w_gif.resize(d_gif, d_embed);
    for (std::uint32_t r = 0; r < d_text; ++r)
        for (std::uint32_t c = 0; c < d_embed; ++c)
            params.w_text(r, c) = io::read_f64(in);
    for (std::uint32_t r = 0; r < d_gif; ++r)
        for (std::uint32_t c = 0; c < d_embed; ++c)
            params.w_gif(r, c) = io::read_f64(in);
    return params;
}

void write_params_file(const std::string& path, const JointEmbedParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write params file: " + path);
    write_params(out, params);
}

JointEmbedParams read_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open params file: " + path);
    return read_params(in);
}

} // namespace prawn::joint
