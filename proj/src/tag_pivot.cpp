#include "prawn/tag_pivot.hpp"

#include "prawn/io.hpp"
#include "prawn/optim.hpp"
#include "prawn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace prawn::tags {

namespace {

void check_binary_labels(const Mat& labels) {
    for (Index i = 0; i < labels.rows(); ++i)
        for (Index t = 0; t < labels.cols(); ++t)
            if (labels(i, t) != 0.0 && labels(i, t) != 1.0)
                throw std::invalid_argument("labels must be 0/1");
}

// log(1 + e^z) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

BceResult bce_loss_and_gradient(const Mat& features, const Mat& labels, const Mat& weights,
                                const Vec& bias) {
    const Index n = features.rows();
    const Index n_tags = weights.cols();
    if (labels.rows() != n || labels.cols() != n_tags || features.cols() != weights.rows() ||
        bias.size() != n_tags)
        throw std::invalid_argument("bce_loss_and_gradient: dimension mismatch");
    if (n < 1) throw std::invalid_argument("bce_loss_and_gradient: empty batch");
    check_binary_labels(labels);

    const Mat logits = (features * weights).rowwise() + bias.transpose();
    const double cells = static_cast<double>(n) * static_cast<double>(n_tags);

    double loss = 0.0;
    Mat dlogits(n, n_tags);
    for (Index i = 0; i < n; ++i)
        for (Index t = 0; t < n_tags; ++t) {
            const double z = logits(i, t);
            const double y = labels(i, t);
            loss += softplus(z) - y * z;
            dlogits(i, t) = (sigmoid(z) - y) / cells;
        }

    BceResult result;
    result.loss = loss / cells;
    result.grad_weights = features.transpose() * dlogits;
    result.grad_bias = dlogits.colwise().sum().transpose();
    return result;
}

LinearMultiLabelModel train_multilabel(const Mat& features, const Mat& labels,
                                       const TrainConfig& config) {
    const Index n = features.rows();
    if (n < 1) throw std::invalid_argument("train_multilabel: empty dataset");
    if (labels.rows() != n)
        throw std::invalid_argument("train_multilabel: feature/label row mismatch");
    if (config.batch_size < 1 || config.epochs < 0)
        throw std::invalid_argument("train_multilabel: bad config");
    check_binary_labels(labels);

    LinearMultiLabelModel model;
    model.weights = Mat::Zero(features.cols(), labels.cols());
    model.bias = Vec::Zero(labels.cols());
    model.trained_on.seed = config.seed;
    model.trained_on.epochs = config.epochs;

    optim::AdamW opt_weights(model.weights.rows(), model.weights.cols(), config.learning_rate,
                             config.weight_decay);
    optim::AdamW opt_bias(model.bias.size(), 1, config.learning_rate, config.weight_decay);

    Rng rng(config.seed);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Mat bias_mat(model.bias.size(), 1);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        for (Index start = 0; start < n; start += config.batch_size) {
            const Index size = std::min<Index>(config.batch_size, n - start);
            Mat x_batch(size, features.cols());
            Mat y_batch(size, labels.cols());
            for (Index b = 0; b < size; ++b) {
                const Index row = order[static_cast<std::size_t>(start + b)];
                x_batch.row(b) = features.row(row);
                y_batch.row(b) = labels.row(row);
            }
            const BceResult result =
                bce_loss_and_gradient(x_batch, y_batch, model.weights, model.bias);
            opt_weights.step(model.weights, result.grad_weights);
            bias_mat.col(0) = model.bias;
            opt_bias.step(bias_mat, result.grad_bias);
            model.bias = bias_mat.col(0);
        }
        model.trained_on.loss_curve.push_back(
            bce_loss_and_gradient(features, labels, model.weights, model.bias).loss);
    }
    return model;
}

Vec predict_tags(const LinearMultiLabelModel& model, const Vec& x) {
    if (x.size() != model.weights.rows())
        throw std::invalid_argument("predict_tags: feature dimension mismatch");
    const Vec logits = model.weights.transpose() * x + model.bias;
    Vec scores(logits.size());
    for (Index t = 0; t < logits.size(); ++t) scores(t) = sigmoid(logits(t));
    return scores;
}

Vec estimate_gif_tags(const Mat& frame_features, const LinearMultiLabelModel& model) {
    if (frame_features.rows() != 4)
        throw std::invalid_argument("estimate_gif_tags: expected 4 quartile frame rows");
    const Vec pooled = frame_features.colwise().mean().transpose();
    return predict_tags(model, pooled);
}

std::vector<std::string> select_by_tags(const Vec& query,
                                        const std::map<std::string, Vec>& gif_tag_vectors,
                                        int k) {
    if (gif_tag_vectors.empty())
        throw std::invalid_argument("select_by_tags: empty gif set");
    if (k < 1) throw std::invalid_argument("select_by_tags: k must be positive");

    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(gif_tag_vectors.size());
    for (const auto& [id, scores] : gif_tag_vectors) {
        if (scores.size() != query.size())
            throw std::invalid_argument("select_by_tags: vector length mismatch for " + id);
        scored.emplace_back((scores - query).squaredNorm(), &id);
    }
    const auto closer = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return *a.second < *b.second;
    };
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), closer);
    std::vector<std::string> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(*scored[i].second);
    return out;
}

double macro_f1(const Mat& scores, const Mat& labels, double threshold) {
    if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
        throw std::invalid_argument("macro_f1: shape mismatch");
    check_binary_labels(labels);

    double sum = 0.0;
    Index counted = 0;
    for (Index t = 0; t < scores.cols(); ++t) {
        long tp = 0, fp = 0, fn = 0;
        for (Index i = 0; i < scores.rows(); ++i) {
            const bool predicted = scores(i, t) > threshold;
            const bool actual = labels(i, t) == 1.0;
            if (predicted && actual) ++tp;
            else if (predicted) ++fp;
            else if (actual) ++fn;
        }
        if (tp == 0 && fp == 0 && fn == 0) continue; // tag absent on both sides
        ++counted;
        if (tp > 0) sum += 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    }
    return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

void write_model(std::ostream& out, const LinearMultiLabelModel& model) {
    io::write_magic(out, "PRWT");
    io::write_u32(out, static_cast<std::uint32_t>(model.weights.rows()));
    io::write_u32(out, static_cast<std::uint32_t>(model.weights.cols()));
    for (Index r = 0; r < model.weights.rows(); ++r)
        for (Index c = 0; c < model.weights.cols(); ++c)
            io::write_f64(out, model.weights(r, c));
    for (Index t = 0; t < model.bias.size(); ++t) io::write_f64(out, model.bias(t));
}

LinearMultiLabelModel read_model(std::istream& in) {
    io::expect_magic(in, "PRWT", "PRWT model");
    const std::uint32_t dim = io::read_u32(in);
    const std::uint32_t n_tags = io::read_u32(in);
    LinearMultiLabelModel model;
    model.weights.resize(dim, n_tags);
    model.bias.resize(n_tags);
    for (std::uint32_t r = 0; r < dim; ++r)
        for (std::uint32_t c = 0; c < n_tags; ++c)
            model.weights(r, c) = io::read_f64(in);
    for (std::uint32_t t = 0; t < n_tags; ++t) model.bias(t) = io::read_f64(in);
    return model;
}

void write_model_file(const std::string& path, const LinearMultiLabelModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    write_model(out, model);
}

LinearMultiLabelModel read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return read_model(in);
}

} // namespace prawn::tags
