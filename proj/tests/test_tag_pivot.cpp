#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "prawn/rng.hpp"
#include "prawn/tag_pivot.hpp"

#include <cmath>
#include <sstream>

using namespace prawn;

namespace {

Mat random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
    return m;
}

Mat random_labels(Rng& rng, Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = static_cast<double>(rng.below(2));
    return m;
}

double scalar_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

TEST_CASE("bce gradient: zero feature moves only the bias") {
    const Mat x = Mat::Zero(1, 1);
    Mat y(1, 1);
    y(0, 0) = 1.0;
    const auto result = tags::bce_loss_and_gradient(x, y, Mat::Zero(1, 1), Vec::Zero(1));
    CHECK(result.grad_weights(0, 0) == 0.0);
    CHECK(result.grad_bias(0) == doctest::Approx(0.5 - 1.0)); // sigma(0) - y
}

TEST_CASE("bce gradient matches central finite differences") {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 1 + static_cast<Index>(rng.below(6));
        const Index dim = 1 + static_cast<Index>(rng.below(5));
        const Index n_tags = 1 + static_cast<Index>(rng.below(4));
        const Mat x = random_matrix(rng, n, dim);
        const Mat y = random_labels(rng, n, n_tags);
        Mat w = random_matrix(rng, dim, n_tags, 0.5);
        Vec b = random_matrix(rng, n_tags, 1, 0.5).col(0);

        const auto analytic = tags::bce_loss_and_gradient(x, y, w, b);
        const double eps = 1e-5;
        for (Index r = 0; r < dim; ++r)
            for (Index c = 0; c < n_tags; ++c) {
                const double fd = oracle::central_difference(
                    [&] { return tags::bce_loss_and_gradient(x, y, w, b).loss; },
                    [&](double d) { w(r, c) += d; }, eps);
                CHECK(oracle::relative_error(analytic.grad_weights(r, c), fd) < 1e-4);
            }
        for (Index t = 0; t < n_tags; ++t) {
            const double fd = oracle::central_difference(
                [&] { return tags::bce_loss_and_gradient(x, y, w, b).loss; },
                [&](double d) { b(t) += d; }, eps);
            CHECK(oracle::relative_error(analytic.grad_bias(t), fd) < 1e-4);
        }
    }
}

TEST_CASE("bce loss matches a scalar recomputation") {
    Rng rng(34);
    const Mat x = random_matrix(rng, 4, 3);
    const Mat y = random_labels(rng, 4, 2);
    const Mat w = random_matrix(rng, 3, 2);
    const Vec b = random_matrix(rng, 2, 1).col(0);
    const auto result = tags::bce_loss_and_gradient(x, y, w, b);

    double expected = 0.0;
    for (Index i = 0; i < 4; ++i)
        for (Index t = 0; t < 2; ++t) {
            double z = b(t);
            for (Index d = 0; d < 3; ++d) z += x(i, d) * w(d, t);
            const double p = scalar_sigmoid(z);
            expected -= y(i, t) * std::log(p) + (1.0 - y(i, t)) * std::log(1.0 - p);
        }
    expected /= 8.0;
    CHECK(result.loss == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("training loss is non-increasing on a convex full-batch instance") {
    Rng rng(35);
    const Mat x = random_matrix(rng, 16, 4);
    const Mat y = random_labels(rng, 16, 3);
    tags::TrainConfig config;
    config.learning_rate = 1e-3;
    config.epochs = 50;
    config.batch_size = 16; // full batch
    config.seed = 0;
    const auto model = tags::train_multilabel(x, y, config);
    REQUIRE(model.trained_on.loss_curve.size() == 50);
    for (std::size_t e = 1; e < model.trained_on.loss_curve.size(); ++e)
        CHECK(model.trained_on.loss_curve[e] <= model.trained_on.loss_curve[e - 1] + 1e-12);
}

TEST_CASE("separable two-tag toy set reaches macro F1 of 1") {
    Rng rng(36);
    Mat x(20, 2);
    Mat y(20, 2);
    for (Index i = 0; i < 20; ++i) {
        const bool first = i < 10;
        x(i, 0) = (first ? 1.0 : -1.0) + 0.1 * rng.normal();
        x(i, 1) = (first ? -1.0 : 1.0) + 0.1 * rng.normal();
        y(i, 0) = first ? 1.0 : 0.0;
        y(i, 1) = first ? 0.0 : 1.0;
    }
    tags::TrainConfig config;
    config.learning_rate = 0.1;
    config.epochs = 500;
    config.batch_size = 20;
    config.seed = 7;
    const auto model = tags::train_multilabel(x, y, config);

    Mat scores(20, 2);
    for (Index i = 0; i < 20; ++i)
        scores.row(i) = tags::predict_tags(model, x.row(i).transpose()).transpose();
    CHECK(tags::macro_f1(scores, y) == doctest::Approx(1.0));
}

TEST_CASE("lr zero leaves parameters unchanged") {
    Rng rng(37);
    const Mat x = random_matrix(rng, 8, 3);
    const Mat y = random_labels(rng, 8, 2);
    tags::TrainConfig config;
    config.learning_rate = 0.0;
    config.epochs = 3;
    const auto model = tags::train_multilabel(x, y, config);
    CHECK(model.weights.isZero(0.0));
    CHECK(model.bias.isZero(0.0));
}

TEST_CASE("predict_tags") {
    tags::LinearMultiLabelModel model;
    model.weights = Mat::Zero(3, 2);
    model.bias = Vec::Zero(2);

    SUBCASE("zero model gives 0.5 everywhere") {
        const Vec scores = tags::predict_tags(model, Vec::Ones(3));
        CHECK(scores(0) == doctest::Approx(0.5));
        CHECK(scores(1) == doctest::Approx(0.5));
    }
    SUBCASE("large bias saturates") {
        model.bias(0) = 100.0;
        const Vec scores = tags::predict_tags(model, Vec::Zero(3));
        CHECK(scores(0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("random model matches scalar recomputation") {
        Rng rng(38);
        model.weights = random_matrix(rng, 3, 2);
        model.bias = random_matrix(rng, 2, 1).col(0);
        const Vec x = random_matrix(rng, 3, 1).col(0);
        const Vec scores = tags::predict_tags(model, x);
        for (Index t = 0; t < 2; ++t) {
            double z = model.bias(t);
            for (Index d = 0; d < 3; ++d) z += x(d) * model.weights(d, t);
            CHECK(std::abs(scores(t) - scalar_sigmoid(z)) < 1e-12);
        }
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(tags::predict_tags(model, Vec::Ones(4)), std::invalid_argument);
    }
}

TEST_CASE("estimate_gif_tags pools the four quartile frames") {
    Rng rng(39);
    tags::LinearMultiLabelModel model;
    model.weights = random_matrix(rng, 4, 3);
    model.bias = random_matrix(rng, 3, 1).col(0);

    SUBCASE("identical rows equal single-row prediction") {
        const Vec row = random_matrix(rng, 4, 1).col(0);
        Mat frames(4, 4);
        for (int i = 0; i < 4; ++i) frames.row(i) = row.transpose();
        CHECK((tags::estimate_gif_tags(frames, model) - tags::predict_tags(model, row)).norm() <
              1e-12);
    }
    SUBCASE("alternating rows cancel to the bias") {
        const Vec row = random_matrix(rng, 4, 1).col(0);
        Mat frames(4, 4);
        frames.row(0) = row.transpose();
        frames.row(1) = -row.transpose();
        frames.row(2) = row.transpose();
        frames.row(3) = -row.transpose();
        const Vec scores = tags::estimate_gif_tags(frames, model);
        for (Index t = 0; t < 3; ++t)
            CHECK(scores(t) == doctest::Approx(scalar_sigmoid(model.bias(t))).epsilon(1e-12));
    }
    SUBCASE("wrong frame count rejected") {
        CHECK_THROWS_AS(tags::estimate_gif_tags(Mat::Zero(3, 4), model), std::invalid_argument);
    }
}

TEST_CASE("select_by_tags") {
    SUBCASE("exact vector comes first at distance zero") {
        std::map<std::string, Vec> gifs;
        gifs["a"] = Vec::Zero(2);
        gifs["b"] = Vec::Ones(2);
        const auto top = tags::select_by_tags(Vec::Ones(2), gifs, 2);
        CHECK(top == std::vector<std::string>{"b", "a"});
    }
    SUBCASE("euclidean ordering") {
        std::map<std::string, Vec> gifs;
        Vec a(2), b(2), query(2);
        a << 0.9, 0.1;
        b << 0.1, 0.9;
        query << 1.0, 0.0;
        gifs["A"] = a;
        gifs["B"] = b;
        CHECK(tags::select_by_tags(query, gifs, 2) == std::vector<std::string>{"A", "B"});
    }
    SUBCASE("equal distances break by id") {
        std::map<std::string, Vec> gifs;
        Vec up(2), down(2);
        up << 0.5, 1.0;
        down << 0.5, 0.0;
        gifs["zeta"] = up;
        gifs["alpha"] = down;
        Vec query(2);
        query << 0.5, 0.5;
        CHECK(tags::select_by_tags(query, gifs, 2) ==
              std::vector<std::string>{"alpha", "zeta"});
    }
    SUBCASE("ordering is invariant under a common translation") {
        Rng rng(40);
        std::map<std::string, Vec> gifs;
        for (int g = 0; g < 12; ++g)
            gifs["g" + std::to_string(g)] = random_matrix(rng, 5, 1).col(0);
        const Vec query = random_matrix(rng, 5, 1).col(0);
        const auto base = tags::select_by_tags(query, gifs, 12);

        const Vec offset = Vec::Constant(5, 3.25);
        std::map<std::string, Vec> shifted;
        for (const auto& [id, v] : gifs) shifted[id] = v + offset;
        CHECK(tags::select_by_tags(query + offset, shifted, 12) == base);
    }
    SUBCASE("empty set rejected") {
        CHECK_THROWS_AS(tags::select_by_tags(Vec::Ones(2), {}, 1), std::invalid_argument);
    }
}

TEST_CASE("macro_f1 hand cases") {
    SUBCASE("perfect predictions give 1") {
        Mat labels(3, 2);
        labels << 1, 0, 0, 1, 1, 1;
        Mat scores(3, 2);
        scores << 0.9, 0.1, 0.2, 0.8, 0.7, 0.6;
        CHECK(tags::macro_f1(scores, labels) == doctest::Approx(1.0));
    }
    SUBCASE("all-zero predictions on data with positives give 0") {
        Mat labels(3, 2);
        labels << 1, 0, 1, 1, 0, 1;
        const Mat scores = Mat::Zero(3, 2);
        CHECK(tags::macro_f1(scores, labels) == doctest::Approx(0.0));
    }
    SUBCASE("two tags with one error each give 2/3") {
        // tag 0: TP=1 FP=1 FN=0; tag 1: TP=1 FP=0 FN=1
        Mat labels(2, 2);
        labels << 1, 1, 0, 1;
        Mat scores(2, 2);
        scores << 0.9, 0.9, 0.9, 0.1;
        CHECK(tags::macro_f1(scores, labels) == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("tags absent on both sides are skipped") {
        Mat labels(2, 2);
        labels << 1, 0, 1, 0;
        Mat scores(2, 2);
        scores << 0.9, 0.1, 0.9, 0.1;
        CHECK(tags::macro_f1(scores, labels) == doctest::Approx(1.0));
    }
}

TEST_CASE("scores are strictly monotone in bias per coordinate") {
    Rng rng(41);
    tags::LinearMultiLabelModel model;
    model.weights = random_matrix(rng, 3, 2);
    model.bias = Vec::Zero(2);
    const Vec x = random_matrix(rng, 3, 1).col(0);
    const double before = tags::predict_tags(model, x)(0);
    model.bias(0) += 0.5;
    CHECK(tags::predict_tags(model, x)(0) > before);
}

TEST_CASE("gradient is a descent direction") {
    Rng rng(42);
    const Mat x = random_matrix(rng, 10, 4);
    const Mat y = random_labels(rng, 10, 3);
    Mat w = random_matrix(rng, 4, 3, 0.3);
    Vec b = random_matrix(rng, 3, 1, 0.3).col(0);
    const auto at_start = tags::bce_loss_and_gradient(x, y, w, b);
    const double grad_sq =
        at_start.grad_weights.squaredNorm() + at_start.grad_bias.squaredNorm();

    const double lr = 1e-6;
    const Mat w2 = w - lr * at_start.grad_weights;
    const Vec b2 = b - lr * at_start.grad_bias;
    const double after = tags::bce_loss_and_gradient(x, y, w2, b2).loss;
    CHECK(oracle::relative_error(at_start.loss - after, lr * grad_sq) < 1e-3);
}

TEST_CASE("model file round trip") {
    Rng rng(43);
    tags::LinearMultiLabelModel model;
    model.weights = random_matrix(rng, 5, 3);
    model.bias = random_matrix(rng, 3, 1).col(0);

    std::stringstream buffer;
    tags::write_model(buffer, model);
    const auto loaded = tags::read_model(buffer);
    CHECK((loaded.weights - model.weights).norm() == 0.0);
    CHECK((loaded.bias - model.bias).norm() == 0.0);

    std::stringstream bad("XXXX");
    CHECK_THROWS(tags::read_model(bad));
}
