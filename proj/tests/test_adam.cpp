#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ps2r/adam.hpp"
#include "ps2r/rng.hpp"

using namespace ps2r;

namespace {

// single-scalar harness: one 1x1 encoder layer, bias grad kept at zero
struct Scalar {
    ModelParams params;
    AdamState state;
    TrainConfig cfg;

    explicit Scalar(double theta0) {
        params.encoder.emplace_back(1, 1);
        params.encoder[0].W(0, 0) = theta0;
        state = AdamState::zeros_like(params);
        cfg.weight_decay = 0.0;
    }
    double step(int t, double g) {
        params.encoder[0].gW(0, 0) = g;
        adam_step(params, state, t, cfg);
        return params.encoder[0].W(0, 0);
    }
};

// Reference trace computed independently from the Adam recurrences
// (theta0 = 0.5, g_t = sin t, lr = 1e-3, betas 0.9/0.999, eps 1e-8).
constexpr double kTrace[20] = {
    0.49900000001188394, 0.497998731516691,   0.4971573782321023,  0.49687019895630385,
    0.49696740823746505, 0.49713277680721546, 0.4970914146930588,  0.4968284387741049,
    0.49650620036249704, 0.49634542710500307, 0.4964112556769192,  0.4965723653502775,
    0.4966356931882085,  0.4965128625441253,  0.4962916926956965,  0.49614245043145533,
    0.49617402584054277, 0.4963238342371671,  0.4964352635718506,  0.49638751288490107};

} // namespace

TEST_CASE("zero gradient with zero weight decay leaves the parameter unchanged") {
    Scalar s(0.5);
    for (int t = 1; t <= 5; ++t) CHECK(s.step(t, 0.0) == 0.5);
}

TEST_CASE("first-step magnitude is lr * |g| / (|g| + eps)") {
    Scalar s(0.5);
    const double g = 0.37;
    const double theta1 = s.step(1, g);
    const double expected = 0.5 - 1e-3 * g / (g + 1e-8);
    CHECK(theta1 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("20-step scalar trace matches the independent reference") {
    Scalar s(0.5);
    for (int t = 1; t <= 20; ++t) {
        const double theta = s.step(t, std::sin(double(t)));
        CHECK(theta == doctest::Approx(kTrace[t - 1]).epsilon(1e-12));
    }
}

TEST_CASE("weight decay adds an L2 pull before the moment updates") {
    // independent references at steps 5 and 20 for wd = 0.1
    Scalar s(0.5);
    s.cfg.weight_decay = 0.1;
    double theta = 0.5;
    for (int t = 1; t <= 20; ++t) {
        theta = s.step(t, std::sin(double(t)));
        if (t == 5) CHECK(theta == doctest::Approx(0.49682828831764825).epsilon(1e-12));
    }
    CHECK(theta == doctest::Approx(0.49524373014373196).epsilon(1e-12));
}

TEST_CASE("weight decay applies to biases as well") {
    ModelParams params;
    params.encoder.emplace_back(1, 1);
    params.encoder[0].W(0, 0) = 0.5;
    params.encoder[0].b(0) = 0.5;
    params.encoder[0].gW(0, 0) = 0.2;
    params.encoder[0].gb(0) = 0.2;
    AdamState state = AdamState::zeros_like(params);
    TrainConfig cfg;
    cfg.weight_decay = 0.3;
    adam_step(params, state, 1, cfg);
    CHECK(params.encoder[0].W(0, 0) == params.encoder[0].b(0));
    CHECK(params.encoder[0].W(0, 0) < 0.5);
}

TEST_CASE("identical tensors with identical gradients update identically") {
    ModelParams params;
    params.encoder.emplace_back(3, 2);
    params.encoder.emplace_back(3, 2);
    Rng rng(6);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double w = rng.uniform(-1.0, 1.0);
            const double g = rng.uniform(-1.0, 1.0);
            for (Dense* d : {&params.encoder[0], &params.encoder[1]}) {
                d->W(i, j) = w;
                d->gW(i, j) = g;
            }
        }
    AdamState state = AdamState::zeros_like(params);
    TrainConfig cfg;
    for (int t = 1; t <= 7; ++t) adam_step(params, state, t, cfg);
    CHECK((params.encoder[0].W.array() == params.encoder[1].W.array()).all());
}

TEST_CASE("non-finite gradients raise an error naming the tensor") {
    ModelParams params;
    params.encoder.emplace_back(1, 1);
    params.classifier.emplace_back(1, 1);
    params.classifier[0].gW(0, 0) = std::numeric_limits<double>::quiet_NaN();
    AdamState state = AdamState::zeros_like(params);
    TrainConfig cfg;
    try {
        adam_step(params, state, 1, cfg);
        FAIL("expected error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("cls.0.weight") != std::string::npos);
    }
}

TEST_CASE("adam_step validates the step index and state shape") {
    ModelParams params;
    params.encoder.emplace_back(1, 1);
    AdamState state = AdamState::zeros_like(params);
    TrainConfig cfg;
    CHECK_THROWS_AS(adam_step(params, state, 0, cfg), std::invalid_argument);
    AdamState wrong;
    CHECK_THROWS_AS(adam_step(params, wrong, 1, cfg), std::invalid_argument);
}
