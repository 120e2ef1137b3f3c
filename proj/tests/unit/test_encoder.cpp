#include "pcc/checkpoint.hpp"
#include "pcc/encoder.hpp"
#include "pcc/errors.hpp"
#include "pcc/rng.hpp"
#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

using namespace pcc;

TEST_SUITE("encoder") {

TEST_CASE("initialisation follows fan-in bounds with zero biases") {
    const auto p = init_encoder(EncoderShape{}, 5);
    CHECK(p.theta.size() == EncoderShape{}.parameter_count());
    CHECK(p.step == 0);
    CHECK(p.seed == 5);
    CHECK(p.b1().isZero(0.0));
    CHECK(p.b2().isZero(0.0));
    CHECK(p.w1().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
    CHECK(p.w2().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(64.0));
    CHECK(p.adam_m.isZero(0.0));
    CHECK(p.adam_v.isZero(0.0));
    CHECK(init_encoder(EncoderShape{}, 5).theta == p.theta);
    CHECK(init_encoder(EncoderShape{}, 6).theta != p.theta);
}

TEST_CASE("zero weights return the output bias") {
    auto p = init_encoder(EncoderShape{4, 5, 3}, 1);
    p.theta.setZero();
    p.b2() << 0.5, -1.0, 2.0;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 4);
    const auto e = encode(p, x);
    for (Eigen::Index r = 0; r < e.rows(); ++r) CHECK(e.row(r) == p.b2().transpose());
}

TEST_CASE("encode matches a per-row reference and validates dimensions") {
    const auto p = init_encoder(EncoderShape{6, 7, 5}, 2);
    Rng rng(3);
    Eigen::MatrixXd x(4, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto e = encode(p, x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Eigen::VectorXd h = (p.w1() * x.row(r).transpose() + p.b1()).array().tanh();
        const Eigen::VectorXd y = p.w2() * h + p.b2();
        CHECK((e.row(r).transpose() - y).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(encode(p, x) == e);
    CHECK_THROWS_AS(encode(p, Eigen::MatrixXd::Zero(2, 5)), InvalidInput);
}

TEST_CASE("end-to-end contrastive gradients match finite differences") {
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        CHECK(gradcheck::contrastive_trial(trial, trial % 2 == 0, EncoderShape{8, 6, 5}) < 1e-4);
    }
}

TEST_CASE("end-to-end pearson gradients match finite differences") {
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        CHECK(gradcheck::pearson_trial(trial, EncoderShape{8, 6, 5}) < 1e-4);
    }
}

TEST_CASE("zero gradient leaves parameters and advances the step") {
    auto p = init_encoder(EncoderShape{3, 4, 2}, 1);
    const Eigen::VectorXd before = p.theta;
    apply_gradients(p, Eigen::VectorXd::Zero(p.theta.size()), 0.1);
    CHECK(p.theta == before);
    CHECK(p.step == 1);
}

TEST_CASE("constant gradient moves against its sign") {
    auto p = init_encoder(EncoderShape{1, 1, 1}, 1);
    const Eigen::VectorXd start = p.theta;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p.theta.size());
    g[0] = 2.0;
    g[1] = -3.0;
    for (int i = 0; i < 50; ++i) apply_gradients(p, g, 0.01);
    CHECK(p.theta[0] < start[0]);
    CHECK(p.theta[1] > start[1]);
    CHECK(p.step == 50);
}

TEST_CASE("adam minimises a quadratic bowl") {
    auto p = init_encoder(EncoderShape{2, 3, 2}, 9);
    Rng rng(10);
    Eigen::VectorXd centre(p.theta.size());
    Eigen::VectorXd curvature(p.theta.size());
    for (Eigen::Index i = 0; i < centre.size(); ++i) {
        centre[i] = rng.uniform(-0.5, 0.5);
        curvature[i] = rng.uniform(0.5, 2.0);
    }
    const auto loss = [&] { return 0.5 * (curvature.array() * (p.theta - centre).array().square()).sum(); };
    for (int i = 0; i < 500; ++i) {
        const Eigen::VectorXd grad = curvature.array() * (p.theta - centre).array();
        apply_gradients(p, grad, 1e-2);
    }
    CHECK(loss() < 1e-6);
}

TEST_CASE("non-finite gradients abort training") {
    auto p = init_encoder(EncoderShape{2, 2, 2}, 1);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p.theta.size());
    g[3] = std::nan("");
    CHECK_THROWS_AS(apply_gradients(p, g, 0.1), TrainingDiverged);
    CHECK_THROWS_AS(apply_gradients(p, Eigen::VectorXd::Zero(3), 0.1), InvalidInput);
}

TEST_CASE("checkpoint round trip is bit exact") {
    auto p = init_encoder(EncoderShape{5, 4, 3}, 77);
    Rng rng(4);
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd g(p.theta.size());
        for (Eigen::Index j = 0; j < g.size(); ++j) g[j] = rng.normal();
        apply_gradients(p, g, 0.01);
    }
    const auto bytes = save_checkpoint(p);
    const auto q = load_checkpoint(bytes);
    CHECK(q.shape == p.shape);
    CHECK(q.seed == 77);
    CHECK(q.step == 3);
    CHECK(std::memcmp(q.theta.data(), p.theta.data(), sizeof(double) * p.theta.size()) == 0);
    CHECK(q.adam_m == p.adam_m);
    CHECK(q.adam_v == p.adam_v);
    CHECK(save_checkpoint(q) == bytes);
    CHECK(checkpoint_id(q) == checkpoint_id(p));

    const auto path = std::filesystem::temp_directory_path() / "pcc_test_checkpoint.bin";
    write_checkpoint_file(path, p);
    CHECK(save_checkpoint(read_checkpoint_file(path)) == bytes);
    std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const auto bytes = save_checkpoint(init_encoder(EncoderShape{3, 3, 3}, 1));

    auto truncated = bytes;
    truncated.resize(bytes.size() - 9);
    CHECK_THROWS_AS(load_checkpoint(truncated), CheckpointError);

    auto flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x10;
    CHECK_THROWS_AS(load_checkpoint(flipped), CheckpointError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(load_checkpoint(bad_magic), CheckpointError);

    auto bad_version = bytes;
    bad_version[8] = 2;
    CHECK_THROWS_AS(load_checkpoint(bad_version), CheckpointError);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(load_checkpoint(trailing), CheckpointError);

    CHECK_THROWS_AS(read_checkpoint_file("/nonexistent/pcc.bin"), CheckpointError);
}

}
