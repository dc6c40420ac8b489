#include <cmath>

#include <gtest/gtest.h>

#include "cropcast/error.hpp"
#include "cropcast/lbfgs.hpp"
#include "cropcast/models.hpp"
#include "cropcast/rng.hpp"
#include "test_util.hpp"

using namespace cropcast;

namespace {

Eigen::MatrixXd uniform(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.uniform(lo, hi);
    return m;
}

SupervisedSet affine_task(Eigen::Index rows) {
    SupervisedSet s;
    s.inputs = uniform(rows, 4, 1, 0.5, 1.5);
    const Eigen::MatrixXd a = uniform(3, 4, 2, -1.0, 1.0);
    s.targets = (s.inputs * a.transpose()).rowwise() + Eigen::RowVector3d(0.3, -0.2, 0.1);
    return s;
}

std::vector<Eigen::MatrixXd> sequences(std::size_t n, Eigen::Index len, Eigen::Index width, std::uint64_t seed) {
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(uniform(len, width, derive_seed(seed, "seq", i), -1.0, 1.0));
    return out;
}

}  // namespace

TEST(Lbfgs, Rosenbrock) {
    const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        g.resize(2);
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    const LbfgsResult r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-5);
    EXPECT_NEAR(r.x[1], 1.0, 1e-5);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Lbfgs, Quadratic) {
    const Eigen::Vector3d c(1.0, -2.0, 3.0);
    const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * (x - c);
        return (x - c).squaredNorm();
    };
    const LbfgsResult r = minimize_lbfgs(f, Eigen::VectorXd::Zero(3));
    EXPECT_LT((r.x - c).norm(), 1e-6);
}

TEST(Mlp, GradientCheck) {
    const MlpModel m = mlp_init(12, 5, 3);
    const Eigen::MatrixXd x = uniform(8, 12, 4, -1, 1);
    const Eigen::MatrixXd y = uniform(8, 5, 5, -1, 1);
    const GradientCheck g = gradient_check(m, x, y, 6, 200);
    EXPECT_LT(g.max_relative_error, 1e-4);
    EXPECT_EQ(g.checked, static_cast<std::size_t>(m.parameter_count()));  // fewer than requested
    EXPECT_THROW(gradient_check(m, uniform(9, 12, 4, -1, 1), uniform(9, 5, 5, -1, 1), 6), DomainError);
}

TEST(Mlp, ZeroLossBatchHasZeroGradient) {
    const MlpModel m = mlp_init(6, 3, 7);
    const Eigen::MatrixXd x = uniform(5, 6, 8, -1, 1);
    const GradientCheck g = gradient_check(m, x, mlp_forward(m, x), 9);
    EXPECT_LT(g.gradient_norm, 1e-8);
}

TEST(Mlp, FitsAffineTask) {
    TrainConfig cfg;
    cfg.max_iter = 3000;
    cfg.tolerance = 1e-10;
    const MlpModel m = mlp_train(affine_task(200), cfg);
    EXPECT_LT(2.0 * m.loss_history.back(), 1e-6);
    for (std::size_t i = 1; i < m.loss_history.size(); ++i) EXPECT_LE(m.loss_history[i], m.loss_history[i - 1]);
}

TEST(Mlp, SingleRowAndDeterminism) {
    TrainConfig cfg;
    cfg.max_iter = 500;
    cfg.tolerance = 1e-12;
    const SupervisedSet one = affine_task(1);
    EXPECT_LT(2.0 * mlp_train(one, cfg).loss_history.back(), 1e-8);
    const SupervisedSet data = affine_task(50);
    const MlpModel a = mlp_train(data, cfg);
    const MlpModel b = mlp_train(data, cfg);
    EXPECT_TRUE(a.parameters() == b.parameters());
    cfg.seed = 99;
    EXPECT_FALSE(mlp_train(data, cfg).parameters() == a.parameters());
}

TEST(Mlp, AdamFallbackReducesLoss) {
    TrainConfig cfg;
    cfg.solver = Solver::Adam;
    cfg.max_iter = 300;
    cfg.learning_rate = 1e-2;
    const MlpModel m = mlp_train(affine_task(50), cfg);
    EXPECT_LT(m.loss_history.back(), 0.5 * m.loss_history.front());
}

TEST(Mlp, PredictShapesAndBias) {
    MlpModel m = mlp_init(4, 30, 1);
    m.w1.setZero();
    m.w2.setZero();
    m.b2 = Eigen::VectorXd::LinSpaced(30, -1, 1);
    m.target_mean = 100.0;
    m.target_scale = 10.0;
    const Eigen::VectorXd f = mlp_predict(m, Eigen::RowVector4d(1, 2, 3, 4));
    ASSERT_EQ(f.size(), 30);
    EXPECT_DOUBLE_EQ(f[0], 90.0);
    EXPECT_DOUBLE_EQ(f[29], 110.0);
    EXPECT_THROW(mlp_predict(m, Eigen::RowVector3d(1, 2, 3)), ShapeError);
}

TEST(Mlp, RejectsNonFinite) {
    SupervisedSet s = affine_task(10);
    s.inputs(2, 1) = kAbsent;
    EXPECT_THROW(mlp_train(s, TrainConfig{}), DomainError);
    TrainConfig bad;
    bad.max_iter = 0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Lstm, GradientCheck) {
    const LstmModel m = lstm_init(5, 4, 3, 11, LstmShape{6, 5});
    const auto x = sequences(4, 4, 5, 12);
    const Eigen::MatrixXd y = uniform(4, 3, 13, -1, 1);
    const GradientCheck g = gradient_check(m, x, y, 14, 200);
    EXPECT_LT(g.max_relative_error, 1e-3);
}

TEST(Lstm, DefaultShapeGradientCheck) {
    const LstmModel m = lstm_init(19, 7, 30, 21);
    EXPECT_EQ(m.layer1.units(), 100);
    EXPECT_EQ(m.layer2.units(), 100);
    const auto x = sequences(3, 7, 19, 22);
    const Eigen::MatrixXd y = uniform(3, 30, 23, -1, 1);
    EXPECT_LT(gradient_check(m, x, y, 24, 64).max_relative_error, 1e-3);
}

TEST(Lstm, ConstantTargetAndDeterminism) {
    SequenceSet data;
    data.sequences = sequences(20, 5, 3, 31);
    data.targets = Eigen::MatrixXd::Constant(20, 30, 110.0);
    data.target_mean = 100.0;
    data.target_scale = 10.0;
    TrainConfig cfg;
    cfg.seed = 5;
    const LstmShape shape{16, 16};
    const LstmModel m = lstm_train(data, cfg, shape);
    const Eigen::VectorXd f = lstm_predict(m, data.sequences[3]);
    ASSERT_EQ(f.size(), 30);
    EXPECT_LT((f.array() - 110.0).abs().maxCoeff(), 1.1);
    EXPECT_TRUE(lstm_train(data, cfg, shape).parameters() == m.parameters());
    EXPECT_THROW(lstm_predict(m, Eigen::MatrixXd::Zero(5, 4)), ShapeError);
}

TEST(ArBaseline, RecoversCoefficient) {
    Rng rng(77);
    Eigen::VectorXd x(1000);
    x[0] = 0.0;
    for (Eigen::Index t = 1; t < 1000; ++t) x[t] = 0.8 * x[t - 1] + rng.normal();
    const ArBaseline m = ar_fit(x, 1);
    EXPECT_EQ(m.differencing, 0);
    EXPECT_NEAR(m.coefficients[1], 0.8, 0.05);
    const ArBaseline sel = ar_fit(x);
    EXPECT_GE(sel.order, 1u);
    EXPECT_LE(sel.order, 7u);
}

TEST(ArBaseline, ConstantAndRandomWalk) {
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(80, 42.0);
    const Eigen::VectorXd f = ar_predict(ar_fit(c), c.tail(10), 30);
    EXPECT_EQ(f.size(), 30);
    EXPECT_LT((f.array() - 42.0).abs().maxCoeff(), 1e-9);
    const ArBaseline rw = ar_fit(test::random_walk(500, 8));
    EXPECT_EQ(rw.differencing, 1);
    EXPECT_TRUE(ar_predict(rw, test::random_walk(500, 8).tail(20), 30).allFinite());
    EXPECT_THROW(ar_fit(test::gaussian(49, 1)), InsufficientDataError);
}

TEST(ModelIo, RoundTripIsBitExact) {
    test::TempDir dir("model_io");
    MlpModel mlp = mlp_init(7, 30, 3);
    mlp.target_mean = 1234.5;
    mlp.target_scale = 0.1 + 1e-17;
    save_model(dir / "mlp", mlp, {{"trained_through", "2019-01-01"}});
    Manifest man;
    const Model back = load_model(dir / "mlp", &man);
    ASSERT_TRUE(std::holds_alternative<MlpModel>(back));
    const auto& m2 = std::get<MlpModel>(back);
    EXPECT_TRUE(m2.parameters() == mlp.parameters());
    EXPECT_EQ(m2.target_mean, mlp.target_mean);
    EXPECT_EQ(m2.target_scale, mlp.target_scale);
    EXPECT_EQ(man.at("type"), "mlp");
    EXPECT_EQ(man.at("trained_through"), "2019-01-01");

    const LstmModel lstm = lstm_init(4, 3, 5, 9, LstmShape{3, 2});
    save_model(dir / "lstm", lstm);
    const auto l2 = std::get<LstmModel>(load_model(dir / "lstm"));
    EXPECT_TRUE(l2.parameters() == lstm.parameters());
    EXPECT_EQ(l2.seq_len, 3);

    const ArBaseline ar = ar_fit(test::random_walk(300, 3));
    save_model(dir / "ar", ar);
    const auto a2 = std::get<ArBaseline>(load_model(dir / "ar"));
    EXPECT_TRUE(a2.coefficients == ar.coefficients);
    EXPECT_EQ(a2.order, ar.order);
    EXPECT_EQ(a2.differencing, ar.differencing);
}

TEST(ModelIo, ManifestErrors) {
    test::TempDir dir("manifest");
    test::write_text(dir / "a.manifest", "type=mlp\ntype=lstm\n");
    EXPECT_THROW(read_manifest(dir / "a.manifest"), DuplicateKeyError);
    test::write_text(dir / "b.manifest", "no equals sign\n");
    EXPECT_THROW(read_manifest(dir / "b.manifest"), ParseError);
    save_model(dir / "m", mlp_init(2, 2, 1));
    Manifest man = read_manifest(dir / "m.manifest");
    man["format_version"] = "99";
    write_manifest(dir / "m.manifest", man);
    EXPECT_THROW(load_model(dir / "m"), VersionError);
}
