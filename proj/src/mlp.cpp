#include <algorithm>
#include <cmath>
#include <numeric>

#include "cropcast/error.hpp"
#include "cropcast/lbfgs.hpp"
#include "cropcast/models.hpp"
#include "cropcast/rng.hpp"

namespace cropcast {

void TrainConfig::validate() const {
    if (max_iter < 1) throw ValidationError("train config: max_iter must be >= 1");
    if (!(tolerance > 0.0)) throw ValidationError("train config: tolerance must be > 0");
    if (!(learning_rate > 0.0)) throw ValidationError("train config: learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("train config: epochs must be >= 1");
}

namespace {

void glorot_uniform(Eigen::MatrixXd& w, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
    }
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    if (!m.allFinite()) throw DomainError(std::string(what) + " contain non-finite values");
}

}  // namespace

Eigen::Index MlpModel::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

Eigen::VectorXd MlpModel::parameters() const {
    Eigen::VectorXd p(parameter_count());
    p << w1.reshaped(), b1, w2.reshaped(), b2;
    return p;
}

void MlpModel::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != parameter_count()) throw ShapeError("MLP parameter vector has the wrong length");
    Eigen::Index o = 0;
    w1.reshaped() = p.segment(o, w1.size());
    o += w1.size();
    b1 = p.segment(o, b1.size());
    o += b1.size();
    w2.reshaped() = p.segment(o, w2.size());
    o += w2.size();
    b2 = p.segment(o, b2.size());
}

MlpModel mlp_init(Eigen::Index input_width, Eigen::Index horizon, std::uint64_t seed,
                  Eigen::Index hidden) {
    if (input_width < 1 || horizon < 1 || hidden < 1) throw ShapeError("MLP dimensions must be >= 1");
    Rng rng(derive_seed(seed, "mlp-init"));
    MlpModel m;
    m.seed = seed;
    m.w1.resize(hidden, input_width);
    m.w2.resize(horizon, hidden);
    glorot_uniform(m.w1, rng);
    glorot_uniform(m.w2, rng);
    m.b1 = Eigen::VectorXd::Zero(hidden);
    m.b2 = Eigen::VectorXd::Zero(horizon);
    return m;
}

Eigen::MatrixXd mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
    if (inputs.cols() != model.input_width()) {
        throw ShapeError("input width " + std::to_string(inputs.cols()) + " != model width " +
                         std::to_string(model.input_width()));
    }
    const Eigen::MatrixXd hidden =
        ((inputs * model.w1.transpose()).rowwise() + model.b1.transpose()).cwiseMax(0.0);
    return (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();
}

double mlp_loss(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                const Eigen::Ref<const Eigen::MatrixXd>& std_targets, Eigen::VectorXd* grad) {
    if (inputs.rows() != std_targets.rows() || std_targets.cols() != model.horizon()) {
        throw ShapeError("MLP batch shapes do not match the model");
    }
    const Eigen::MatrixXd pre = (inputs * model.w1.transpose()).rowwise() + model.b1.transpose();
    const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
    Eigen::MatrixXd err = (hidden * model.w2.transpose()).rowwise() + model.b2.transpose();
    err -= std_targets;
    const double count = static_cast<double>(err.size());
    const double loss = 0.5 * err.squaredNorm() / count;
    if (grad == nullptr) return loss;

    err /= count;  // d loss / d output
    grad->resize(model.parameter_count());
    Eigen::Index o = model.w1.size() + model.b1.size();
    const Eigen::MatrixXd g_w2 = err.transpose() * hidden;
    grad->segment(o, g_w2.size()) = g_w2.reshaped();
    o += g_w2.size();
    grad->segment(o, model.b2.size()) = err.colwise().sum().transpose();
    const Eigen::MatrixXd d_hidden =
        (err * model.w2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    const Eigen::MatrixXd g_w1 = d_hidden.transpose() * inputs;
    grad->head(g_w1.size()) = g_w1.reshaped();
    grad->segment(g_w1.size(), model.b1.size()) = d_hidden.colwise().sum().transpose();
    return loss;
}

MlpModel mlp_train(const SupervisedSet& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.rows() < 1) throw InsufficientDataError("MLP training needs at least one row");
    require_finite(data.inputs, "MLP inputs");
    require_finite(data.targets, "MLP targets");
    if (!(data.target_scale > 0.0)) throw DomainError("target scale must be positive");

    const Eigen::MatrixXd y = (data.targets.array() - data.target_mean) / data.target_scale;
    MlpModel model = mlp_init(data.inputs.cols(), data.targets.cols(), cfg.seed);
    model.target_mean = data.target_mean;
    model.target_scale = data.target_scale;

    MlpModel work = model;
    if (cfg.solver == Solver::QuasiNewton) {
        const Objective objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
            work.set_parameters(p);
            return mlp_loss(work, data.inputs, y, &g);
        };
        LbfgsOptions opt;
        opt.max_iter = cfg.max_iter;
        opt.gradient_tolerance = cfg.tolerance;
        const LbfgsResult res = minimize_lbfgs(objective, model.parameters(), opt);
        model.set_parameters(res.x);
        model.loss_history = res.history;
        model.iterations = res.iterations;
        model.converged = res.converged;
        return model;
    }

    // Adam, full batch.
    Eigen::VectorXd p = model.parameters();
    Eigen::VectorXd g(p.size());
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (std::size_t t = 1; t <= cfg.max_iter; ++t) {
        work.set_parameters(p);
        model.loss_history.push_back(mlp_loss(work, data.inputs, y, &g));
        if (g.lpNorm<Eigen::Infinity>() <= cfg.tolerance) {
            model.converged = true;
            break;
        }
        m1 = beta1 * m1 + (1.0 - beta1) * g;
        m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        p.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        model.iterations = t;
    }
    model.set_parameters(p);
    return model;
}

Eigen::VectorXd mlp_predict(const MlpModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const Eigen::MatrixXd z = mlp_forward(model, x);
    return (z.row(0).transpose().array() * model.target_scale + model.target_mean).matrix();
}

namespace {

template <typename Loss>
GradientCheck finite_difference_check(Eigen::VectorXd params, const Loss& loss,
                                      const Eigen::VectorXd& analytic, std::uint64_t seed,
                                      std::size_t samples) {
    GradientCheck out;
    out.gradient_norm = analytic.norm();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(params.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng(derive_seed(seed, "gradient-check"));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    idx.resize(std::min(samples, idx.size()));
    constexpr double h = 1e-5;
    for (Eigen::Index j : idx) {
        const double saved = params[j];
        params[j] = saved + h;
        const double up = loss(params);
        params[j] = saved - h;
        const double down = loss(params);
        params[j] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[j];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.checked;
    }
    return out;
}

}  // namespace

GradientCheck gradient_check(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                             const Eigen::Ref<const Eigen::MatrixXd>& std_targets,
                             std::uint64_t seed, std::size_t samples) {
    if (inputs.rows() > kGradientCheckMaxBatch) throw DomainError("gradient check batch exceeds 8 rows");
    Eigen::VectorXd analytic;
    mlp_loss(model, inputs, std_targets, &analytic);
    MlpModel work = model;
    auto loss = [&](const Eigen::VectorXd& p) {
        work.set_parameters(p);
        return mlp_loss(work, inputs, std_targets, nullptr);
    };
    return finite_difference_check(model.parameters(), loss, analytic, seed, samples);
}

}  // namespace cropcast
