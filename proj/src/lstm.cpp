#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "cropcast/error.hpp"
#include "cropcast/models.hpp"
#include "cropcast/rng.hpp"

namespace cropcast {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Steps = std::vector<MatrixXd>;  // one N x width matrix per time step

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Index layer_size(const LstmLayer& l) { return l.w.size() + l.u.size() + l.b.size(); }

void glorot_uniform(MatrixXd& w, Index fan_in, Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Index j = 0; j < w.cols(); ++j) {
        for (Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-limit, limit);
    }
}

MatrixXd orthogonal(Index n, Rng& rng) {
    MatrixXd a(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) a(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

LstmLayer init_layer(Index input, Index units, Rng& rng) {
    LstmLayer l;
    l.w.resize(4 * units, input);
    glorot_uniform(l.w, input, 4 * units, rng);
    l.u.resize(4 * units, units);
    for (Index g = 0; g < 4; ++g) l.u.middleRows(g * units, units) = orthogonal(units, rng);
    l.b = Eigen::VectorXd::Zero(4 * units);
    l.b.segment(units, units).setOnes();
    return l;
}

struct LayerTrace {
    Steps gates;  // activated [i, f, g, o]
    Steps cell;
    Steps hidden;
};

LayerTrace forward_layer(const LstmLayer& l, const Steps& xs) {
    const Index u = l.units();
    const Index n = xs.front().rows();
    LayerTrace tr;
    MatrixXd h = MatrixXd::Zero(n, u);
    MatrixXd c = MatrixXd::Zero(n, u);
    for (const MatrixXd& x : xs) {
        MatrixXd z = x * l.w.transpose() + h * l.u.transpose();
        z.rowwise() += l.b.transpose();
        z.leftCols(2 * u) = z.leftCols(2 * u).unaryExpr(&sigmoid);
        z.middleCols(2 * u, u) = z.middleCols(2 * u, u).cwiseMax(0.0);
        z.rightCols(u) = z.rightCols(u).unaryExpr(&sigmoid);
        c = z.middleCols(u, u).cwiseProduct(c) + z.leftCols(u).cwiseProduct(z.middleCols(2 * u, u));
        h = z.rightCols(u).cwiseProduct(c.cwiseMax(0.0));
        tr.gates.push_back(std::move(z));
        tr.cell.push_back(c);
        tr.hidden.push_back(h);
    }
    return tr;
}

/// Accumulates parameter gradients into `grad` (layout w, u, b) and returns
/// d loss / d input for every step.
Steps backward_layer(const LstmLayer& l, const Steps& xs, const LayerTrace& tr, const Steps& dh_out,
                     Eigen::Ref<Eigen::VectorXd> grad) {
    const Index u = l.units();
    const Index n = xs.front().rows();
    const auto steps = static_cast<Index>(xs.size());
    MatrixXd gw = MatrixXd::Zero(l.w.rows(), l.w.cols());
    MatrixXd gu = MatrixXd::Zero(l.u.rows(), l.u.cols());
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(l.b.size());
    Steps dxs(xs.size());
    MatrixXd dh_next = MatrixXd::Zero(n, u);
    MatrixXd dc_next = MatrixXd::Zero(n, u);
    MatrixXd dz(n, 4 * u);
    const MatrixXd zeros = MatrixXd::Zero(n, u);
    for (Index t = steps - 1; t >= 0; --t) {
        const auto ts = static_cast<std::size_t>(t);
        const MatrixXd& z = tr.gates[ts];
        const MatrixXd& c = tr.cell[ts];
        const MatrixXd& c_prev = t > 0 ? tr.cell[ts - 1] : zeros;
        const MatrixXd& h_prev = t > 0 ? tr.hidden[ts - 1] : zeros;
        const auto i = z.leftCols(u).array();
        const auto f = z.middleCols(u, u).array();
        const auto g = z.middleCols(2 * u, u).array();
        const auto o = z.rightCols(u).array();

        const Eigen::ArrayXXd dh = (dh_out[ts] + dh_next).array();
        const Eigen::ArrayXXd r = c.array().max(0.0);
        const Eigen::ArrayXXd dc = dh * o * (c.array() > 0.0).cast<double>() + dc_next.array();
        dz.leftCols(u) = (dc * g * i * (1.0 - i)).matrix();
        dz.middleCols(u, u) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
        dz.middleCols(2 * u, u) = (dc * i * (g > 0.0).cast<double>()).matrix();
        dz.rightCols(u) = (dh * r * o * (1.0 - o)).matrix();
        dc_next = (dc * f).matrix();

        gw.noalias() += dz.transpose() * xs[ts];
        gu.noalias() += dz.transpose() * h_prev;
        gb += dz.colwise().sum().transpose();
        dxs[ts] = dz * l.w;
        dh_next = dz * l.u;
    }
    grad.head(gw.size()) = gw.reshaped();
    grad.segment(gw.size(), gu.size()) = gu.reshaped();
    grad.tail(gb.size()) = gb;
    return dxs;
}

Steps to_steps(const LstmModel& m, const std::vector<MatrixXd>& sequences) {
    if (sequences.empty()) throw ShapeError("LSTM batch is empty");
    const auto n = static_cast<Index>(sequences.size());
    Steps xs(static_cast<std::size_t>(m.seq_len), MatrixXd(n, m.input_width()));
    for (Index r = 0; r < n; ++r) {
        const MatrixXd& s = sequences[static_cast<std::size_t>(r)];
        if (s.rows() != m.seq_len || s.cols() != m.input_width()) {
            throw ShapeError("sequence is " + std::to_string(s.rows()) + "x" + std::to_string(s.cols()) +
                             ", model expects " + std::to_string(m.seq_len) + "x" +
                             std::to_string(m.input_width()));
        }
        for (Index t = 0; t < m.seq_len; ++t) xs[static_cast<std::size_t>(t)].row(r) = s.row(t);
    }
    return xs;
}

MatrixXd head_output(const LstmModel& m, const MatrixXd& last) {
    MatrixXd y = last * m.head_w.transpose();
    y.rowwise() += m.head_b.transpose();
    return y;
}

void write_layer(const LstmLayer& l, Eigen::Ref<Eigen::VectorXd> p) {
    p.head(l.w.size()) = l.w.reshaped();
    p.segment(l.w.size(), l.u.size()) = l.u.reshaped();
    p.tail(l.b.size()) = l.b;
}

void read_layer(LstmLayer& l, const Eigen::Ref<const Eigen::VectorXd>& p) {
    l.w.reshaped() = p.head(l.w.size());
    l.u.reshaped() = p.segment(l.w.size(), l.u.size());
    l.b = p.tail(l.b.size());
}

}  // namespace

Index LstmModel::parameter_count() const {
    return layer_size(layer1) + layer_size(layer2) + head_w.size() + head_b.size();
}

Eigen::VectorXd LstmModel::parameters() const {
    Eigen::VectorXd p(parameter_count());
    const Index n1 = layer_size(layer1);
    const Index n2 = layer_size(layer2);
    write_layer(layer1, p.head(n1));
    write_layer(layer2, p.segment(n1, n2));
    p.segment(n1 + n2, head_w.size()) = head_w.reshaped();
    p.tail(head_b.size()) = head_b;
    return p;
}

void LstmModel::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p) {
    if (p.size() != parameter_count()) throw ShapeError("LSTM parameter vector has the wrong length");
    const Index n1 = layer_size(layer1);
    const Index n2 = layer_size(layer2);
    read_layer(layer1, p.head(n1));
    read_layer(layer2, p.segment(n1, n2));
    head_w.reshaped() = p.segment(n1 + n2, head_w.size());
    head_b = p.tail(head_b.size());
}

SequenceSet make_sequence_set(const FeatureFrame& frame, std::size_t k, std::size_t horizon) {
    const SupervisedSet flat = make_supervised(frame, k, horizon);
    SequenceSet s;
    s.targets = flat.targets;
    s.target_mean = flat.target_mean;
    s.target_scale = flat.target_scale;
    s.sequences.reserve(flat.issue_rows.size());
    for (std::size_t i : flat.issue_rows) s.sequences.push_back(make_sequence_input(frame, i, k));
    return s;
}

LstmModel lstm_init(Index input_width, Index seq_len, Index horizon, std::uint64_t seed,
                    const LstmShape& shape) {
    if (input_width < 1 || seq_len < 1 || horizon < 1 || shape.units1 < 1 || shape.units2 < 1) {
        throw ShapeError("LSTM dimensions must be >= 1");
    }
    Rng rng(derive_seed(seed, "lstm-init"));
    LstmModel m;
    m.seed = seed;
    m.seq_len = seq_len;
    m.layer1 = init_layer(input_width, shape.units1, rng);
    m.layer2 = init_layer(shape.units1, shape.units2, rng);
    m.head_w.resize(horizon, shape.units2);
    glorot_uniform(m.head_w, shape.units2, horizon, rng);
    m.head_b = Eigen::VectorXd::Zero(horizon);
    return m;
}

MatrixXd lstm_forward(const LstmModel& model, const std::vector<MatrixXd>& sequences) {
    const Steps xs = to_steps(model, sequences);
    const LayerTrace t1 = forward_layer(model.layer1, xs);
    const LayerTrace t2 = forward_layer(model.layer2, t1.hidden);
    return head_output(model, t2.hidden.back());
}

double lstm_loss(const LstmModel& model, const std::vector<MatrixXd>& sequences,
                 const Eigen::Ref<const MatrixXd>& std_targets, Eigen::VectorXd* grad) {
    const Steps xs = to_steps(model, sequences);
    if (std_targets.rows() != static_cast<Index>(sequences.size()) || std_targets.cols() != model.horizon()) {
        throw ShapeError("LSTM targets do not match the batch");
    }
    const LayerTrace t1 = forward_layer(model.layer1, xs);
    const LayerTrace t2 = forward_layer(model.layer2, t1.hidden);
    MatrixXd err = head_output(model, t2.hidden.back()) - std_targets;
    const double count = static_cast<double>(err.size());
    const double loss = 0.5 * err.squaredNorm() / count;
    if (grad == nullptr) return loss;

    err /= count;
    grad->resize(model.parameter_count());
    const Index n1 = layer_size(model.layer1);
    const Index n2 = layer_size(model.layer2);
    const MatrixXd g_head = err.transpose() * t2.hidden.back();
    grad->segment(n1 + n2, g_head.size()) = g_head.reshaped();
    grad->tail(model.head_b.size()) = err.colwise().sum().transpose();

    const Index n = err.rows();
    Steps dh2(xs.size(), MatrixXd::Zero(n, model.layer2.units()));
    dh2.back() = err * model.head_w;
    const Steps dh1 = backward_layer(model.layer2, t1.hidden, t2, dh2, grad->segment(n1, n2));
    backward_layer(model.layer1, xs, t1, dh1, grad->head(n1));
    return loss;
}

LstmModel lstm_train(const SequenceSet& data, const TrainConfig& cfg, const LstmShape& shape) {
    cfg.validate();
    if (data.sequences.empty()) throw InsufficientDataError("LSTM training needs at least one sequence");
    if (data.targets.rows() != static_cast<Index>(data.sequences.size())) {
        throw ShapeError("LSTM targets do not match the number of sequences");
    }
    if (!data.targets.allFinite()) throw DomainError("LSTM targets contain non-finite values");
    for (const MatrixXd& s : data.sequences) {
        if (!s.allFinite()) throw DomainError("LSTM inputs contain non-finite values");
    }
    if (!(data.target_scale > 0.0)) throw DomainError("target scale must be positive");

    const MatrixXd& first = data.sequences.front();
    LstmModel model = lstm_init(first.cols(), first.rows(), data.targets.cols(), cfg.seed, shape);
    model.target_mean = data.target_mean;
    model.target_scale = data.target_scale;
    const MatrixXd y = (data.targets.array() - data.target_mean) / data.target_scale;

    Eigen::VectorXd p = model.parameters();
    Eigen::VectorXd g(p.size());
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-7;
    for (std::size_t t = 1; t <= cfg.epochs; ++t) {
        model.loss_history.push_back(lstm_loss(model, data.sequences, y, &g));
        m1 = beta1 * m1 + (1.0 - beta1) * g;
        m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        p.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        model.set_parameters(p);
    }
    return model;
}

Eigen::VectorXd lstm_predict(const LstmModel& model, const Eigen::Ref<const MatrixXd>& sequence) {
    const MatrixXd z = lstm_forward(model, {MatrixXd(sequence)});
    return (z.row(0).transpose().array() * model.target_scale + model.target_mean).matrix();
}

GradientCheck gradient_check(const LstmModel& model, const std::vector<MatrixXd>& sequences,
                             const Eigen::Ref<const MatrixXd>& std_targets, std::uint64_t seed,
                             std::size_t samples) {
    if (static_cast<Index>(sequences.size()) > kGradientCheckMaxBatch) {
        throw DomainError("gradient check batch exceeds 8 rows");
    }
    Eigen::VectorXd analytic;
    lstm_loss(model, sequences, std_targets, &analytic);
    GradientCheck out;
    out.gradient_norm = analytic.norm();
    std::vector<Index> idx(static_cast<std::size_t>(analytic.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    Rng rng(derive_seed(seed, "gradient-check"));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    idx.resize(std::min(samples, idx.size()));

    LstmModel work = model;
    Eigen::VectorXd p = model.parameters();
    constexpr double h = 1e-5;
    for (Index j : idx) {
        const double saved = p[j];
        p[j] = saved + h;
        work.set_parameters(p);
        const double up = lstm_loss(work, sequences, std_targets, nullptr);
        p[j] = saved - h;
        work.set_parameters(p);
        const double down = lstm_loss(work, sequences, std_targets, nullptr);
        p[j] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[j];
        out.max_relative_error =
            std::max(out.max_relative_error, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6}));
        ++out.checked;
    }
    return out;
}

}  // namespace cropcast
