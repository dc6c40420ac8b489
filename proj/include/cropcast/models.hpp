#ifndef CROPCAST_MODELS_HPP
#define CROPCAST_MODELS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "cropcast/features.hpp"

namespace cropcast {

enum class Solver { QuasiNewton, Adam };

struct TrainConfig {
    Solver solver = Solver::QuasiNewton;
    std::size_t max_iter = 200;     // quasi-Newton iterations or Adam steps (MLP)
    double tolerance = 1e-5;        // gradient infinity norm
    double learning_rate = 1e-3;    // Adam only
    std::size_t epochs = 200;       // LSTM full-batch epochs
    std::uint64_t seed = 0;

    void validate() const;
};

// ---------------------------------------------------------------- MLP

/// input -> hidden (ReLU) -> horizon (linear). Works on standardized targets;
/// predictions are mapped back with target_mean / target_scale.
struct MlpModel {
    Eigen::MatrixXd w1;  // hidden x input
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // horizon x hidden
    Eigen::VectorXd b2;
    double target_mean = 0.0;
    double target_scale = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> loss_history;
    std::size_t iterations = 0;
    bool converged = false;

    Eigen::Index input_width() const { return w1.cols(); }
    Eigen::Index hidden() const { return w1.rows(); }
    Eigen::Index horizon() const { return w2.rows(); }
    Eigen::Index parameter_count() const;
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p);
};

inline constexpr std::size_t kMlpHidden = 10;

/// Glorot-uniform weights, zero biases.
MlpModel mlp_init(Eigen::Index input_width, Eigen::Index horizon, std::uint64_t seed,
                  Eigen::Index hidden = kMlpHidden);

/// Half mean squared error over all target entries; `grad` may be null.
double mlp_loss(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                const Eigen::Ref<const Eigen::MatrixXd>& std_targets, Eigen::VectorXd* grad);

/// Deterministic in (data, cfg). Throws DomainError on non-finite data.
MlpModel mlp_train(const SupervisedSet& data, const TrainConfig& cfg);

/// Batch forward pass in standardized units.
Eigen::MatrixXd mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs);

/// Forecast in currency units. Throws ShapeError on a width mismatch.
Eigen::VectorXd mlp_predict(const MlpModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);

// ---------------------------------------------------------------- LSTM

/// Gate blocks stacked as [input, forget, cell, output].
struct LstmLayer {
    Eigen::MatrixXd w;  // 4u x input
    Eigen::MatrixXd u;  // 4u x u
    Eigen::VectorXd b;  // 4u
    Eigen::Index units() const { return u.cols(); }
};

/// Two stacked recurrent layers with sigmoid gates and ReLU cell/hidden
/// activations; a dense head reads the last hidden state of the second layer.
struct LstmModel {
    LstmLayer layer1;
    LstmLayer layer2;
    Eigen::MatrixXd head_w;  // horizon x units2
    Eigen::VectorXd head_b;
    Eigen::Index seq_len = 0;
    double target_mean = 0.0;
    double target_scale = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> loss_history;

    Eigen::Index input_width() const { return layer1.w.cols(); }
    Eigen::Index horizon() const { return head_w.rows(); }
    Eigen::Index parameter_count() const;
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p);
};

struct LstmShape {
    Eigen::Index units1 = 100;
    Eigen::Index units2 = 100;
};

/// Sequences for the recurrent model; each is seq_len x width, oldest first.
struct SequenceSet {
    std::vector<Eigen::MatrixXd> sequences;
    Eigen::MatrixXd targets;  // currency
    double target_mean = 0.0;
    double target_scale = 1.0;
};

SequenceSet make_sequence_set(const FeatureFrame& frame, std::size_t k, std::size_t horizon);

LstmModel lstm_init(Eigen::Index input_width, Eigen::Index seq_len, Eigen::Index horizon,
                    std::uint64_t seed, const LstmShape& shape = {});

double lstm_loss(const LstmModel& model, const std::vector<Eigen::MatrixXd>& sequences,
                 const Eigen::Ref<const Eigen::MatrixXd>& std_targets, Eigen::VectorXd* grad);

/// Adam, full batch, cfg.epochs epochs at cfg.learning_rate.
LstmModel lstm_train(const SequenceSet& data, const TrainConfig& cfg, const LstmShape& shape = {});

Eigen::MatrixXd lstm_forward(const LstmModel& model, const std::vector<Eigen::MatrixXd>& sequences);
Eigen::VectorXd lstm_predict(const LstmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& sequence);

// ---------------------------------------------------------------- gradient check

struct GradientCheck {
    double max_relative_error = 0.0;
    double gradient_norm = 0.0;
    std::size_t checked = 0;
};

inline constexpr Eigen::Index kGradientCheckMaxBatch = 8;

/// Central differences (step 1e-5) on a seeded subsample of parameters.
/// Relative error |a - n| / max(|a|, |n|, 1e-6).
GradientCheck gradient_check(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                             const Eigen::Ref<const Eigen::MatrixXd>& std_targets,
                             std::uint64_t seed, std::size_t samples = 64);
GradientCheck gradient_check(const LstmModel& model, const std::vector<Eigen::MatrixXd>& sequences,
                             const Eigen::Ref<const Eigen::MatrixXd>& std_targets,
                             std::uint64_t seed, std::size_t samples = 64);

// ---------------------------------------------------------------- AR baseline

/// Differenced autoregression: d in {0, 1} from the ADF test on the training
/// span, p in 1..max_order by minimum AIC over a common sample.
struct ArBaseline {
    int differencing = 0;
    std::size_t order = 1;
    Eigen::VectorXd coefficients;  // intercept, phi_1 .. phi_p
    double aic = 0.0;
};

inline constexpr std::size_t kArMinLength = 50;

ArBaseline ar_fit(const Eigen::Ref<const Eigen::VectorXd>& values, std::size_t max_order = 7);

/// Recursive multi-step forecast from the most recent values (oldest first).
Eigen::VectorXd ar_predict(const ArBaseline& model, const Eigen::Ref<const Eigen::VectorXd>& recent,
                           std::size_t horizon);

// ---------------------------------------------------------------- persistence

using Model = std::variant<MlpModel, LstmModel, ArBaseline>;

std::string model_type(const Model& model);

/// Free-form metadata stored next to the model (dates, metrics, ...).
using Manifest = std::map<std::string, std::string>;

/// Writes `<stem>.manifest` (key=value lines) and `<stem>.bin` (parameters as
/// little-endian float64). Loading restores bit-identical parameters.
void save_model(const std::filesystem::path& stem, const Model& model, const Manifest& extra = {});
Model load_model(const std::filesystem::path& stem, Manifest* manifest = nullptr);

Manifest read_manifest(const std::filesystem::path& file);
void write_manifest(const std::filesystem::path& file, const Manifest& manifest);

}  // namespace cropcast

#endif  // CROPCAST_MODELS_HPP
