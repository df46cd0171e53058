#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "actionimg/mapping.hpp"

namespace actionimg {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ------------------------------------------------------------------ config

/// 3x3 convolution with zero padding 1, followed by max(0, .) and an
/// optional 2x2 max pool.
struct ConvBlockConfig {
    int out_channels = 16;
    int stride = 1;
    bool pool = true;
};

struct TrunkConfig {
    std::vector<ConvBlockConfig> blocks;
    /// Four blocks with 16, 32, 64, 64 channels; pools after the first three.
    static TrunkConfig desk_default();
    int out_channels() const { return blocks.empty() ? 3 : blocks.back().out_channels; }
    /// Spatial side length after the trunk for a square input of `size`.
    int output_size(int size) const;
};

/// How the extra head combines the per-scale outputs.
enum class AverageMode { Logits, Probabilities };

struct NetConfig {
    TrunkConfig trunk = TrunkConfig::desk_default();
    std::vector<int> scales{64, 48, 32};
    int class_count = 2;
    bool shared_classifier = true;
    AverageMode average = AverageMode::Logits;

    /// Throws ConfigError on empty trunk, strides < 1, a scale that collapses
    /// to nothing, or fewer than two classes.
    void validate() const;
};

// ------------------------------------------------------------------ softmax

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    using S = typename Derived::Scalar;
    const S shift = logits.maxCoeff();
    Vector<S> p = (logits.array() - shift).exp().matrix();
    return p / p.sum();
}

template <typename Scalar>
struct HeadLoss {
    Scalar loss;
    Vector<Scalar> probabilities;
    Vector<Scalar> gradient;  // d(-log p_k)/d logits = p - onehot(k)
};

/// -log softmax(logits)[label] via log-sum-exp.
template <typename Derived>
HeadLoss<typename Derived::Scalar> cross_entropy(const Eigen::MatrixBase<Derived>& logits, int label) {
    using S = typename Derived::Scalar;
    const S shift = logits.maxCoeff();
    const S lse = shift + std::log((logits.array() - shift).exp().sum());
    HeadLoss<S> out{lse - logits(label), softmax(logits), {}};
    out.gradient = out.probabilities;
    out.gradient(label) -= S(1);
    return out;
}

// ------------------------------------------------------------------ network

template <typename Scalar>
struct NetOutput {
    std::vector<Vector<Scalar>> scale_logits;
    Vector<Scalar> averaged_logits;
    /// Class probabilities of the combined head.
    Vector<Scalar> probabilities;
};

struct Prediction {
    int label = 0;
    Eigen::VectorXd probabilities;
};

/// Contiguous slice of the parameter vector belonging to one layer.
struct ParameterSegment {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
};

/// One fully convolutional trunk and one classifier applied to every input
/// scale. All weights live in a single flat vector; layers are views into it.
template <typename Scalar>
class MultiScaleNet {
public:
    /// Fan-in scaled Gaussian weights, zero biases.
    MultiScaleNet(NetConfig config, std::uint64_t seed);
    MultiScaleNet(NetConfig config, Vector<Scalar> parameters);

    const NetConfig& config() const { return config_; }
    const Vector<Scalar>& parameters() const { return params_; }
    Vector<Scalar>& parameters() { return params_; }
    const std::vector<ParameterSegment>& segments() const { return segments_; }
    Eigen::Index parameter_count() const { return params_.size(); }

    /// Resizes `image` to every configured scale.
    std::vector<Image<Scalar>> prepare(const ActionImage& image) const;

    NetOutput<Scalar> forward(const ActionImage& image) const;
    NetOutput<Scalar> forward(std::span<const Image<Scalar>> inputs) const;

    /// Pooled trunk features (length C) for one input.
    Vector<Scalar> features(const Image<Scalar>& input) const;

    /// Mean cross-entropy over the S per-scale heads and the combined head.
    /// When `gradient` is non-null the parameter gradient is added to it.
    Scalar loss(std::span<const Image<Scalar>> inputs, int label,
                Vector<Scalar>* gradient = nullptr, NetOutput<Scalar>* output = nullptr) const;

    Prediction predict(const ActionImage& image) const;
    Prediction predict(std::span<const Image<Scalar>> inputs) const;

    /// Hash of every ReLU sign and max-pool winner over all scales. Equal
    /// signatures mean the same linear piece of the network.
    std::uint64_t activation_signature(std::span<const Image<Scalar>> inputs) const;

private:
    struct BlockView {
        Eigen::Index weight_offset;
        Eigen::Index bias_offset;
        int in_channels;
        int out_channels;
        int stride;
        bool pool;
    };
    struct ClassifierView {
        Eigen::Index weight_offset;
        Eigen::Index bias_offset;
    };
    struct Trace;

    void build_layout();
    Vector<Scalar> run_trunk(const Image<Scalar>& input, Trace* trace) const;
    Vector<Scalar> classify(const Vector<Scalar>& features, std::size_t scale) const;
    void backward(const Trace& trace, const Vector<Scalar>& dlogits, std::size_t scale,
                  Vector<Scalar>& gradient) const;
    const ClassifierView& classifier(std::size_t scale) const;

    NetConfig config_;
    Vector<Scalar> params_;
    std::vector<BlockView> blocks_;
    std::vector<ClassifierView> classifiers_;
    std::vector<ParameterSegment> segments_;
};

/// Index of the largest probability; ties go to the lowest index.
template <typename Derived>
int argmax_lowest(const Eigen::MatrixBase<Derived>& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = static_cast<int>(i);
    return best;
}

// ------------------------------------------------------------------ training

/// Momentum SGD with L2 weight decay and a step learning-rate schedule:
/// `learning_rate` for the first `hold_epochs` epochs, then divided by
/// `step_factor` every `step_epochs` epochs.
struct OptimizerConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    double weight_decay = 0.0004;
    int hold_epochs = 8;
    int step_epochs = 5;
    double step_factor = 10.0;

    /// Learning rate for 1-based `epoch`.
    double rate_at(int epoch) const;
    void validate() const;
};

template <typename Scalar>
struct OptimizerState {
    Vector<Scalar> velocity;
    int epochs_done = 0;
};

struct TrainOptions {
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 1;
};

struct EpochMetrics {
    int epoch = 0;
    double learning_rate = 0.0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;
};

template <typename Scalar>
struct LabeledInputs {
    std::vector<std::vector<Image<Scalar>>> inputs;  // per sample, per scale
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

template <typename Scalar>
LabeledInputs<Scalar> prepare_inputs(const MultiScaleNet<Scalar>& net,
                                     std::span<const ActionImage> images,
                                     std::span<const int> labels);

/// One SGD step per minibatch:
///   v <- momentum * v - lr * (grad E + weight_decay * theta),  theta <- theta + v.
/// Minibatch order comes from the stream (seed, absolute epoch), so resuming
/// from a saved state continues the same sequence. Per-sample gradients are
/// summed in sample order. Throws NumericError on a non-finite loss.
template <typename Scalar>
std::vector<EpochMetrics> train(MultiScaleNet<Scalar>& net, OptimizerState<Scalar>& state,
                                const LabeledInputs<Scalar>& data, const OptimizerConfig& optimizer,
                                const TrainOptions& options,
                                const std::function<std::optional<double>(const MultiScaleNet<Scalar>&)>&
                                    evaluate = {});

template <typename Scalar>
double accuracy(const MultiScaleNet<Scalar>& net, const LabeledInputs<Scalar>& data);

// ------------------------------------------------------------------ gradient check

struct LayerGradError {
    std::string layer;
    double max_relative_error = 0.0;
    Eigen::Index worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    /// Samples whose +-h probes landed on different linear pieces; each was
    /// replaced by another parameter of the same layer.
    std::size_t kinks_skipped = 0;
    std::vector<LayerGradError> layers;
    double tolerance = 0.0;
    bool passed = false;
};

/// Relative error used by grad_check: |a - n| / max(|a|, |n|, floor).
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

/// Compares the analytic gradient of the loss with central differences
/// (E(theta + h) - E(theta - h)) / 2h on at least `samples` parameters drawn
/// round-robin from every layer. A probe pair straddling a ReLU or max-pool
/// switch is not a valid difference quotient and is resampled.
template <typename Scalar>
GradCheckReport grad_check(const MultiScaleNet<Scalar>& net, std::span<const Image<Scalar>> inputs,
                           int label, double h, double tolerance, std::size_t samples = 200,
                           std::uint64_t seed = 5);

}  // namespace actionimg
