#include "actionimg/net.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "actionimg/errors.hpp"
#include "actionimg/rng.hpp"

namespace actionimg {

// ------------------------------------------------------------------ config

TrunkConfig TrunkConfig::desk_default() {
    return TrunkConfig{{{16, 1, true}, {32, 1, true}, {64, 1, true}, {64, 1, false}}};
}

int TrunkConfig::output_size(int size) const {
    for (const auto& block : blocks) {
        if (size < 1 || block.stride < 1) return 0;
        size = (size - 1) / block.stride + 1;
        if (block.pool) size /= 2;
    }
    return size;
}

void NetConfig::validate() const {
    if (trunk.blocks.empty()) throw ConfigError("net: trunk needs at least one conv block");
    for (const auto& block : trunk.blocks) {
        if (block.stride < 1) throw ConfigError("net: conv strides must be >= 1");
        if (block.out_channels < 1) throw ConfigError("net: conv channels must be >= 1");
    }
    if (scales.empty()) throw ConfigError("net: at least one input scale is required");
    for (int s : scales) {
        if (s < 4) throw ConfigError("net: input scale " + std::to_string(s) + " is below 4");
        if (trunk.output_size(s) < 1)
            throw ConfigError("net: input scale " + std::to_string(s) +
                              " collapses to nothing in the trunk");
    }
    if (class_count < 2) throw ConfigError("net: need at least two classes");
}

double OptimizerConfig::rate_at(int epoch) const {
    if (epoch <= hold_epochs) return learning_rate;
    const int steps = (epoch - hold_epochs + step_epochs - 1) / step_epochs;
    return learning_rate / std::pow(step_factor, steps);
}

void OptimizerConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw ConfigError("optimizer: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("optimizer: momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("optimizer: weight_decay must be >= 0");
    if (hold_epochs < 0 || step_epochs < 1) throw ConfigError("optimizer: bad schedule epochs");
    if (!(step_factor >= 1.0)) throw ConfigError("optimizer: step_factor must be >= 1");
}

// ------------------------------------------------------------------ network

template <typename Scalar>
struct MultiScaleNet<Scalar>::Trace {
    struct Block {
        int in_h, in_w, out_h, out_w;
        Matrix<Scalar> col;  // im2col of the block input
        Matrix<Scalar> act;  // after max(0, .), before pooling
        std::vector<Eigen::Index> argmax;
        int pooled_h = 0, pooled_w = 0;
    };
    std::vector<Block> blocks;
    Vector<Scalar> features;
    Eigen::Index final_pixels = 0;
};

template <typename Scalar>
MultiScaleNet<Scalar>::MultiScaleNet(NetConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    build_layout();
    params_ = Vector<Scalar>::Zero(params_.size());
    auto rng = seeded_rng({seed});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& block : blocks_) {
        const double stddev = std::sqrt(2.0 / (9.0 * block.in_channels));
        const Eigen::Index count = Eigen::Index(block.out_channels) * 9 * block.in_channels;
        for (Eigen::Index i = 0; i < count; ++i)
            params_(block.weight_offset + i) = static_cast<Scalar>(stddev * normal(rng));
    }
    const int channels = config_.trunk.out_channels();
    const double stddev = std::sqrt(2.0 / channels);
    for (const auto& cls : classifiers_)
        for (Eigen::Index i = 0; i < Eigen::Index(config_.class_count) * channels; ++i)
            params_(cls.weight_offset + i) = static_cast<Scalar>(stddev * normal(rng));
}

template <typename Scalar>
MultiScaleNet<Scalar>::MultiScaleNet(NetConfig config, Vector<Scalar> parameters)
    : config_(std::move(config)) {
    config_.validate();
    build_layout();
    if (parameters.size() != params_.size())
        throw ConfigError("net: expected " + std::to_string(params_.size()) + " parameters, got " +
                          std::to_string(parameters.size()));
    params_ = std::move(parameters);
}

template <typename Scalar>
void MultiScaleNet<Scalar>::build_layout() {
    Eigen::Index offset = 0;
    int in = 3;
    blocks_.clear();
    classifiers_.clear();
    segments_.clear();
    for (std::size_t b = 0; b < config_.trunk.blocks.size(); ++b) {
        const auto& cfg = config_.trunk.blocks[b];
        BlockView view{offset, 0, in, cfg.out_channels, cfg.stride, cfg.pool};
        const Eigen::Index weights = Eigen::Index(cfg.out_channels) * 9 * in;
        const std::string name = "block" + std::to_string(b + 1);
        segments_.push_back({name + ".weight", offset, weights});
        offset += weights;
        view.bias_offset = offset;
        segments_.push_back({name + ".bias", offset, cfg.out_channels});
        offset += cfg.out_channels;
        blocks_.push_back(view);
        in = cfg.out_channels;
    }
    const std::size_t heads = config_.shared_classifier ? 1 : config_.scales.size();
    for (std::size_t s = 0; s < heads; ++s) {
        const std::string name = config_.shared_classifier ? "classifier" : "classifier" + std::to_string(s + 1);
        ClassifierView view{offset, 0};
        const Eigen::Index weights = Eigen::Index(config_.class_count) * in;
        segments_.push_back({name + ".weight", offset, weights});
        offset += weights;
        view.bias_offset = offset;
        segments_.push_back({name + ".bias", offset, config_.class_count});
        offset += config_.class_count;
        classifiers_.push_back(view);
    }
    params_.resize(offset);
}

template <typename Scalar>
const typename MultiScaleNet<Scalar>::ClassifierView& MultiScaleNet<Scalar>::classifier(std::size_t scale) const {
    return config_.shared_classifier ? classifiers_.front() : classifiers_.at(scale);
}

template <typename Scalar>
std::vector<Image<Scalar>> MultiScaleNet<Scalar>::prepare(const ActionImage& image) const {
    std::vector<Image<Scalar>> out;
    out.reserve(config_.scales.size());
    for (int s : config_.scales) out.push_back(resize<Scalar>(image, s, s));
    return out;
}

template <typename Scalar>
Vector<Scalar> MultiScaleNet<Scalar>::run_trunk(const Image<Scalar>& input, Trace* trace) const {
    Matrix<Scalar> x = input.data;
    int h = input.height;
    int w = input.width;
    if (trace) trace->blocks.clear();
    for (const auto& block : blocks_) {
        const int cin = block.in_channels;
        const int s = block.stride;
        const int oh = (h - 1) / s + 1;
        const int ow = (w - 1) / s + 1;
        Matrix<Scalar> col = Matrix<Scalar>::Zero(Eigen::Index(9) * cin, Eigen::Index(oh) * ow);
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const Eigen::Index p = Eigen::Index(oy) * ow + ox;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = oy * s + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = ox * s + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        col.col(p).segment((ky * 3 + kx) * cin, cin) = x.col(Eigen::Index(iy) * w + ix);
                    }
                }
            }
        Eigen::Map<const Matrix<Scalar>> weight(params_.data() + block.weight_offset,
                                                block.out_channels, Eigen::Index(9) * cin);
        Eigen::Map<const Vector<Scalar>> bias(params_.data() + block.bias_offset, block.out_channels);
        Matrix<Scalar> act = weight * col;
        act.colwise() += bias;
        act = act.cwiseMax(Scalar(0));

        typename Trace::Block record{h, w, oh, ow, {}, {}, {}, 0, 0};
        if (block.pool) {
            const int ph = oh / 2;
            const int pw = ow / 2;
            Matrix<Scalar> pooled(block.out_channels, Eigen::Index(ph) * pw);
            if (trace) record.argmax.resize(std::size_t(block.out_channels) * ph * pw);
            for (int py = 0; py < ph; ++py)
                for (int px = 0; px < pw; ++px) {
                    const Eigen::Index q = Eigen::Index(py) * pw + px;
                    const Eigen::Index base = Eigen::Index(2 * py) * ow + 2 * px;
                    const Eigen::Index cand[4] = {base, base + 1, base + ow, base + ow + 1};
                    for (int c = 0; c < block.out_channels; ++c) {
                        Eigen::Index best = cand[0];
                        for (int t = 1; t < 4; ++t)
                            if (act(c, cand[t]) > act(c, best)) best = cand[t];
                        pooled(c, q) = act(c, best);
                        if (trace) record.argmax[std::size_t(q) * block.out_channels + c] = best;
                    }
                }
            record.pooled_h = ph;
            record.pooled_w = pw;
            h = ph;
            w = pw;
            if (trace) {
                record.col = std::move(col);
                record.act = std::move(act);
            }
            x = std::move(pooled);
        } else {
            h = oh;
            w = ow;
            if (trace) {
                record.col = std::move(col);
                record.act = act;
            }
            x = std::move(act);
        }
        if (trace) trace->blocks.push_back(std::move(record));
    }
    Vector<Scalar> features = x.rowwise().mean();
    if (trace) {
        trace->features = features;
        trace->final_pixels = x.cols();
    }
    return features;
}

template <typename Scalar>
Vector<Scalar> MultiScaleNet<Scalar>::classify(const Vector<Scalar>& features, std::size_t scale) const {
    const auto& cls = classifier(scale);
    Eigen::Map<const Matrix<Scalar>> weight(params_.data() + cls.weight_offset, config_.class_count,
                                            features.size());
    Eigen::Map<const Vector<Scalar>> bias(params_.data() + cls.bias_offset, config_.class_count);
    return weight * features + bias;
}

template <typename Scalar>
Vector<Scalar> MultiScaleNet<Scalar>::features(const Image<Scalar>& input) const {
    return run_trunk(input, nullptr);
}

template <typename Scalar>
NetOutput<Scalar> MultiScaleNet<Scalar>::forward(const ActionImage& image) const {
    const auto inputs = prepare(image);
    return forward(inputs);
}

template <typename Scalar>
NetOutput<Scalar> MultiScaleNet<Scalar>::forward(std::span<const Image<Scalar>> inputs) const {
    if (inputs.size() != config_.scales.size())
        throw ConfigError("net: expected one input per scale");
    NetOutput<Scalar> out;
    const Scalar inv = Scalar(1) / static_cast<Scalar>(inputs.size());
    out.averaged_logits = Vector<Scalar>::Zero(config_.class_count);
    Vector<Scalar> mean_prob = Vector<Scalar>::Zero(config_.class_count);
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        out.scale_logits.push_back(classify(run_trunk(inputs[s], nullptr), s));
        out.averaged_logits += out.scale_logits.back() * inv;
        mean_prob += softmax(out.scale_logits.back()) * inv;
    }
    out.probabilities = config_.average == AverageMode::Logits ? softmax(out.averaged_logits) : mean_prob;
    return out;
}

template <typename Scalar>
void MultiScaleNet<Scalar>::backward(const Trace& trace, const Vector<Scalar>& dlogits,
                                     std::size_t scale, Vector<Scalar>& gradient) const {
    const auto& cls = classifier(scale);
    const Eigen::Index channels = trace.features.size();
    Eigen::Map<const Matrix<Scalar>> cls_weight(params_.data() + cls.weight_offset, config_.class_count, channels);
    Eigen::Map<Matrix<Scalar>> cls_weight_grad(gradient.data() + cls.weight_offset, config_.class_count, channels);
    Eigen::Map<Vector<Scalar>> cls_bias_grad(gradient.data() + cls.bias_offset, config_.class_count);
    cls_weight_grad.noalias() += dlogits * trace.features.transpose();
    cls_bias_grad += dlogits;

    const Vector<Scalar> dfeat = cls_weight.transpose() * dlogits;
    Matrix<Scalar> dx = (dfeat / static_cast<Scalar>(trace.final_pixels)).replicate(1, trace.final_pixels);

    for (std::size_t b = blocks_.size(); b-- > 0;) {
        const auto& block = blocks_[b];
        const auto& rec = trace.blocks[b];
        const Eigen::Index out_pixels = Eigen::Index(rec.out_h) * rec.out_w;
        Matrix<Scalar> dact;
        if (block.pool) {
            dact = Matrix<Scalar>::Zero(block.out_channels, out_pixels);
            const Eigen::Index pooled = Eigen::Index(rec.pooled_h) * rec.pooled_w;
            for (Eigen::Index q = 0; q < pooled; ++q)
                for (int c = 0; c < block.out_channels; ++c)
                    dact(c, rec.argmax[std::size_t(q) * block.out_channels + c]) += dx(c, q);
        } else {
            dact = std::move(dx);
        }
        const Matrix<Scalar> dpre = dact.cwiseProduct((rec.act.array() > Scalar(0)).template cast<Scalar>().matrix());

        const Eigen::Index k = Eigen::Index(9) * block.in_channels;
        Eigen::Map<Matrix<Scalar>> weight_grad(gradient.data() + block.weight_offset, block.out_channels, k);
        Eigen::Map<Vector<Scalar>> bias_grad(gradient.data() + block.bias_offset, block.out_channels);
        weight_grad.noalias() += dpre * rec.col.transpose();
        bias_grad += dpre.rowwise().sum();
        if (b == 0) break;

        Eigen::Map<const Matrix<Scalar>> weight(params_.data() + block.weight_offset, block.out_channels, k);
        const Matrix<Scalar> dcol = weight.transpose() * dpre;
        const int cin = block.in_channels;
        dx = Matrix<Scalar>::Zero(cin, Eigen::Index(rec.in_h) * rec.in_w);
        for (int oy = 0; oy < rec.out_h; ++oy)
            for (int ox = 0; ox < rec.out_w; ++ox) {
                const Eigen::Index p = Eigen::Index(oy) * rec.out_w + ox;
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = oy * block.stride + ky - 1;
                    if (iy < 0 || iy >= rec.in_h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = ox * block.stride + kx - 1;
                        if (ix < 0 || ix >= rec.in_w) continue;
                        dx.col(Eigen::Index(iy) * rec.in_w + ix) += dcol.col(p).segment((ky * 3 + kx) * cin, cin);
                    }
                }
            }
    }
}

template <typename Scalar>
Scalar MultiScaleNet<Scalar>::loss(std::span<const Image<Scalar>> inputs, int label,
                                   Vector<Scalar>* gradient, NetOutput<Scalar>* output) const {
    if (label < 0 || label >= config_.class_count)
        throw DataError("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(config_.class_count) + ")");
    if (inputs.size() != config_.scales.size())
        throw ConfigError("net: expected one input per scale");
    const std::size_t scales = inputs.size();
    const Scalar inv_scales = Scalar(1) / static_cast<Scalar>(scales);
    const Scalar inv_heads = Scalar(1) / static_cast<Scalar>(scales + 1);

    std::vector<Trace> traces(gradient ? scales : 0);
    NetOutput<Scalar> out;
    out.averaged_logits = Vector<Scalar>::Zero(config_.class_count);
    for (std::size_t s = 0; s < scales; ++s) {
        const auto feats = run_trunk(inputs[s], gradient ? &traces[s] : nullptr);
        out.scale_logits.push_back(classify(feats, s));
        out.averaged_logits += out.scale_logits.back() * inv_scales;
    }

    std::vector<HeadLoss<Scalar>> heads;
    Scalar total = 0;
    for (const auto& logits : out.scale_logits) {
        heads.push_back(cross_entropy(logits, label));
        total += heads.back().loss;
    }
    std::vector<Vector<Scalar>> dlogits(scales);
    for (std::size_t s = 0; s < scales; ++s) dlogits[s] = heads[s].gradient;

    if (config_.average == AverageMode::Logits) {
        const auto combined = cross_entropy(out.averaged_logits, label);
        total += combined.loss;
        out.probabilities = combined.probabilities;
        for (auto& d : dlogits) d += combined.gradient * inv_scales;
    } else {
        Vector<Scalar> mean_prob = Vector<Scalar>::Zero(config_.class_count);
        for (const auto& head : heads) mean_prob += head.probabilities * inv_scales;
        total += -std::log(mean_prob(label));
        out.probabilities = mean_prob;
        // d(-log mean_k)/dx_s = -(1 / (S mean_k)) p_sk (onehot_k - p_s)
        for (std::size_t s = 0; s < scales; ++s) {
            const auto& p = heads[s].probabilities;
            Vector<Scalar> onehot_minus_p = -p;
            onehot_minus_p(label) += Scalar(1);
            dlogits[s] -= onehot_minus_p * (p(label) * inv_scales / mean_prob(label));
        }
    }

    if (gradient)
        for (std::size_t s = 0; s < scales; ++s) backward(traces[s], dlogits[s] * inv_heads, s, *gradient);
    if (output) *output = std::move(out);
    return total * inv_heads;
}

template <typename Scalar>
Prediction MultiScaleNet<Scalar>::predict(const ActionImage& image) const {
    const auto inputs = prepare(image);
    return predict(inputs);
}

template <typename Scalar>
Prediction MultiScaleNet<Scalar>::predict(std::span<const Image<Scalar>> inputs) const {
    const auto out = forward(inputs);
    return Prediction{argmax_lowest(out.probabilities), out.probabilities.template cast<double>()};
}

template <typename Scalar>
std::uint64_t MultiScaleNet<Scalar>::activation_signature(std::span<const Image<Scalar>> inputs) const {
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](std::uint64_t v) {
        hash ^= v;
        hash *= 1099511628211ull;
    };
    for (const auto& input : inputs) {
        Trace trace;
        run_trunk(input, &trace);
        for (const auto& block : trace.blocks) {
            for (Eigen::Index i = 0; i < block.act.size(); ++i) mix(block.act.data()[i] > Scalar(0));
            for (auto a : block.argmax) mix(static_cast<std::uint64_t>(a));
        }
    }
    return hash;
}

// ------------------------------------------------------------------ training

template <typename Scalar>
LabeledInputs<Scalar> prepare_inputs(const MultiScaleNet<Scalar>& net, std::span<const ActionImage> images,
                                     std::span<const int> labels) {
    if (images.size() != labels.size()) throw ConfigError("images and labels differ in length");
    LabeledInputs<Scalar> data;
    data.inputs.reserve(images.size());
    for (const auto& img : images) data.inputs.push_back(net.prepare(img));
    data.labels.assign(labels.begin(), labels.end());
    return data;
}

template <typename Scalar>
double accuracy(const MultiScaleNet<Scalar>& net, const LabeledInputs<Scalar>& data) {
    if (data.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        correct += net.predict(data.inputs[i]).label == data.labels[i];
    return static_cast<double>(correct) / data.size();
}

template <typename Scalar>
std::vector<EpochMetrics> train(MultiScaleNet<Scalar>& net, OptimizerState<Scalar>& state,
                                const LabeledInputs<Scalar>& data, const OptimizerConfig& optimizer,
                                const TrainOptions& options,
                                const std::function<std::optional<double>(const MultiScaleNet<Scalar>&)>& evaluate) {
    optimizer.validate();
    if (options.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (options.epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (options.epochs > 0 && data.size() == 0) throw DataError("train: empty training set");
    auto& params = net.parameters();
    if (state.velocity.size() != params.size()) state.velocity = Vector<Scalar>::Zero(params.size());

    const Scalar momentum = static_cast<Scalar>(optimizer.momentum);
    const Scalar decay = static_cast<Scalar>(optimizer.weight_decay);
    std::vector<EpochMetrics> history;
    std::vector<std::size_t> order(data.size());
    Vector<Scalar> grad(params.size());

    for (int e = 0; e < options.epochs; ++e) {
        const int epoch = state.epochs_done + 1;
        const double rate = optimizer.rate_at(epoch);
        const Scalar lr = static_cast<Scalar>(rate);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto rng = seeded_rng({options.seed, static_cast<std::uint64_t>(epoch)});
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t stop = std::min(order.size(), start + options.batch_size);
            grad.setZero();
            for (std::size_t i = start; i < stop; ++i) {
                const std::size_t idx = order[i];
                NetOutput<Scalar> out;
                const Scalar value = net.loss(data.inputs[idx], data.labels[idx], &grad, &out);
                if (!std::isfinite(static_cast<double>(value)))
                    throw NumericError("loss became non-finite at epoch " + std::to_string(epoch) +
                                       " (learning rate " + std::to_string(rate) + ")");
                loss_sum += static_cast<double>(value);
                correct += argmax_lowest(out.probabilities) == data.labels[idx];
            }
            grad /= static_cast<Scalar>(stop - start);
            state.velocity = momentum * state.velocity - lr * (grad + decay * params);
            params += state.velocity;
        }
        if (!params.allFinite()) throw NumericError("parameters became non-finite at epoch " + std::to_string(epoch));

        EpochMetrics m;
        m.epoch = epoch;
        m.learning_rate = rate;
        m.loss = data.size() ? loss_sum / data.size() : 0.0;
        m.train_accuracy = data.size() ? static_cast<double>(correct) / data.size() : 0.0;
        if (evaluate) m.test_accuracy = evaluate(net);
        history.push_back(m);
        state.epochs_done = epoch;
    }
    return history;
}

// ------------------------------------------------------------------ gradient check

template <typename Scalar>
GradCheckReport grad_check(const MultiScaleNet<Scalar>& net, std::span<const Image<Scalar>> inputs, int label,
                           double h, double tolerance, std::size_t samples, std::uint64_t seed) {
    Vector<Scalar> analytic = Vector<Scalar>::Zero(net.parameter_count());
    net.loss(inputs, label, &analytic);

    auto rng = seeded_rng({seed});
    std::vector<std::vector<Eigen::Index>> pools;
    for (const auto& seg : net.segments()) {
        std::vector<Eigen::Index> idx(seg.size);
        std::iota(idx.begin(), idx.end(), seg.offset);
        std::shuffle(idx.begin(), idx.end(), rng);
        pools.push_back(std::move(idx));
    }

    GradCheckReport report;
    report.tolerance = tolerance;
    for (const auto& seg : net.segments()) report.layers.push_back(LayerGradError{seg.name});

    MultiScaleNet<Scalar> probe = net;
    auto& theta = probe.parameters();
    std::vector<std::size_t> cursor(pools.size(), 0);
    auto exhausted = [&] {
        for (std::size_t s = 0; s < pools.size(); ++s)
            if (cursor[s] < pools[s].size()) return false;
        return true;
    };
    while (report.checked < samples && !exhausted()) {
        for (std::size_t s = 0; s < pools.size() && report.checked < samples; ++s) {
            // next parameter of this layer whose probes stay on one linear piece
            Eigen::Index i = -1;
            double e_up = 0.0, e_down = 0.0;
            Scalar up{}, down{};
            while (cursor[s] < pools[s].size()) {
                const Eigen::Index cand = pools[s][cursor[s]++];
                const Scalar original = theta(cand);
                up = static_cast<Scalar>(original + h);
                down = static_cast<Scalar>(original - h);
                theta(cand) = up;
                e_up = static_cast<double>(probe.loss(inputs, label));
                const auto sig_up = probe.activation_signature(inputs);
                theta(cand) = down;
                e_down = static_cast<double>(probe.loss(inputs, label));
                const auto sig_down = probe.activation_signature(inputs);
                theta(cand) = original;
                if (sig_up == sig_down) {
                    i = cand;
                    break;
                }
                ++report.kinks_skipped;
            }
            if (i < 0) continue;
            const double numeric = (e_up - e_down) / (static_cast<double>(up) - static_cast<double>(down));
            const double a = static_cast<double>(analytic(i));
            const double err = relative_error(a, numeric);

            auto& layer = report.layers[s];
            ++layer.checked;
            if (err > layer.max_relative_error || layer.worst_index < 0) {
                layer.max_relative_error = err;
                layer.worst_index = i;
                layer.analytic = a;
                layer.numeric = numeric;
            }
            report.max_relative_error = std::max(report.max_relative_error, err);
            ++report.checked;
        }
    }
    report.passed = report.checked > 0 && report.max_relative_error < tolerance;
    return report;
}

// ------------------------------------------------------------------ instantiations

#define ACTIONIMG_INSTANTIATE(S)                                                                  \
    template class MultiScaleNet<S>;                                                              \
    template LabeledInputs<S> prepare_inputs<S>(const MultiScaleNet<S>&, std::span<const ActionImage>, \
                                                std::span<const int>);                            \
    template double accuracy<S>(const MultiScaleNet<S>&, const LabeledInputs<S>&);                \
    template std::vector<EpochMetrics> train<S>(                                                  \
        MultiScaleNet<S>&, OptimizerState<S>&, const LabeledInputs<S>&, const OptimizerConfig&,   \
        const TrainOptions&, const std::function<std::optional<double>(const MultiScaleNet<S>&)>&); \
    template GradCheckReport grad_check<S>(const MultiScaleNet<S>&, std::span<const Image<S>>, int, \
                                           double, double, std::size_t, std::uint64_t);

ACTIONIMG_INSTANTIATE(float)
ACTIONIMG_INSTANTIATE(double)

#undef ACTIONIMG_INSTANTIATE

}  // namespace actionimg
