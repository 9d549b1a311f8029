#include "flowtriage/aad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flowtriage/errors.hpp"

namespace flowtriage {

using nlohmann::json;

Standardizer fit_standardizer(const Eigen::MatrixXd& benign_numeric, double epsilon) {
    if (benign_numeric.cols() != 6) throw DimMismatch("feature matrix must have 6 columns");
    if (benign_numeric.rows() < 2) throw TooFewRows(benign_numeric.rows());
    if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");
    Standardizer s;
    s.epsilon = epsilon;
    s.mu = benign_numeric.colwise().mean();
    const Eigen::MatrixXd centered = benign_numeric.rowwise() - s.mu.transpose();
    s.sigma = (centered.array().square().colwise().mean()).sqrt();
    return s;
}

Eigen::MatrixXd standardize(const Standardizer& s, const Eigen::MatrixXd& x) {
    if (x.cols() != 6) throw DimMismatch("expected 6 columns, got " + std::to_string(x.cols()));
    const Eigen::Array<double, 1, 6> denom = (s.sigma.array() + s.epsilon).transpose();
    return ((x.rowwise() - s.mu.transpose()).array().rowwise() / denom).matrix();
}

Eigen::Matrix<double, 6, 1> standardize_row(const Standardizer& s,
                                            const Eigen::Matrix<double, 6, 1>& x) {
    return ((x - s.mu).array() / (s.sigma.array() + s.epsilon)).matrix();
}

namespace {

double mse(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat) {
    return (x - xhat).squaredNorm() / static_cast<double>(x.size());
}

}  // namespace

double mean_reconstruction_error(const AEModel& m, const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw EmptyTrainingSet();
    double total = 0.0;
    for (long r = 0; r < rows.rows(); ++r) {
        const Eigen::VectorXd x = rows.row(r).transpose();
        total += mse(x, m.net.forward(x));
    }
    return total / static_cast<double>(rows.rows());
}

Eigen::VectorXd reconstruction_grad(const AEModel& m, const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw EmptyTrainingSet();
    auto grads = m.net.zero_like();
    const double scale = 1.0 / static_cast<double>(rows.rows());
    for (long r = 0; r < rows.rows(); ++r) {
        const Eigen::VectorXd x = rows.row(r).transpose();
        const ForwardTrace t = m.net.forward_trace(x);
        const Eigen::VectorXd grad_out =
            2.0 * (t.output() - x) * scale / static_cast<double>(x.size());
        m.net.backprop(t, grad_out, grads);
    }
    return flatten_grads(grads);
}

AEModel train_autoencoder(const Eigen::MatrixXd& benign_std, const AETrainConfig& cfg) {
    if (benign_std.rows() == 0) throw EmptyTrainingSet();
    if (cfg.dims.size() < 3 || cfg.dims.front() != benign_std.cols() ||
        cfg.dims.back() != benign_std.cols()) {
        throw DimMismatch("autoencoder dims must start and end at the feature count");
    }
    const int bottleneck = *std::min_element(cfg.dims.begin(), cfg.dims.end());
    if (bottleneck >= cfg.dims.front()) {
        throw ValidationError("bottleneck must be narrower than the input");
    }

    AEModel m;
    m.dims = cfg.dims;
    m.epochs = cfg.epochs;
    m.lr = cfg.lr;
    m.seed = cfg.seed;

    Rng init_rng(derive_seed(cfg.seed, "ae-init"));
    m.net = make_mlp(cfg.dims, Activation::Relu, Activation::Identity, init_rng);

    Rng shuffle_rng(derive_seed(cfg.seed, "ae-shuffle"));
    const long n = benign_std.rows();
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (long start = 0; start < n; start += cfg.batch_size) {
            const long stop = std::min(n, start + cfg.batch_size);
            auto grads = m.net.zero_like();
            for (long i = start; i < stop; ++i) {
                const Eigen::VectorXd x = benign_std.row(order[static_cast<std::size_t>(i)]);
                const ForwardTrace t = m.net.forward_trace(x);
                // d/dxhat of mean((x - xhat)^2) = 2 (xhat - x) / |F|
                const Eigen::VectorXd grad_out =
                    2.0 * (t.output() - x) / static_cast<double>(x.size());
                m.net.backprop(t, grad_out, grads);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) {
                g.W *= inv;
                g.b *= inv;
            }
            sgd_step(m.net, grads, cfg.lr);
        }
    }
    return m;
}

AEModel load_explicit_weights(const std::vector<Eigen::MatrixXd>& weights,
                              const std::vector<Eigen::VectorXd>& biases,
                              const std::vector<Activation>& acts) {
    if (weights.empty() || weights.size() != biases.size() || weights.size() != acts.size()) {
        throw DimMismatch("weights/biases/activations must align one per layer");
    }
    AEModel m;
    m.dims.push_back(static_cast<int>(weights.front().cols()));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (biases[i].size() != weights[i].rows()) {
            throw DimMismatch("bias length must equal layer output dim");
        }
        if (i > 0 && weights[i].cols() != weights[i - 1].rows()) {
            throw DimMismatch("layer " + std::to_string(i) + " input dim does not chain");
        }
        m.dims.push_back(static_cast<int>(weights[i].rows()));
        m.net.layers.push_back({weights[i], biases[i], acts[i]});
    }
    return m;
}

double aad_score(const AEModel& m, const Eigen::Matrix<double, 6, 1>& x) {
    if (m.net.input_dim() != 6) throw DimMismatch("model input dim is not 6");
    return mse(x, m.net.forward(x));
}

std::vector<ScoredWindow> score_windows(const AEModel& m, const Standardizer& s,
                                        const std::vector<Window>& windows) {
    std::vector<ScoredWindow> scored;
    scored.reserve(windows.size());
    for (const auto& w : windows) {
        ScoredWindow sw;
        sw.index = w.index;
        sw.aad_score = aad_score(m, standardize_row(s, aggregate_numeric(w)));
        sw.metadata = build_metadata(w);
        sw.label = w.label;
        scored.push_back(std::move(sw));
    }
    return scored;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (long r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const long rows = static_cast<long>(j.size());
    if (rows == 0) throw ValidationError("empty weight matrix");
    const long cols = static_cast<long>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (static_cast<long>(j.at(r).size()) != cols) throw ValidationError("ragged matrix rows");
        for (long c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<long>(j.size()));
    for (long i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

}  // namespace

std::string scoring_model_to_json(const ScoringModel& sm) {
    json doc;
    doc["format"] = "flowtriage-scoring-model";
    doc["dims"] = sm.model.dims;
    doc["epochs"] = sm.model.epochs;
    doc["lr"] = sm.model.lr;
    doc["seed"] = sm.model.seed;
    json layers = json::array();
    for (const auto& l : sm.model.net.layers) {
        layers.push_back({{"weights", matrix_to_json(l.W)},
                          {"bias", vector_to_json(l.b)},
                          {"activation", to_string(l.act)}});
    }
    doc["layers"] = std::move(layers);
    doc["standardizer"] = {{"mu", vector_to_json(sm.standardizer.mu)},
                           {"sigma", vector_to_json(sm.standardizer.sigma)},
                           {"epsilon", sm.standardizer.epsilon}};
    return doc.dump(2);
}

ScoringModel scoring_model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("scoring model is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "flowtriage-scoring-model") {
        throw ValidationError("not a scoring-model document");
    }
    ScoringModel sm;
    sm.model.dims = doc.at("dims").get<std::vector<int>>();
    sm.model.epochs = doc.at("epochs").get<int>();
    sm.model.lr = doc.at("lr").get<double>();
    sm.model.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& lj : doc.at("layers")) {
        Layer l;
        l.W = matrix_from_json(lj.at("weights"));
        l.b = vector_from_json(lj.at("bias"));
        l.act = activation_from_string(lj.at("activation").get<std::string>());
        sm.model.net.layers.push_back(std::move(l));
    }
    const auto& st = doc.at("standardizer");
    const Eigen::VectorXd mu = vector_from_json(st.at("mu"));
    const Eigen::VectorXd sigma = vector_from_json(st.at("sigma"));
    if (mu.size() != 6 || sigma.size() != 6) throw DimMismatch("standardizer must be 6-wide");
    sm.standardizer.mu = mu;
    sm.standardizer.sigma = sigma;
    sm.standardizer.epsilon = st.at("epsilon").get<double>();
    return sm;
}

}  // namespace flowtriage
